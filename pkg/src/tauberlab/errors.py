"""Exception and warning types shared across the package."""


class SieveRangeError(ValueError):
    """A query or block request lies outside the sieved range."""


class ZetaDomainError(ValueError):
    """Evaluation requested outside the zeta evaluator's domain.

    Carries the offending point in ``point``.
    """

    def __init__(self, message, point):
        super().__init__(f"{message}: s = {point}")
        self.point = point


class NearZeroError(ArithmeticError):
    """|zeta(s)| fell below the configured floor; possible zero of zeta."""


class ConfigError(ValueError):
    """An experiment configuration is internally inconsistent."""


class FillMismatchWarning(UserWarning):
    """The two fill methods for the boundary value at t = 0 disagree."""
