"""Complex zeta evaluation on Re s > 0 and the boundary transform machinery.

zeta and zeta' come from one Euler-Maclaurin pass with an explicit truncation
bound (remainder at most the first omitted correction term inflated by
|s+2m+1|/(sigma+2m+1); the zeta' bound is a Cauchy-circle estimate of the
same remainder).  Everything downstream - the logarithmic derivative, the
two Laplace transforms, the boundary function G on Re s = 0 - is assembled
from that single evaluator.

Near s = 0 the transform of the shifted remainder is evaluated through a
frozen Taylor model so the double pole cancels without catastrophic loss;
the model coefficients are derived once from the Laurent data of zeta at 1
(see the constants below) and are cross-checked in the test suite against a
sigma-limit extrapolation of the direct evaluation.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arithmetic import EULER_GAMMA, base_primes
from .errors import ConfigError, FillMismatchWarning, NearZeroError, ZetaDomainError
from .util import map_ordered

# First Stieltjes constant (Laurent coefficient of zeta at 1 after gamma),
# frozen from a high-precision extrapolation of zeta(1+u) - 1/u - gamma ~ -g1*u.
STIELTJES_GAMMA1 = -0.07281584548367672486

# Taylor coefficients of the boundary transform at s = 0:
#   L(s) = Q2 + Q3 s + Q4 s^2 + Q5 s^3 + O(s^4).
# Q2 = gamma^2 + 2*gamma1 is the removable-singularity value at the origin;
# the higher coefficients are frozen from the same Laurent-data computation
# and re-derived in tests by extrapolating the direct evaluator.
BOUNDARY_Q2 = 0.18754623284036522
BOUNDARY_Q3 = -0.05168863203319289
BOUNDARY_Q4 = 0.01475165882545374
BOUNDARY_Q5 = -0.00452447788849538

# |s| below which laplace_s switches from direct evaluation to the model.
_MODEL_RADIUS = 1e-2

# |zeta| floor below which log_deriv refuses to divide.
_ZETA_FLOOR = 1e-8


@dataclass(frozen=True)
class ZetaConfig:
    cutoff_N: int = 64          # direct-sum length
    bernoulli_terms: int = 12   # Euler-Maclaurin correction depth

    def __post_init__(self):
        if self.cutoff_N < 10:
            raise ConfigError("cutoff_N must be >= 10")
        if not 2 <= self.bernoulli_terms <= 30:
            raise ConfigError("bernoulli_terms must lie in [2, 30]")


DEFAULT_CONFIG = ZetaConfig()


@dataclass(frozen=True)
class LaurentData:
    """Laurent data of zeta at s = 1 used by the t = 0 fill."""

    gamma0: float = EULER_GAMMA
    gamma1: float = STIELTJES_GAMMA1

    def __post_init__(self):
        if abs(self.gamma0 - EULER_GAMMA) > 1e-15:
            raise ValueError("gamma0 disagrees with the stored Euler-Mascheroni constant")
        if not (self.gamma1 < 0 and abs(self.gamma1) < 0.1):
            raise ValueError("gamma1 outside the expected range")


@lru_cache(maxsize=4)
def _bernoulli_even(count):
    """B_2, B_4, ..., B_{2*count} as floats (exact-fraction recurrence)."""
    top = 2 * count
    bern = [Fraction(1)]
    for m in range(1, top + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += math.comb(m + 1, j) * bern[j]
        bern.append(-acc / (m + 1))
    return tuple(float(bern[2 * k]) for k in range(1, count + 1))


def _em_core(s, cfg):
    """Euler-Maclaurin zeta and zeta' over an array of points.

    Returns (z, zp, bound, bound_p); valid for Re s > 0, s != 1.
    """
    s = np.asarray(s, dtype=np.complex128)
    N = cfg.cutoff_N
    m = cfg.bernoulli_terms
    b_even = _bernoulli_even(m + 1)

    logn = np.log(np.arange(1, N, dtype=np.float64))
    E = np.exp(-s[:, None] * logn[None, :])
    z = E.sum(axis=1)
    zp = -(E * logn[None, :]).sum(axis=1)

    lnN = math.log(N)
    NmS = np.exp(-s * lnN)          # N^{-s}
    t1 = NmS * (N / (s - 1.0))
    z += t1 + NmS / 2.0
    zp += t1 * (-lnN - 1.0 / (s - 1.0)) - lnN * NmS / 2.0

    P = s.copy()                    # pochhammer (s)_{2k-1}
    dP = np.ones_like(s)
    for k in range(1, m + 1):
        coef = b_even[k - 1] / math.factorial(2 * k) * float(N) ** (-2 * k + 1)
        z += coef * P * NmS
        zp += coef * NmS * (dP - lnN * P)
        f = (s + (2 * k - 1)) * (s + 2 * k)
        dP = dP * f + P * (2 * s + (4 * k - 1))
        P = P * f

    sigma = s.real
    bcoef = abs(b_even[m]) / math.factorial(2 * m + 2)
    bound = bcoef * np.abs(P) * np.exp(-(sigma + 2 * m + 1) * lnN) \
        * np.abs(s + (2 * m + 1)) / (sigma + 2 * m + 1)

    # Cauchy estimate for the derivative remainder on a circle of radius r.
    r = np.minimum(0.5, sigma / 2.0)
    abs_s = np.abs(s)
    Pb = np.ones_like(sigma)
    for j in range(2 * m + 1):
        Pb = Pb * (abs_s + r + j)
    bound_p = (bcoef / r) * Pb * np.exp(-(sigma - r + 2 * m + 1) * lnN) \
        * (abs_s + r + 2 * m + 1) / (sigma - r + 2 * m + 1)
    return z, zp, bound, bound_p


def _check_domain(s):
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise ZetaDomainError("non-finite point", s)
    if s.real <= 0:
        raise ZetaDomainError("Euler-Maclaurin evaluation requires Re s > 0", s)
    if s == 1:
        raise ZetaDomainError("pole of zeta", s)
    return s


def zeta_eval(s, cfg=DEFAULT_CONFIG):
    """zeta(s) for Re s > 0, s != 1.  Returns (value, truncation_bound)."""
    s = _check_domain(s)
    z, _, b, _ = _em_core(np.array([s]), cfg)
    return complex(z[0]), float(b[0])


def zeta_prime_eval(s, cfg=DEFAULT_CONFIG):
    """zeta'(s) by termwise differentiation of the same formula."""
    s = _check_domain(s)
    _, zp, _, bp = _em_core(np.array([s]), cfg)
    return complex(zp[0]), float(bp[0])


def euler_product(s, prime_limit, cfg=DEFAULT_CONFIG):
    """Truncated Euler product over primes <= prime_limit, Re s > 1.

    Returns (value, tail_estimate) where the tail estimate bounds the effect
    of the omitted primes: |log zeta - log product| <= sum_{n>P} n^{-sigma}
    inflated by the geometric factor 1/(1 - P^{-sigma}).
    """
    s = complex(s)
    if s.real <= 1:
        raise ZetaDomainError("Euler product converges only for Re s > 1", s)
    primes = base_primes(int(prime_limit)).astype(np.float64)
    if primes.size == 0:
        raise ZetaDomainError("prime_limit below 2", s)
    terms = np.exp(-s * np.log(primes))
    value = complex(np.exp(-np.sum(np.log1p(-terms))))
    sigma = s.real
    P = float(primes[-1])
    tail_log = P ** (1.0 - sigma) / ((sigma - 1.0) * (1.0 - P ** (-sigma)))
    return value, abs(value) * math.expm1(tail_log)


def log_deriv(s, cfg=DEFAULT_CONFIG, floor=_ZETA_FLOOR):
    """zeta'(s)/zeta(s); raises NearZeroError when |zeta(s)| < floor."""
    s = _check_domain(s)
    z, zp, _, _ = _em_core(np.array([s]), cfg)
    if abs(z[0]) < floor:
        raise NearZeroError(f"|zeta({s})| = {abs(z[0]):.3e} below floor {floor:.1e}; "
                            "possible zero of zeta")
    return complex(zp[0] / z[0])


def laplace_psi1(s, cfg=DEFAULT_CONFIG):
    """Transform of the logarithmic prime-power average: -zeta'(s+1)/(s zeta(s+1))."""
    s = complex(s)
    if s.real <= 0:
        raise ZetaDomainError("laplace_psi1 requires Re s > 0", s)
    return -log_deriv(s + 1.0, cfg) / s


def _bracket_direct(s, cfg):
    """(-zeta'/zeta)(1+s) - 1/s + gamma, grouped so the poles cancel.

    The zeta evaluator sees the rounded point fl(1+s); the subtracted pole
    terms must use the displacement fl(1+s) - 1 (exact by Sterbenz), not s
    itself, or the cancellation reintroduces an O(eps/|s|^2) error.  Returns
    (bracket, effective displacement).
    """
    w = s + 1.0
    s_eff = w - 1.0
    return -log_deriv(w, cfg) - 1.0 / s_eff + EULER_GAMMA, s_eff


def _model(s):
    s = complex(s)
    return BOUNDARY_Q2 + s * (BOUNDARY_Q3 + s * (BOUNDARY_Q4 + s * BOUNDARY_Q5))


def laplace_s(s, cfg=DEFAULT_CONFIG):
    """Transform of the shifted remainder S: the pole-cancelling combination.

    Valid for Re s > 0 and on the boundary line Re s = 0 except the origin
    (use boundary_g(0) for the removable singularity there).
    """
    s = complex(s)
    if s == 0:
        raise ZetaDomainError("removable singularity; call boundary_g(0)", s)
    if s.real < 0:
        raise ZetaDomainError("laplace_s requires Re s >= 0", s)
    if abs(s) < _MODEL_RADIUS:
        return _model(s)
    bracket, s_eff = _bracket_direct(s, cfg)
    return bracket / s_eff


def laplace_s_direct(s, cfg=DEFAULT_CONFIG):
    """laplace_s without the near-origin model branch.

    Exists so the sigma-limit fill of G(0) stays independent of the frozen
    Taylor coefficients it is meant to cross-check.
    """
    s = complex(s)
    if s == 0 or s.real < 0:
        raise ZetaDomainError("need Re s >= 0, s != 0", s)
    bracket, s_eff = _bracket_direct(s, cfg)
    return bracket / s_eff


def _extrapolate_to_zero(xs, ys):
    """Neville polynomial extrapolation of (xs, ys) to x = 0."""
    ys = list(ys)
    xs = list(xs)
    for level in range(1, len(xs)):
        for i in range(len(xs) - level):
            x0, x1 = xs[i], xs[i + level]
            ys[i] = (x0 * ys[i + 1] - x1 * ys[i]) / (x0 - x1)
    return ys[0]


def g_zero_fill(method="sigma-limit", cfg=DEFAULT_CONFIG):
    """The removable-singularity value G(0).

    'sigma-limit': Neville extrapolation of the direct evaluation along the
    real axis at sigma = 1e-2, 1e-3, 1e-4.  'stieltjes-series': the Laurent
    data value gamma0^2 + 2*gamma1.
    """
    if method == "stieltjes-series":
        ld = LaurentData()
        return complex(ld.gamma0 ** 2 + 2.0 * ld.gamma1)
    if method == "sigma-limit":
        sigmas = (1e-2, 1e-3, 1e-4)
        vals = [laplace_s_direct(sg, cfg).real for sg in sigmas]
        return complex(_extrapolate_to_zero(sigmas, vals))
    raise ConfigError(f"unknown fill method {method!r}")


def boundary_g(t, cfg=DEFAULT_CONFIG, fill_method="sigma-limit"):
    """The boundary function G(t) = laplace_s(it), with t = 0 filled."""
    t = float(t)
    if t == 0.0:
        return g_zero_fill(fill_method, cfg)
    return laplace_s(1j * t, cfg)


@dataclass(frozen=True)
class BoundaryTable:
    """Sampled boundary values on [-R, R] with the t = 0 fill."""

    R: float
    ts: np.ndarray
    G_vals: np.ndarray
    fill_method_at_zero: str

    @property
    def step(self):
        return float((self.ts[-1] - self.ts[0]) / (len(self.ts) - 1))


def _g_many(ts, cfg):
    """Vectorized boundary values at nonzero sample points."""
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty(ts.shape, dtype=np.complex128)
    small = np.abs(ts) < _MODEL_RADIUS
    if small.any():
        sv = 1j * ts[small]
        out[small] = BOUNDARY_Q2 + sv * (BOUNDARY_Q3 + sv * (BOUNDARY_Q4 + sv * BOUNDARY_Q5))
    big = ~small
    if big.any():
        s = 1j * ts[big]
        z, zp, _, _ = _em_core(1.0 + s, cfg)
        if np.min(np.abs(z)) < _ZETA_FLOOR:
            raise NearZeroError("zeta vanished on the sampled line")
        out[big] = (-(zp / z) - 1.0 / s + EULER_GAMMA) / s
    return out


def build_boundary_table(R, step=1e-3, cfg=DEFAULT_CONFIG, fill_method="sigma-limit",
                         threads=1, chunk=8192):
    """Sample G on the symmetric grid [-R, R] at the given spacing.

    The grid always contains 0 and is exactly sign-symmetric.  The fill value
    at 0 comes from the configured method; the other method is evaluated as a
    cross-check and a FillMismatchWarning is emitted if they disagree beyond
    1e-6.
    """
    K = int(round(R / step))
    if K < 1 or abs(K * step - R) > 1e-9 * max(1.0, R):
        raise ConfigError(f"step {step} does not divide R = {R} evenly")
    ts = (np.arange(2 * K + 1, dtype=np.float64) - K) * step

    nz = ts[ts != 0.0]
    chunks = [nz[i: i + chunk] for i in range(0, len(nz), chunk)]
    parts = map_ordered(lambda c: _g_many(c, cfg), chunks, threads=threads)

    G = np.empty(len(ts), dtype=np.complex128)
    G[ts != 0.0] = np.concatenate(parts) if parts else np.empty(0, dtype=np.complex128)

    fills = {m: g_zero_fill(m, cfg) for m in ("sigma-limit", "stieltjes-series")}
    if abs(fills["sigma-limit"] - fills["stieltjes-series"]) > 1e-6:
        warnings.warn("t = 0 fill methods disagree beyond 1e-6: "
                      f"{fills['sigma-limit']} vs {fills['stieltjes-series']}",
                      FillMismatchWarning)
    G[ts == 0.0] = fills[fill_method]
    return BoundaryTable(float(R), ts, G, fill_method)


def boundary_to_csv(table, path):
    from .util import write_csv
    rows = zip(table.ts, table.G_vals.real, table.G_vals.imag)
    write_csv(path, ["t", "re_G", "im_G"], rows,
              meta=[f"R = {table.R!r}, step = {table.step!r}, "
                    f"fill_method_at_zero = {table.fill_method_at_zero}"])


def zero_free_scan(t_max, step, cfg=DEFAULT_CONFIG, chunk=8192):
    """min over the grid of |zeta(1 + it)| for 0 < t <= t_max (pole excluded)."""
    if not (t_max > 0 and step > 0):
        raise ConfigError("t_max and step must be positive")
    ts = np.arange(step, t_max + step / 2, step)
    best = math.inf
    for i in range(0, len(ts), chunk):
        z, _, _, _ = _em_core(1.0 + 1j * ts[i: i + chunk], cfg)
        best = min(best, float(np.min(np.abs(z))))
    return best
