"""Shift averages of the remainder function, evaluated two independent ways.

Time side: int S(x+h) phi(x) dx.  For the sieve-backed S this integrand is a
step function (one jump per prime power) plus an exactly linear part, so the
integral is computed exactly: the jump sum is accumulated against the kernel
antiderivative and only the smooth linear part goes through panel quadrature.
Plain node quadrature would stall near 1e-2 accuracy here because the
integrand carries millions of discontinuities.  Synthetic (smooth) inputs use
ordinary panel quadrature with panel edges pinned to their known breakpoints.

Frequency side: (1/2pi) int_{-R}^{R} G(t) e^{iht} phi_hat(-t) dt over the
sampled boundary table (composite Simpson; the integrand is band-limited and
its only kinks sit on grid points).  Agreement of the two sides at every h is
the central cross-validation of the whole laboratory.

The one-sided squeeze combines the time average with its reflected-kernel
partner:  a_reflected - M*eps <= S(h) <= a_time + M*eps.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .arithmetic import EULER_GAMMA, SieveEngine
from .errors import ConfigError, SieveRangeError
from .kernel import KernelParams, kernel_cdf, phi1, phi1_hat, phi1_tail
from .util import KahanSum, map_ordered, write_csv

# A priori bound on |S(u)| for every u >= 0, used for the truncation budget
# where S is beyond the sieved range.  Classical Mertens-type estimate:
# |psi1(x) - log x| <= 2 for all x >= 1, so |S| <= 2 + gamma < 2.6.
S_A_PRIORI_ENV = 2.6

_CHUNK = 1 << 19


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: KernelParams
    h_grid: tuple
    M: float = 1.0
    quad_T: float = 6.0
    quad_points_per_panel: int = 32
    freq_step: float = 1e-3

    def __post_init__(self):
        if self.M <= 0 or self.quad_T <= 0 or self.freq_step <= 0:
            raise ConfigError("M, quad_T and freq_step must be positive")
        if self.quad_points_per_panel < 4:
            raise ConfigError("quad_points_per_panel too small")
        hs = tuple(self.h_grid)
        if list(hs) != sorted(hs):
            raise ConfigError("h_grid must be sorted")
        ratio = self.kernel.R / self.freq_step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("freq_step must divide the kernel support radius R evenly")


@dataclass(frozen=True)
class AverageRow:
    h: float
    a_time: float
    a_freq: float
    s_h: float
    upper_gap: float
    lower_gap: float
    err_budget: float


class StepS:
    """The sieve-backed remainder S(x) = psi1(e^x) - x + gamma, 0 for x < 0.

    Keeps the prime-power jump positions in the logarithmic variable
    (u_j = log p^k, jump size log p / p^k) so the averaging integrals can
    consume the step structure exactly.
    """

    breaks = ()

    def __init__(self, engine):
        if not isinstance(engine, SieveEngine):
            raise TypeError("StepS wraps a SieveEngine")
        n, lam, logn = engine.prime_powers
        self.u = logn
        self.delta = lam / n
        cum = np.empty(len(self.delta) + 1)
        cum[0] = 0.0
        acc = KahanSum()
        for i in range(0, len(self.delta), _CHUNK):
            chunk = self.delta[i: i + _CHUNK]
            np.cumsum(chunk, out=cum[i + 1: i + 1 + len(chunk)])
            cum[i + 1: i + 1 + len(chunk)] += acc.total
            acc.add(np.sum(chunk))
        self.cum_delta = cum
        self.max_u = math.log(engine.limit)
        self.engine = engine

    def psi1_log(self, x):
        """psi1(e^x) from the jump structure (x in the logarithmic variable)."""
        idx = np.searchsorted(self.u, x, side="right")
        return self.cum_delta[idx]

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x > self.max_u + 1e-12):
            raise SieveRangeError(f"S evaluation beyond log(limit) = {self.max_u:.6f}")
        out = np.where(x < 0.0, 0.0, self.psi1_log(x) - x + EULER_GAMMA)
        return float(out[0]) if scalar else out


def exp_decay(u):
    """Synthetic oracle input: S(u) = e^{-u} on u >= 0, zero below."""
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.zeros_like(u)
    pos = u >= 0.0
    out[pos] = np.exp(-u[pos])
    return float(out[0]) if scalar else out


exp_decay.breaks = (0.0,)


def exp_decay_tail_env(u):
    return math.exp(-u)


def synthetic_exp_table(R, step=1e-3):
    """Closed-form boundary table for the synthetic input: G(t) = 1/(1+it)."""
    from .zeta import BoundaryTable
    K = int(round(R / step))
    if abs(K * step - R) > 1e-9 * max(1.0, R):
        raise ConfigError(f"step {step} does not divide R = {R} evenly")
    ts = (np.arange(2 * K + 1, dtype=np.float64) - K) * step
    return BoundaryTable(float(R), ts, 1.0 / (1.0 + 1j * ts), "closed-form")


class _Kern:
    """Scaled kernel with an orientation flag (phi(x) or phi(-x))."""

    def __init__(self, params, reflected=False):
        self.p = params
        self.lam = params.lam
        self.reflected = reflected
        self.cdf = kernel_cdf()

    def reflected_kern(self):
        return _Kern(self.p, not self.reflected)

    def f1(self, v):
        """phi1 in the scaled variable, honoring orientation."""
        return phi1(-v) if self.reflected else phi1(v)

    def hat_neg(self, t):
        """Transform factor phi_hat_eff(-t) entering the spectral integrand."""
        arg = np.asarray(t, dtype=np.float64) / self.lam
        return phi1_hat(arg) if self.reflected else phi1_hat(-arg)

    def mass_from(self, x, X):
        """int_x^X phi_eff for array x (scaled through the shared CDF table)."""
        if self.reflected:
            return self.cdf(-self.lam * np.asarray(x)) - self.cdf(-self.lam * X)
        return self.cdf(self.lam * X) - self.cdf(self.lam * np.asarray(x))

    def tail(self, a):
        """Bound on int_{|x| >= a} |phi_eff| (one side)."""
        return phi1_tail(self.lam * a)

    def clip_V(self):
        return self.cdf.V / self.lam


def _default_env(s, hX):
    """Tail envelope sup_{u >= hX} |S(u)| when the caller does not supply one."""
    if isinstance(s, StepS):
        return S_A_PRIORI_ENV
    # black-box input: sample outward and keep a safety factor
    us = hX + np.geomspace(1e-3, 60.0, 48)
    return 1.5 * float(np.max(np.abs(s(us)))) + 1e-300


def average_time(h, s, cfg, reflected=False, tail_env=None):
    """Time-domain shift average int_{-h}^{quad_T} S(x+h) phi(x) dx.

    Returns (value, err_budget) where the budget combines the certified
    right-tail truncation, the panel-rule discrepancy of the smooth part and
    (for the sieve-backed S) the CDF interpolation allowance of the jump sum.
    Below x = -h the integrand vanishes identically and is not sampled.
    """
    h = float(h)
    k = _Kern(cfg.kernel, reflected=reflected)
    X = float(cfg.quad_T)
    lam = k.lam
    n = cfg.quad_points_per_panel

    env = tail_env(h + X) if tail_env is not None else _default_env(s, h + X)
    budget = env * k.tail(X)

    if isinstance(s, StepS):
        if h + X > s.max_u + 1e-12:
            raise SieveRangeError(
                f"h + quad_T = {h + X:.4f} exceeds log(sieve limit) = {s.max_u:.4f}")
        # jump part: sum_j delta_j * int_{u_j - h}^{X} phi
        hi = int(np.searchsorted(s.u, h + X, side="right"))
        acc = KahanSum()
        used = 0.0
        clipped = 0.0
        for i in range(0, hi, _CHUNK):
            uu = s.u[i: min(i + _CHUNK, hi)]
            dd = s.delta[i: min(i + _CHUNK, hi)]
            x = uu - h
            acc.add(np.sum(dd * k.mass_from(x, X)))
            used += float(np.sum(dd))
            out = np.abs(x) > k.clip_V()
            if out.any():
                clipped += float(np.sum(dd[out]))
        jump_part = acc.total
        budget += used * 2e-10 + clipped * phi1_tail(k.cdf.V) + 1e-12
        # linear part: (gamma - (x+h)) phi(x) on [-h, X], in the scaled variable
        g = lambda v: (EULER_GAMMA - h - v / lam) * k.f1(v)
        smooth, rule_err = quadrature.integrate(g, -lam * h, lam * X, n=n)
        budget += rule_err
        return jump_part + smooth, budget

    # generic smooth input: node quadrature with breakpoints pinned to panels
    breaks = [lam * (b - h) for b in getattr(s, "breaks", ())]
    g = lambda v: s(v / lam + h) * k.f1(v)
    value, rule_err = quadrature.integrate(g, -lam * h if h > 0 else 0.0, lam * X,
                                           n=n, breaks=breaks)
    return value, budget + rule_err


def _simpson(y, dx):
    if len(y) % 2 != 1:
        raise ConfigError("Simpson needs an odd number of samples")
    return (dx / 3.0) * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2]))


def average_freq(h, table, cfg, reflected=False):
    """Spectral form (1/2pi) int_{-R}^{R} G(t) e^{iht} phi_hat(-t) dt.

    Returns (real_value, err_estimate); the imaginary residue (the true value
    is real) is folded into the estimate.
    """
    h = float(h)
    k = _Kern(cfg.kernel, reflected=reflected)
    R = cfg.kernel.R
    step = table.step
    if step > cfg.freq_step * (1.0 + 1e-9):
        raise ConfigError(f"table spacing {step} coarser than freq_step {cfg.freq_step}")
    if table.R < R - 1e-12:
        raise ConfigError(f"table covers [-{table.R}, {table.R}] but kernel needs radius {R}")
    mid = (len(table.ts) - 1) // 2
    half = int(round(R / step))
    if abs(half * step - R) > 1e-9:
        raise ConfigError("table grid does not contain +-R")
    sl = slice(mid - half, mid + half + 1)
    ts = table.ts[sl]
    f = table.G_vals[sl] * np.exp(1j * h * ts) * k.hat_neg(ts) / (2.0 * math.pi)
    val = _simpson(f, step)
    est = 0.0
    if half % 2 == 0:
        coarse = _simpson(f[::2], 2.0 * step)
        est = abs(val - coarse)
    est += abs(val.imag)
    return float(val.real), float(est)


def tauberian_bounds(h, s, cfg, tail_env=None):
    """Slack of the one-sided squeeze at shift h.

    upper_gap = a_time + M*eps - S(h) and lower_gap = S(h) - a_reflected
    + M*eps; both are nonnegative up to the quadrature budget once h is large
    enough that S(h) + M*h >= 0 (returns NaNs with a warning otherwise).
    """
    M, eps = cfg.M, cfg.kernel.epsilon
    s_h = float(np.asarray(s(h)).reshape(()))
    if s_h + M * h < 0:
        warnings.warn(f"squeeze not applicable at h = {h}: S(h) + M h < 0")
        return math.nan, math.nan
    a_up, _ = average_time(h, s, cfg, reflected=False, tail_env=tail_env)
    a_lo, _ = average_time(h, s, cfg, reflected=True, tail_env=tail_env)
    return a_up + M * eps - s_h, s_h - a_lo + M * eps


def decay_report(s, cfg, table, tail_env=None, threads=1):
    """One AverageRow per h: both averages, S(h), squeeze gaps, error budget."""
    M, eps = cfg.M, cfg.kernel.epsilon

    def one(h):
        at, bt = average_time(h, s, cfg, reflected=False, tail_env=tail_env)
        ar, _ = average_time(h, s, cfg, reflected=True, tail_env=tail_env)
        af, bf = average_freq(h, table, cfg)
        s_h = float(np.asarray(s(h)).reshape(()))
        return AverageRow(h=float(h), a_time=at, a_freq=af, s_h=s_h,
                          upper_gap=at + M * eps - s_h,
                          lower_gap=s_h - ar + M * eps,
                          err_budget=bt + bf)

    return map_ordered(one, cfg.h_grid, threads=threads)


def rows_to_csv(rows, path, cfg, sieve_limit=None):
    p = cfg.kernel
    meta = [
        f"kernel epsilon = {p.epsilon!r}, lambda = {p.lam}, R = {p.R!r}, c = {p.c!r}",
        f"M = {cfg.M!r}, quad_T = {cfg.quad_T!r}, "
        f"points_per_panel = {cfg.quad_points_per_panel}, freq_step = {cfg.freq_step!r}",
        f"sieve_limit = {sieve_limit}",
        f"h_grid = {[float(h) for h in cfg.h_grid]}",
    ]
    write_csv(path, ["h", "a_time", "a_freq", "s_h", "upper_gap", "lower_gap", "err_budget"],
              ((r.h, r.a_time, r.a_freq, r.s_h, r.upper_gap, r.lower_gap, r.err_budget)
               for r in rows), meta=meta)
