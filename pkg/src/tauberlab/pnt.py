"""Convergence diagnostics: the partial-summation identity and the PNT tables."""

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import EULER_GAMMA, SieveEngine
from .errors import SieveRangeError
from .util import KahanSum, write_csv

_CHUNK = 1 << 19


@dataclass(frozen=True)
class ConvergenceRow:
    x: float
    psi_ratio: float      # psi(x)/x
    pi_ratio: float       # pi(x) * log(x) / x
    mertens_dev: float    # psi1(x) - log x + gamma
    mobius_sum: float     # sum_{n<=x} mu(n)/n


def abel_identity_check(x, engine):
    """Partial-summation bridge psi1(x) = psi(x)/x + int_1^x psi(t)/t^2 dt.

    psi is a step function, so the integral is the exact finite sum
    sum_{p^k <= x} Lambda * (1/p^k - 1/x) over the ledger jumps; no quadrature
    error enters, the gap is floating-point accumulation only.  Returns
    (lhs, rhs, gap).
    """
    x = float(x)
    if not isinstance(engine, SieveEngine):
        raise TypeError("abel_identity_check needs a SieveEngine")
    if x > engine.limit:
        raise SieveRangeError(f"x = {x} beyond sieve limit {engine.limit}")
    lhs = engine.psi1_at(x)
    n, lam, _ = engine.prime_powers
    hi = int(np.searchsorted(n, math.floor(x), side="right"))
    acc = KahanSum()
    for i in range(0, hi, _CHUNK):
        nn = n[i: min(i + _CHUNK, hi)]
        ll = lam[i: min(i + _CHUNK, hi)]
        acc.add(np.sum(ll * (1.0 / nn - 1.0 / x)))
    rhs = engine.psi_at(x) / x + acc.total
    return lhs, rhs, abs(lhs - rhs)


def pnt_table(xs, engine):
    """One ConvergenceRow per checkpoint."""
    ledger = engine.ledger(xs)
    rows = []
    for x, psi, psi1, mert, pi in zip(ledger.queries, ledger.psi, ledger.psi1,
                                      ledger.mertens, ledger.pi):
        lx = math.log(x)
        rows.append(ConvergenceRow(
            x=float(x),
            psi_ratio=float(psi) / x,
            pi_ratio=int(pi) * lx / x,
            mertens_dev=float(psi1) - lx + EULER_GAMMA,
            mobius_sum=float(mert),
        ))
    return rows


def rows_to_csv(rows, path, sieve_limit=None):
    write_csv(path, ["x", "psi_ratio", "pi_ratio", "mertens_dev", "mobius_sum"],
              ((r.x, r.psi_ratio, r.pi_ratio, r.mertens_dev, r.mobius_sum) for r in rows),
              meta=[f"sieve_limit = {sieve_limit}"])


def abel_to_csv(entries, path):
    write_csv(path, ["x", "lhs", "rhs", "gap"], entries)
