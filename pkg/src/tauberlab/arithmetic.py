"""Sieve-based exact computation of the arithmetic summatory functions.

The central object is :class:`SieveEngine`: a segmented sieve that makes a
single streaming sweep over blocks of [1, limit], filling a checkpointed
:class:`SummatoryLedger` at the requested query points and retaining a sparse
index of the prime powers (the support of the von Mangoldt function).  The
sparse index answers later psi/psi1/pi queries at arbitrary points in
O(log #primepowers) without re-sieving, which is what the shift-average
experiments lean on.

Memory is O(block_size + sqrt(limit)) during the sweep plus O(pi(limit))
for the retained prime-power index (about 250 MB at limit 1e8).
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import SieveRangeError
from .util import KahanSum

# Euler-Mascheroni constant, stored to 18+ significant digits.
EULER_GAMMA = 0.577215664901532860606512090082

# Largest block a single sieve_block call will materialize.
MAX_BLOCK = 1 << 26

_CACHE_MAGIC = b"TAUBLDG1"
_CACHE_VERSION = 1

# Chunk length for building compensated cumulative sums over the sparse index.
_CUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class TauberInput:
    """Constants entering the one-sided averaging experiments."""

    gamma_const: float = EULER_GAMMA
    m_const: float = 1.0

    def __post_init__(self):
        if abs(self.gamma_const - 0.5772156649015329) > 1e-15:
            raise ValueError("gamma_const does not match the Euler-Mascheroni constant")
        if not self.m_const > 0:
            raise ValueError("m_const must be positive")


@dataclass(frozen=True)
class SieveBlock:
    """Exact Lambda and mu tables for n in [lo, hi)."""

    lo: int
    hi: int
    lambda_vals: np.ndarray  # float64, log p at prime powers, else 0
    mu_vals: np.ndarray      # int8 in {-1, 0, 1}

    def __post_init__(self):
        if len(self.lambda_vals) != self.hi - self.lo or len(self.mu_vals) != self.hi - self.lo:
            raise ValueError("block arrays do not match [lo, hi)")


@dataclass(frozen=True)
class SummatoryLedger:
    """Checkpointed cumulative values at sorted query points."""

    queries: np.ndarray  # float64, sorted, >= 1
    psi: np.ndarray      # float64
    psi1: np.ndarray     # float64
    mertens: np.ndarray  # float64, sum of mu(n)/n
    pi: np.ndarray       # int64

    def row(self, x):
        """Return (psi, psi1, mertens, pi) at a query point x (must be present)."""
        i = int(np.searchsorted(self.queries, x))
        if i >= len(self.queries) or self.queries[i] != x:
            raise KeyError(f"x = {x} is not a ledger checkpoint")
        return float(self.psi[i]), float(self.psi1[i]), float(self.mertens[i]), int(self.pi[i])


def base_primes(n):
    """All primes <= n via a plain boolean sieve (n is at most sqrt(limit))."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p:: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _fill_block(lo, hi, primes):
    """Core segment computation.

    Returns (lam, mu, isprime) for n in [lo, hi).  `primes` must contain all
    primes <= sqrt(hi - 1).
    """
    m = hi - lo
    n = np.arange(lo, hi, dtype=np.int64)
    composite = np.zeros(m, dtype=bool)
    mu = np.ones(m, dtype=np.int8)
    rem = n.copy()

    for p in primes:
        p = int(p)
        if p * p >= hi and p > hi:
            break
        start = (-lo) % p
        # composites: multiples of p from p^2 upward
        cstart = max(p * p, lo + start)
        if cstart < hi:
            composite[cstart - lo:: p] = True
        # mobius bookkeeping: one sign flip and one division per multiple of p
        if lo + start < hi:
            sl = slice(start, m, p)
            np.negative(mu[sl], out=mu[sl])
            rem[sl] //= p
        p2 = p * p
        s2 = (-lo) % p2
        if lo + s2 < hi:
            mu[s2:: p2] = 0

    # a remaining factor > sqrt(hi) is a single prime: one more sign flip
    big = rem > 1
    mu[big] = -mu[big]

    isprime = ~composite
    if lo == 1:
        isprime[0] = False
    lam = np.zeros(m, dtype=np.float64)
    if isprime.any():
        lam[isprime] = np.log(n[isprime].astype(np.float64))
    # proper prime powers p^k, k >= 2 (these sit on composite slots)
    for p in primes:
        p = int(p)
        q = p * p
        if q >= hi:
            break
        while q < hi:
            if q >= lo:
                lam[q - lo] = math.log(p)
            q *= p
    return lam, mu, isprime


def sieve_block(lo, hi):
    """Exact Lambda(n) and mu(n) for every n in [lo, hi)."""
    if not (1 <= lo < hi):
        raise SieveRangeError(f"invalid block range [{lo}, {hi})")
    if hi - lo > MAX_BLOCK:
        raise SieveRangeError(f"block length {hi - lo} exceeds the configured maximum {MAX_BLOCK}")
    primes = base_primes(math.isqrt(hi - 1))
    lam, mu, _ = _fill_block(int(lo), int(hi), primes)
    return SieveBlock(int(lo), int(hi), lam, mu)


class _SparseIndex:
    """Prime powers <= limit with compensated cumulative psi/psi1 columns."""

    def __init__(self, n, lam, isprime):
        self.n = n                      # float64, exact integers
        self.lam = lam                  # float64
        self.logn = np.log(n)
        self.cum_psi = _chunked_cumsum(lam)
        self.cum_psi1 = _chunked_cumsum(lam / n)
        self.cum_pi = np.cumsum(isprime.astype(np.int64))

    def psi(self, x):
        i = np.searchsorted(self.n, np.floor(x), side="right")
        return _take_cum(self.cum_psi, i)

    def psi1(self, x):
        i = np.searchsorted(self.n, np.floor(x), side="right")
        return _take_cum(self.cum_psi1, i)

    def pi(self, x):
        i = np.searchsorted(self.n, np.floor(x), side="right")
        return _take_cum(self.cum_pi, i)


def _chunked_cumsum(terms):
    """Cumulative sum with a Kahan-compensated baseline every _CUM_CHUNK terms.

    Plain cumsum over ~6e6 terms loses ~1e-8 absolute on the psi1 scale,
    which would eat the 1e-9 budget of the partial-summation identity check.
    """
    out = np.empty_like(terms)
    acc = KahanSum()
    for i in range(0, len(terms), _CUM_CHUNK):
        chunk = terms[i: i + _CUM_CHUNK]
        np.cumsum(chunk, out=out[i: i + len(chunk)])
        out[i: i + len(chunk)] += acc.total
        acc.add(np.sum(chunk))
    return out


def _take_cum(cum, idx):
    scalar = np.isscalar(idx) or getattr(idx, "ndim", 0) == 0
    idx = np.atleast_1d(idx)
    vals = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0)
    if scalar:
        return vals.dtype.type(vals[0]).item()
    return vals


class SieveEngine:
    """Single-sweep segmented sieve over [1, limit].

    The first ledger request triggers the sweep; the sparse prime-power index
    is retained so that later psi/psi1/pi evaluations at arbitrary points cost
    a binary search instead of a new sweep.  The dense Mobius column exists
    only at the checkpointed queries (there is no sparse shortcut for it).
    """

    def __init__(self, limit, block_size=1 << 20):
        limit = int(limit)
        if limit < 1:
            raise SieveRangeError("limit must be >= 1")
        if not 1 <= block_size <= MAX_BLOCK:
            raise SieveRangeError("block_size out of range")
        self.limit = limit
        self.block_size = int(block_size)
        self._sparse = None
        self._ledger = None

    # -- sweep ---------------------------------------------------------------

    def ledger(self, queries):
        """Ledger at the given query points (sorted internally).

        Queries must lie in [1, limit].  If the engine already swept and the
        requested points are a subset of the cached checkpoints, the cached
        columns are sliced; otherwise a fresh sweep runs over the union.
        """
        qs = np.asarray(sorted(float(q) for q in queries), dtype=np.float64)
        if qs.size and (qs[0] < 1 or qs[-1] > self.limit):
            raise SieveRangeError(
                f"queries must lie in [1, {self.limit}], got range [{qs[0]}, {qs[-1]}]")
        if self._ledger is not None:
            cached = self._ledger.queries
            pos = np.searchsorted(cached, qs)
            if qs.size == 0 or (pos < len(cached)).all() and np.array_equal(cached[pos], qs):
                return SummatoryLedger(qs, self._ledger.psi[pos], self._ledger.psi1[pos],
                                       self._ledger.mertens[pos], self._ledger.pi[pos])
            qs = np.union1d(cached, qs)
        self._sweep(qs)
        return self.ledger(queries)

    def _sweep(self, qs):
        primes = base_primes(math.isqrt(self.limit))
        acc_psi, acc_psi1, acc_mert = KahanSum(), KahanSum(), KahanSum()
        n_pi = 0
        out_psi = np.empty(len(qs))
        out_psi1 = np.empty(len(qs))
        out_mert = np.empty(len(qs))
        out_pi = np.empty(len(qs), dtype=np.int64)
        qfloor = np.floor(qs).astype(np.int64)
        qi = 0
        sparse_n, sparse_lam, sparse_isp = [], [], []

        for lo in range(1, self.limit + 1, self.block_size):
            hi = min(lo + self.block_size, self.limit + 1)
            lam, mu, isprime = _fill_block(lo, hi, primes)
            n = np.arange(lo, hi, dtype=np.float64)
            t_psi1 = lam / n
            t_mert = mu.astype(np.float64) / n

            pp = lam > 0
            sparse_n.append(n[pp])
            sparse_lam.append(lam[pp])
            sparse_isp.append(isprime[pp])

            prev = 0
            while qi < len(qs) and qfloor[qi] < hi:
                cut = max(int(qfloor[qi]) - lo + 1, 0)
                acc_psi.add(np.sum(lam[prev:cut]))
                acc_psi1.add(np.sum(t_psi1[prev:cut]))
                acc_mert.add(np.sum(t_mert[prev:cut]))
                n_pi += int(np.count_nonzero(isprime[prev:cut]))
                out_psi[qi] = acc_psi.total
                out_psi1[qi] = acc_psi1.total
                out_mert[qi] = acc_mert.total
                out_pi[qi] = n_pi
                prev = cut
                qi += 1
            acc_psi.add(np.sum(lam[prev:]))
            acc_psi1.add(np.sum(t_psi1[prev:]))
            acc_mert.add(np.sum(t_mert[prev:]))
            n_pi += int(np.count_nonzero(isprime[prev:]))

        self._sparse = _SparseIndex(np.concatenate(sparse_n), np.concatenate(sparse_lam),
                                    np.concatenate(sparse_isp))
        self._ledger = SummatoryLedger(qs, out_psi, out_psi1, out_mert, out_pi)

    # -- sparse queries --------------------------------------------------------

    def _index(self):
        if self._sparse is None:
            self.ledger([])
        return self._sparse

    def _check_range(self, x):
        if np.any(np.asarray(x) > self.limit) or np.any(np.asarray(x) < 0):
            raise SieveRangeError(f"query outside sieved range [0, {self.limit}]")

    def psi_at(self, x):
        self._check_range(x)
        return self._index().psi(x)

    def psi1_at(self, x):
        self._check_range(x)
        return self._index().psi1(x)

    def pi_at(self, x):
        self._check_range(x)
        return self._index().pi(x)

    @property
    def prime_powers(self):
        """(n, lam, log n) arrays over the support of Lambda, ascending in n."""
        idx = self._index()
        return idx.n, idx.lam, idx.logn

    def s_of(self, x):
        return s_of(x, self)


def summatory(queries, limit, block_size=1 << 20):
    """One streaming sweep filling all ledger columns at the query points."""
    return SieveEngine(limit, block_size=block_size).ledger(queries)


def s_of(x, source):
    """The shifted Mertens remainder: psi1(e^x) - x + gamma, and 0 for x < 0.

    `source` is a SieveEngine (arbitrary x with e^x <= limit) or a
    SummatoryLedger (e^x must floor to a checkpointed query's floor).
    """
    x = float(x)
    if x < 0:
        return 0.0
    y = math.exp(x)
    if isinstance(source, SieveEngine):
        if y > source.limit:
            raise SieveRangeError(f"e^{x} = {y} exceeds the sieve limit {source.limit}")
        p1 = source.psi1_at(y)
    else:
        qf = np.floor(source.queries)
        i = int(np.searchsorted(qf, math.floor(y)))
        if i >= len(qf) or qf[i] != math.floor(y):
            raise SieveRangeError(f"e^{x} has no matching ledger checkpoint")
        p1 = float(source.psi1[i])
    return p1 - x + EULER_GAMMA


# -- serialization -------------------------------------------------------------

def ledger_to_csv(ledger, path):
    from .util import write_csv
    rows = zip(ledger.queries, ledger.psi, ledger.psi1, ledger.mertens,
               (int(p) for p in ledger.pi))
    write_csv(path, ["x", "psi", "psi1", "mertens", "pi"], rows)


def save_ledger(ledger, path):
    """Flat little-endian binary cache with a 16-byte magic/version header."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<II", _CACHE_VERSION, 0))
        fh.write(struct.pack("<Q", len(ledger.queries)))
        for arr, dt in ((ledger.queries, "<f8"), (ledger.psi, "<f8"), (ledger.psi1, "<f8"),
                        (ledger.mertens, "<f8"), (ledger.pi, "<i8")):
            fh.write(np.asarray(arr, dtype=dt).tobytes())


def load_ledger(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path}: not a ledger cache (bad magic {magic!r})")
        version, _ = struct.unpack("<II", fh.read(8))
        if version != _CACHE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        (count,) = struct.unpack("<Q", fh.read(8))
        cols = []
        for dt in ("<f8", "<f8", "<f8", "<f8", "<i8"):
            cols.append(np.frombuffer(fh.read(8 * count), dtype=dt).copy())
    return SummatoryLedger(*cols)
