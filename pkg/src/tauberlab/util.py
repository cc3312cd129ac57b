"""Small shared helpers: compensated accumulation, CSV output, ordered parallel map."""

from concurrent.futures import ThreadPoolExecutor


class KahanSum:
    """Compensated (Kahan) accumulator.

    Individual terms are expected to be chunk partial sums (numpy pairwise
    sums), so the compensation only has to absorb the cross-chunk rounding.
    """

    __slots__ = ("total", "_c")

    def __init__(self, start=0.0):
        self.total = float(start)
        self._c = 0.0

    def add(self, term):
        y = float(term) - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t
        return self.total


def write_csv(path, header, rows, meta=()):
    """Write rows of floats/ints as CSV with optional '#' metadata lines.

    Floats are rendered with repr (shortest round-trip form) so repeated
    runs produce byte-identical files.
    """
    with open(path, "w") as fh:
        for line in meta:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def map_ordered(fn, items, threads=1):
    """Map fn over items, preserving input order in the result list.

    With threads > 1 the work runs on a thread pool; results are still
    reduced in index order so output is deterministic.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
