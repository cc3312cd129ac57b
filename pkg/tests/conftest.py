import math
import time

import pytest

from tauberlab import SieveEngine
from tauberlab.kernel import make_kernel
from tauberlab.tauber import StepS
from tauberlab.zeta import build_boundary_table

SMALL_LIMIT = 10 ** 6
BIG_LIMIT = 10 ** 8

# checkpoints shared by the unit tests and the acceptance suite
CHECKPOINTS_SMALL = [1.0, 2.0, 10.0, 100.0, 10 ** 4, 10 ** 6]
CHECKPOINTS_BIG = [1.0, 10.0, 100.0, 10 ** 4, 10 ** 6, 10 ** 8]


@pytest.fixture(scope="session")
def engine_small():
    eng = SieveEngine(SMALL_LIMIT)
    eng.ledger(CHECKPOINTS_SMALL)
    return eng


@pytest.fixture(scope="session")
def engine_big():
    """The one expensive sieve sweep, shared by everything downstream.

    Returns (engine, build_seconds); the build time feeds the runtime
    acceptance criterion.
    """
    t0 = time.time()
    eng = SieveEngine(BIG_LIMIT, block_size=1 << 22)
    eng.ledger(CHECKPOINTS_BIG)
    eng.prime_powers  # force the sparse index
    return eng, time.time() - t0


@pytest.fixture(scope="session")
def step_s_big(engine_big):
    eng, _ = engine_big
    return StepS(eng)


@pytest.fixture(scope="session")
def boundary20():
    """Boundary table covering [-20, 20] at step 1e-3 (serves lambda <= 5)."""
    return build_boundary_table(20.0, 1e-3)


@pytest.fixture(scope="session")
def kernel_eps1():
    return make_kernel(1.0)


@pytest.fixture(scope="session")
def kernel_eps05():
    return make_kernel(0.5)


def log_limit(engine):
    return math.log(engine.limit)
