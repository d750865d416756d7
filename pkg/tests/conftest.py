import numpy as np
import pytest

from shapecorr import _accel, synthetic
from shapecorr.laplacian import assemble
from shapecorr.mesh import compute_areas
from shapecorr.spectrum import solve_reduced

ACCEPTANCE_LINES: list[str] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


BACKENDS = [False, True] if _accel.HAVE_NUMBA else [False]


@pytest.fixture(params=BACKENDS, ids=lambda b: "numba" if b else "numpy")
def use_numba(request):
    return request.param


@pytest.fixture(scope="session")
def small_torus():
    return synthetic.torus(16, 10, noise=0.15, seed=3)


@pytest.fixture(scope="session")
def small_torus_op(small_torus):
    return assemble(small_torus, compute_areas(small_torus))


@pytest.fixture(scope="session")
def small_basis(small_torus_op):
    return solve_reduced(small_torus_op, 40)


@pytest.fixture(scope="session")
def desk_torus():
    """About the size of the TOSCA wolf (4344 vertices)."""
    return synthetic.torus(72, 60, noise=0.1, seed=7)


@pytest.fixture(scope="session")
def desk_basis(desk_torus):
    return solve_reduced(assemble(desk_torus, compute_areas(desk_torus)), 100)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
