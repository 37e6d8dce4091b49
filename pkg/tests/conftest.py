import numpy as np
import pytest
from hypothesis import settings

from ldpc_workbench.degree_dist import EdgePerspective
from ldpc_workbench.factor_graph import sample_regular

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.stash[ACCEPTANCE], key=lambda r: r[0])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in lines:
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def report(request):
    """Record one acceptance line; the summary prints them in order."""
    lines = request.config.stash[ACCEPTANCE]

    def record(num: int, ok: bool, detail: str) -> None:
        lines.append((num, bool(ok), detail))
        print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ep36():
    return EdgePerspective.regular(3, 6)


@pytest.fixture(scope="session")
def small_code():
    return sample_regular(120, 3, 6, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
