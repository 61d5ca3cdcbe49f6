import numpy as np
import pytest

import biortho as b
from biortho import kernels


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Emit one scorecard line per test tagged with ``_criterion``."""
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    meta = getattr(getattr(item, "function", None), "_criterion", None)
    if meta is None:
        return
    num, title = meta
    verdict = "PASS" if report.passed else "FAIL"
    item.config.get_terminal_writer().line(
        f"criterion {num}: {verdict} - {title}"
    )


@pytest.fixture(scope="session")
def demo_grid():
    return b.Grid(-4.0, 4.0, 801)


@pytest.fixture(scope="session")
def demo_dict(demo_grid):
    return b.demo_dictionary(demo_grid)


@pytest.fixture(scope="session")
def demo_f(demo_grid):
    return b.demo_signal(demo_grid)


@pytest.fixture(scope="session")
def demo_state(demo_dict):
    return b.build_duals(demo_dict)


@pytest.fixture(scope="session")
def demo_fit(demo_state, demo_f):
    return b.fit(demo_state, demo_f)


@pytest.fixture(scope="session")
def warm_kernels():
    """Exercise every kernel once so compilation never lands in a timed block."""
    w = np.full(8, 0.125)
    rows = np.arange(24, dtype=np.float64).reshape(3, 8)
    v = np.ones(8)
    kernels.dot_w(w, v, v)
    kernels.row_dots(w, rows, v)
    kernels.row_norms_sq(w, rows)
    kernels.weighted_gram(w, rows)
    kernels.mgs_residual(w, rows[:1] / np.sqrt(kernels.dot_w(w, rows[0], rows[0])), v)
    kernels.combine_rows(np.ones(3), rows)
    kernels.grow_duals(rows, np.ones(3), v, 2.0)
    kernels.drop_dual(rows, np.ones(3), 1, 2.0)
    return kernels.BACKEND
