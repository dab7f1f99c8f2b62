import pytest

from levyheat import measure as M
from levyheat.symbol import SymbolEvaluator, power_symbol


@pytest.fixture(scope="session")
def cauchy_spec():
    return M.pure_stable(1.0)


@pytest.fixture(scope="session")
def stablelog_spec():
    return M.stable_log(1.2, 1.0, 0.5)


@pytest.fixture(scope="session")
def dyadic_spec():
    return M.dyadic(1.0, 1.0)


@pytest.fixture(scope="session")
def cauchy_ev(cauchy_spec):
    return SymbolEvaluator().fit(cauchy_spec)


@pytest.fixture(scope="session")
def stablelog_ev(stablelog_spec):
    return SymbolEvaluator().fit(stablelog_spec)


@pytest.fixture(scope="session")
def dyadic_ev(dyadic_spec):
    return SymbolEvaluator().fit(dyadic_spec)


@pytest.fixture(scope="session")
def closed_cauchy():
    """Re Phi = |xi| given analytically."""
    return power_symbol(1.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k].line())
    n_ok = sum(r.passed for r in RESULTS.values())
    terminalreporter.write_line(f"{n_ok}/{len(RESULTS)} criteria passed")
