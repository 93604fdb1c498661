import sys
from importlib.resources import files

import pytest

from jpsq.builtins import table_case
from jpsq.quantizer import quantize

DATA = files("jpsq") / "data"


def data_text(name: str) -> str:
    return (DATA / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fig3b_A():
    """Fig. 3(b) Case A at a reduced charge cutoff (converged to < 0.3% in the splitting)."""
    return quantize(table_case("A", "fig3b"), n_max=6)


@pytest.fixture(scope="session")
def fig3b_A_small():
    """Fig. 3(b) Case A small enough for dense oracles (dim 9³ = 729)."""
    return quantize(table_case("A", "fig3b"), n_max=4)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance PASS/FAIL lines after the run."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        passed, detail = results[n]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {n}: {detail}")
