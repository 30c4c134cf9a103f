import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def eig_sorted(values):
    """Sort complex eigenvalues by (imag, real) after rounding noise."""
    v = np.asarray(values, dtype=complex)
    return v[np.lexsort((np.round(v.real, 9), np.round(v.imag, 9)))]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
