import numpy as np
import pytest

from zosmooth.sampling import RngStream

SE_SLACK = 4.0


@pytest.fixture
def rng():
    return RngStream(20240611, 0)


def within_se(samples, target, slack=SE_SLACK, axis=0):
    """|mean - target| <= slack * standard error, elementwise."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    se = samples.std(axis=axis, ddof=1) / np.sqrt(n)
    return np.all(np.abs(mean - target) <= slack * se + 1e-15)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion; printed after the run."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
