import numpy as np
import pytest

from athermal import kernels

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line per acceptance criterion and return the verdict."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
