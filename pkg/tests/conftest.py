import numpy as np
import pytest

import ifoutage as io


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""

    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        request.config._acceptance_lines.append(line)
        print(line)
        return ok

    return _report


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, n_r, n_t, scale=1.0):
    return io.ComplexChannel(scale * (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))) / np.sqrt(2))


WORST = io.ComplexChannel(np.sqrt(2.0**8 - 1) * np.array([[1, 0], [0, 0]]))
