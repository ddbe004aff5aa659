import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian(rng, shape, field="real"):
    z = rng.standard_normal(shape)
    if field == "complex":
        z = (z + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return z


_REPORT = []


def report(number, name, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} ({name}): {detail}"
    _REPORT.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_REPORT, key=lambda t: t[0]):
            terminalreporter.write_line(line)
