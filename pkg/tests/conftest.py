import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ilwkit.spectral import Grid, ModelParams, RealField

settings.register_profile(
    "ilwkit", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ilwkit")


@pytest.fixture
def grid_1024():
    return Grid(1024, 100.0)


@pytest.fixture
def gaussian_1024(grid_1024):
    return RealField.from_function(grid_1024, lambda x: np.exp(-x ** 2))


@pytest.fixture
def unit_params():
    return ModelParams(1.0)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion; lines are echoed and summarized."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def report(number: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
