import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pfaffgeo.surface import catalog

settings.register_profile(
    "repo",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

# (name, params) of every catalog fixture exercised across the suite
SURFACES = [
    ("hyperplane", [3]),
    ("hyperplane", [4]),
    ("hypersphere", [3]),
    ("hypersphere", [4]),
    ("hypersphere", [5]),
    ("ellipsoid", [3, 1.0, 1.5, 2.0]),
    ("ellipsoid", [4, 1.0, 1.5, 2.0, 1.2]),
    ("torus3", [2.0, 0.5]),
    ("graph", [3]),
    ("graph", [4]),
]

ACCEPTANCE_LINES: list[str] = []


def surface_id(case) -> str:
    name, params = case
    return f"{name}-{'-'.join(str(p) for p in params)}"


@pytest.fixture(params=SURFACES, ids=surface_id)
def any_surface(request):
    return catalog(*request.param)


@pytest.fixture
def acceptance():
    """Collector for the one-line acceptance verdicts printed after the run."""
    return ACCEPTANCE_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
