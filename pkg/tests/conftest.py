import numpy as np
import pytest

from core.context import RunContext
from core.log import set_quiet
from core.mesh import build_grid
from models import RunConfig
from modules.boundary import BoundaryConditions
from modules.scenarios import Scenario


@pytest.fixture(autouse=True)
def quiet_console():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture()
def small_grid():
    return build_grid((0.0, 4.0, 0.0, 3.0), 4, 3)


def make_context(scenario: str, **fields) -> RunContext:
    return RunContext(RunConfig(scenario=scenario, **fields))


def smooth_periodic_scenario() -> Scenario:
    """Everywhere wet, smooth bottom and flow on the periodic unit square."""
    two_pi = 2.0 * np.pi
    return Scenario(
        name="smooth-periodic",
        description="smooth wet test data",
        extent=(0.0, 1.0, 0.0, 1.0), nx=16, ny=16, g=9.81, end_time=0.1,
        bottom=lambda x, y: 0.1 * np.sin(two_pi * x) * np.cos(two_pi * y),
        surface=lambda x, y: 1.0 + 0.05 * np.cos(two_pi * (x + y)),
        velocity=lambda x, y: (0.2 * np.sin(two_pi * y), -0.1 * np.cos(two_pi * x)),
        boundary=BoundaryConditions.uniform("periodic"),
    )
