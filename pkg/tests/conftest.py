import numpy as np
import pytest

from sphfilm.geometry import build_grid
from sphfilm.model import ModelParams, ScenarioSpec
from sphfilm.stepper import StepperConfig, run_scenario

# Narrow bumps act as near-point sources: the front forgets the initial edge
# shape quickly and the source-type growth law becomes measurable before the
# two fronts meet at the origin.
FRONT_SCENARIO = dict(r0=0.45, bump_center=0.475, bump_width=0.025, amplitude=1.0)
FRONT_T_END = {1.2: 6e-3, 1.5: 2.5e-2, 1.8: 2e-1}


def front_scenario(n: float, cadence: int = 400) -> ScenarioSpec:
    return ScenarioSpec(t_end=FRONT_T_END[n], output_cadence=cadence, **FRONT_SCENARIO)


@pytest.fixture(scope="session")
def reference_run_n15():
    """Two-bump run at n = 1.5, N = 256 shared by diagnostics/front tests."""
    grid = build_grid(256, 1e-6)
    params = ModelParams(n=1.5, eps=1e-8, fsp_mode=True)
    scenario = front_scenario(1.5)
    config = StepperConfig()
    traj = run_scenario(scenario, grid, params, config)
    return traj, config
