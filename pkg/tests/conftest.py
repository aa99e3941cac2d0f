"""Shared fixtures: weak-grid plant, tuned gains, test scenario and full runs."""
from dataclasses import replace

import pytest

from flatgrid.engine import run_scenario, summarize
from flatgrid.models import PlantParams, PoleSpec, SimConfig
from flatgrid.trajectory import weak_grid_scenario
from flatgrid.tuning import tune


@pytest.fixture(scope='session')
def params():
    return PlantParams()


@pytest.fixture(scope='session')
def gains():
    tuned, _, _ = tune(PoleSpec(1e-3, 0.707), PoleSpec(10e-3, 0.707))
    return tuned


@pytest.fixture(scope='session')
def scenario(params):
    return weak_grid_scenario(params.S_N)


@pytest.fixture(scope='session')
def full_cfg():
    """Default 1 us step, logged every 10 us so finite differences stay accurate."""
    return replace(SimConfig(), decimation=10)


@pytest.fixture(scope='session')
def full_run(params, gains, scenario, full_cfg):
    """The complete 280 ms weak-grid test: (record, summary)."""
    record = run_scenario(params, gains, scenario, full_cfg)
    return record, summarize(record, scenario, full_cfg)
