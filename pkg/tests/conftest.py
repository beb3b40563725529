import numpy as np
import pytest

from agingrate.simulate import default_scenario, generate_dataset


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: full acceptance-criteria suite (slow)"
    )


@pytest.fixture(scope="session")
def small_sim():
    """A small simulated dataset shared by fast tests."""
    scenario = default_scenario(n_cohorts=5, n_ages=6, seed=3)
    data, truth = generate_dataset(scenario)
    return data, truth


@pytest.fixture(scope="session")
def tiny_fit():
    """One short real fit on a small dataset, reused across test modules."""
    from agingrate import SamplerConfig, run_chains

    scenario = default_scenario(n_cohorts=6, n_ages=8, seed=12)
    data, truth = generate_dataset(scenario)
    cfg = SamplerConfig(
        seed=55, n_iter=1500, n_warmup=900, pilot_iters=400, pilot_keep=200,
        parallel=False,
    )
    return data, truth, run_chains(data, cfg)
