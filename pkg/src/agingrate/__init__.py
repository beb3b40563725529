"""agingrate: individual rate of aging from cohort mortality data.

Fits a gamma-Gompertz hazard whose log slope follows a latent random walk
with drift across birth cohorts, separating a baseline rate of aging from
period-shock volatility and a long-run trend.
"""

from .convergence import effective_sample_size, split_rhat
from .dataset import CohortDataset, read_dataset_csv, write_dataset_csv
from .hazards import (
    AgeGrid,
    GompertzCohortParams,
    cohort_hazard,
    expected_deaths,
    individual_hazard,
)
from .hmd import SelectionRule, build_dataset, load_hmd, parse_hmd
from .posterior import (
    ModelParameters,
    PriorConfig,
    log_likelihood,
    log_posterior,
    log_prior,
)
from .ppc import QqSeries, posterior_predictive_qq
from .sampler import PosteriorDraws, SamplerConfig, run_chains
from .simulate import TruthScenario, default_scenario, draw_walk, generate_dataset
from .stationarity import StationarityResult, adf_test, kpss_test
from .summaries import (
    KdeConfig,
    MddReport,
    ParameterSummary,
    hpd_interval,
    mdd,
    p_direction,
    p_map,
    p_two_sided,
    posterior_mode,
    summarize_draws,
)
from .walk import LatentWalk, SlopeSeries, laplace_logpdf, reconstruct, walk_logprior

__version__ = "0.1.0"

__all__ = [
    "AgeGrid",
    "CohortDataset",
    "GompertzCohortParams",
    "KdeConfig",
    "LatentWalk",
    "MddReport",
    "ModelParameters",
    "ParameterSummary",
    "PosteriorDraws",
    "PriorConfig",
    "QqSeries",
    "SamplerConfig",
    "SelectionRule",
    "SlopeSeries",
    "StationarityResult",
    "TruthScenario",
    "adf_test",
    "build_dataset",
    "cohort_hazard",
    "default_scenario",
    "draw_walk",
    "effective_sample_size",
    "expected_deaths",
    "generate_dataset",
    "hpd_interval",
    "individual_hazard",
    "kpss_test",
    "laplace_logpdf",
    "load_hmd",
    "log_likelihood",
    "log_posterior",
    "log_prior",
    "mdd",
    "p_direction",
    "p_map",
    "p_two_sided",
    "parse_hmd",
    "posterior_mode",
    "posterior_predictive_qq",
    "read_dataset_csv",
    "reconstruct",
    "run_chains",
    "split_rhat",
    "summarize_draws",
    "walk_logprior",
    "write_dataset_csv",
]
