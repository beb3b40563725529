"""Joint log-posterior: Poisson death-count likelihood plus the prior stack.

Priors (constrained scale):

    a_t      ~ half-Normal(0, a_scale)        one per cohort
    gamma_t  ~ Gamma(shape, rate)             one per cohort
    w_t      ~ Laplace(0, sigma_rw)           walk innovations
    log b    ~ Normal(0, log_b_sd)
    beta     ~ Normal(0, beta_sd)
    sigma_rw ~ half-Normal(0, sigma_scale)

The source material writes "Normal(0, 2)" and "gamma(1, 1/2)" without saying
whether 2 is an sd or a variance, nor whether 1/2 is a rate or a scale.  Both
readings are exposed as switches on :class:`PriorConfig`; the defaults take
2 as the standard deviation and 1/2 as the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .dataset import CohortDataset
from .hazards import cohort_hazard_grid
from .walk import LatentWalk, laplace_logpdf, reconstruct, walk_logprior

__all__ = [
    "PriorConfig",
    "ModelParameters",
    "log_likelihood",
    "log_prior",
    "log_posterior",
    "pack_unconstrained",
    "unpack_unconstrained",
    "log_posterior_unconstrained",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorConfig:
    """Prior constants, with the two ambiguous parameterizations exposed."""

    a_scale: float = 1.0
    gamma_shape: float = 1.0
    gamma_second: float = 0.5
    gamma_second_is_rate: bool = True
    log_b_scale: float = 2.0
    beta_scale: float = 2.0
    normal_scale_is_sd: bool = True
    sigma_scale: float = 1.0

    @property
    def gamma_rate(self) -> float:
        return self.gamma_second if self.gamma_second_is_rate else 1.0 / self.gamma_second

    @property
    def log_b_sd(self) -> float:
        return self.log_b_scale if self.normal_scale_is_sd else math.sqrt(self.log_b_scale)

    @property
    def beta_sd(self) -> float:
        return self.beta_scale if self.normal_scale_is_sd else math.sqrt(self.beta_scale)


@dataclass(eq=False)
class ModelParameters:
    """One point in parameter space: per-cohort (a_t, gamma_t) plus the walk."""

    a: np.ndarray
    gamma: np.ndarray
    walk: LatentWalk

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        T = self.walk.n_cohorts
        if self.a.shape != (T,) or self.gamma.shape != (T,):
            raise ValueError(f"a and gamma must have length {T}")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.gamma))):
            raise ValueError("a and gamma must be finite")
        if np.any(self.a <= 0) or np.any(self.gamma <= 0):
            raise ValueError("a and gamma must be > 0")

    @property
    def n_cohorts(self) -> int:
        return self.walk.n_cohorts


def log_likelihood(params: ModelParameters, data: CohortDataset) -> float:
    """Poisson log likelihood over unmasked cells, log(D!) included.

    A cell with expected count 0 but observed deaths > 0 yields -inf rather
    than raising.
    """
    if params.n_cohorts != data.n_cohorts:
        raise ValueError(
            f"{params.n_cohorts} cohorts of parameters for "
            f"{data.n_cohorts} cohorts of data"
        )
    series = reconstruct(params.walk, data.cohorts)
    lam = cohort_hazard_grid(params.a, series.b_t, params.gamma, data.grid.midpoints)
    mu = lam * data.exposures
    d = data.deaths
    m = data.mask
    if np.any(m & (mu == 0.0) & (d > 0)):
        return -math.inf
    cell = xlogy(d, mu) - mu - gammaln(d + 1.0)
    return float(np.sum(cell[m]))


def _halfnormal_logpdf(x, scale):
    x = np.asarray(x, dtype=float)
    out = np.where(
        x >= 0,
        math.log(2.0) - math.log(scale) - 0.5 * _LOG_2PI - 0.5 * (x / scale) ** 2,
        -np.inf,
    )
    return out


def _gamma_logpdf(x, shape, rate):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            x > 0,
            shape * math.log(rate) - gammaln(shape) + xlogy(shape - 1.0, x) - rate * x,
            -np.inf,
        )
    return out


def _normal_logpdf(x, sd):
    return -math.log(sd) - 0.5 * _LOG_2PI - 0.5 * (x / sd) ** 2


def log_prior(params: ModelParameters, priors: PriorConfig = PriorConfig()) -> float:
    """Log density of the prior stack at ``params`` on the constrained scale.

    Out-of-support values yield -inf (never an exception), so the sampler can
    treat boundary proposals uniformly.
    """
    w = params.walk
    if w.sigma_rw <= 0 or not math.isfinite(w.sigma_rw):
        return -math.inf
    terms = (
        np.sum(_halfnormal_logpdf(params.a, priors.a_scale))
        + np.sum(_gamma_logpdf(params.gamma, priors.gamma_shape, priors.gamma_rate))
        + _normal_logpdf(w.log_b, priors.log_b_sd)
        + _normal_logpdf(w.beta, priors.beta_sd)
        + float(_halfnormal_logpdf(w.sigma_rw, priors.sigma_scale))
        + walk_logprior(w)
    )
    return float(terms)


def log_posterior(
    params: ModelParameters, data: CohortDataset, priors: PriorConfig = PriorConfig()
) -> float:
    """log_likelihood + log_prior, propagating -inf."""
    lp = log_prior(params, priors)
    if lp == -math.inf:
        return -math.inf
    return lp + log_likelihood(params, data)


# --- unconstrained coordinates -------------------------------------------------
#
# The samplers work on x = [log a_1..T, log gamma_1..T, w_1..T, log_b, beta,
# log sigma_rw].  The log transforms contribute a Jacobian term equal to the
# transformed coordinate itself.


def pack_unconstrained(params: ModelParameters) -> np.ndarray:
    w = params.walk
    return np.concatenate(
        [
            np.log(params.a),
            np.log(params.gamma),
            w.w,
            [w.log_b, w.beta, math.log(w.sigma_rw)],
        ]
    )


def unpack_unconstrained(x: np.ndarray, n_cohorts: int) -> ModelParameters:
    x = np.asarray(x, dtype=float)
    T = n_cohorts
    if x.shape != (3 * T + 3,):
        raise ValueError(f"expected {3 * T + 3} coordinates, got {x.shape}")
    walk = LatentWalk(
        log_b=float(x[3 * T]),
        beta=float(x[3 * T + 1]),
        sigma_rw=float(math.exp(x[3 * T + 2])),
        w=x[2 * T : 3 * T].copy(),
    )
    return ModelParameters(a=np.exp(x[:T]), gamma=np.exp(x[T : 2 * T]), walk=walk)


def log_posterior_unconstrained(
    x: np.ndarray, data: CohortDataset, priors: PriorConfig = PriorConfig()
) -> float:
    """Posterior density over the unconstrained coordinates (Jacobian included)."""
    T = data.n_cohorts
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        return -math.inf
    params = unpack_unconstrained(x, T)
    jacobian = float(np.sum(x[:T]) + np.sum(x[T : 2 * T]) + x[3 * T + 2])
    lp = log_posterior(params, data, priors)
    if lp == -math.inf:
        return -math.inf
    return lp + jacobian
