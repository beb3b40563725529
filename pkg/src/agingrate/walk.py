"""Latent random walk with drift on the log Gompertz slope.

The per-cohort slope is ``log b_t = log b + X_t`` with
``X_t = X_{t-1} + beta + w_t``, anchored at ``X_0 = 0`` for the cohort just
before the first observed one.  The sampler's free variables are the
increments ``w_t`` (non-centered form), which are iid Laplace(0, sigma_rw)
a priori; states are reconstructed by cumulative summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["LatentWalk", "SlopeSeries", "reconstruct", "laplace_logpdf", "walk_logprior"]


@dataclass(frozen=True, eq=False)
class LatentWalk:
    """Baseline log slope, drift, innovation scale and per-cohort innovations."""

    log_b: float
    beta: float
    sigma_rw: float
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.w.ndim != 1:
            raise ValueError("w must be a 1-d vector of innovations")
        for name in ("log_b", "beta", "sigma_rw"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not np.all(np.isfinite(self.w)):
            raise ValueError("w must be finite")
        if self.sigma_rw <= 0:
            raise ValueError(f"sigma_rw must be > 0, got {self.sigma_rw}")

    @property
    def n_cohorts(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True, eq=False)
class SlopeSeries:
    """Reconstructed per-cohort slopes b_t and accumulated period effects X_t."""

    b_t: np.ndarray
    x_t: np.ndarray
    cohorts: np.ndarray


def reconstruct(lw: LatentWalk, cohorts) -> SlopeSeries:
    """Deterministic cumulative-sum reconstruction of the slope series.

    With the anchor X_0 = 0, cohort t has X_t = sum_{s<=t} (beta + w_s) and
    b_t = exp(log_b + X_t).
    """
    cohorts = np.asarray(cohorts)
    if cohorts.shape[0] != lw.n_cohorts:
        raise ValueError(
            f"{cohorts.shape[0]} cohort labels for {lw.n_cohorts} innovations"
        )
    x_t = np.cumsum(lw.beta + lw.w)
    return SlopeSeries(b_t=np.exp(lw.log_b + x_t), x_t=x_t, cohorts=cohorts)


def laplace_logpdf(x, mu, scale):
    """Log density of Laplace(mu, scale): -log(2*scale) - |x - mu|/scale."""
    if scale <= 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    x = np.asarray(x, dtype=float)
    out = -np.log(2.0 * scale) - np.abs(x - mu) / scale
    return float(out) if out.ndim == 0 else out


def walk_logprior(lw: LatentWalk) -> float:
    """Joint log density of the innovations given beta and sigma_rw.

    Because X_t - (X_{t-1} + beta) = w_t, summing iid Laplace(0, sigma_rw)
    terms over the increments equals the product of the per-step conditional
    densities of X_t given X_{t-1}.
    """
    return float(np.sum(laplace_logpdf(lw.w, 0.0, lw.sigma_rw)))
