"""Posterior predictive QQ comparison of observed and replicated deaths.

For a subsample of posterior draws, death counts are re-simulated from
Poisson(lambda * E) over the unmasked cells; the sorted observed counts are
compared with the replicate average of the sorted simulated counts at
plotting positions (k - 0.5)/n.  A per-quantile Monte-Carlo envelope from
the replicate spread quantifies how far from the identity line the points
may wander by chance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import CohortDataset
from .hazards import cohort_hazard_grid

__all__ = ["QqSeries", "posterior_predictive_qq", "write_qq_csv"]


@dataclass(eq=False)
class QqSeries:
    """Aligned observed/predicted quantiles with a Monte-Carlo envelope."""

    levels: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray
    envelope_low: np.ndarray
    envelope_high: np.ndarray
    label: str = ""

    def __post_init__(self):
        n = self.levels.shape[0]
        for name in ("observed", "predicted", "envelope_low", "envelope_high"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must match the levels length")
        if np.any(np.diff(self.levels) <= 0) or self.levels[0] <= 0 or self.levels[-1] >= 1:
            raise ValueError("levels must be strictly increasing within (0, 1)")

    def coverage(self) -> float:
        """Fraction of quantile levels whose observed value sits inside the envelope."""
        inside = (self.observed >= self.envelope_low) & (
            self.observed <= self.envelope_high
        )
        return float(inside.mean())


def posterior_predictive_qq(
    draws,
    data: CohortDataset,
    n_rep: int = 500,
    seed: int = 0,
    statistic: str = "mean",
    envelope_mass: float = 0.99,
) -> QqSeries:
    """Compare observed death-count quantiles with posterior replicates.

    ``n_rep`` posterior draws are subsampled (without replacement when
    possible); each simulates one full replicated dataset.  ``statistic``
    picks the predictive curve: the mean (default) or median of the sorted
    replicates at each position.
    """
    if n_rep < 100:
        raise ValueError(f"need n_rep >= 100 replicates, got {n_rep}")
    if statistic not in ("mean", "median"):
        raise ValueError(f"statistic must be 'mean' or 'median', got {statistic!r}")
    cells = np.nonzero(data.mask)
    n_cells = cells[0].size
    if n_cells == 0:
        raise ValueError("dataset has no unmasked cells")

    T = draws.n_cohorts
    flat = draws.draws.reshape(-1, draws.draws.shape[2])
    rng = np.random.default_rng(seed)
    total = flat.shape[0]
    replace = total < n_rep
    picks = rng.choice(total, size=n_rep, replace=replace)

    exposures = data.exposures[cells]
    xmid = data.grid.midpoints
    slopes = draws.slope_draws()

    sorted_reps = np.empty((n_rep, n_cells))
    for i, k in enumerate(picks):
        lam = cohort_hazard_grid(flat[k, :T], slopes[k], flat[k, T : 2 * T], xmid)
        counts = rng.poisson(lam[cells] * exposures)
        sorted_reps[i] = np.sort(counts)

    if statistic == "mean":
        predicted = sorted_reps.mean(axis=0)
    else:
        predicted = np.median(sorted_reps, axis=0)
    tail = (1.0 - envelope_mass) / 2.0
    env_low, env_high = np.quantile(sorted_reps, [tail, 1.0 - tail], axis=0)

    levels = (np.arange(1, n_cells + 1) - 0.5) / n_cells
    return QqSeries(
        levels=levels,
        observed=np.sort(data.deaths[cells]),
        predicted=predicted,
        envelope_low=env_low,
        envelope_high=env_high,
        label=data.label,
    )


def write_qq_csv(qq: QqSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "observed", "predicted", "envelope_low", "envelope_high"])
        for row in zip(qq.levels, qq.observed, qq.predicted, qq.envelope_low, qq.envelope_high):
            writer.writerow([f"{v:.10g}" for v in row])
