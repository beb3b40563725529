"""Posterior summaries: modes, HPD intervals, directional indices, MDD.

Point estimates are posterior modes from a Gaussian KDE (Silverman
bandwidth, fixed evaluation grid); intervals are shortest-window HPDs over
the sorted draws.  The drift diagnostics follow the directional convention:
P-direction is the share of mass on the median's side of zero, its two-sided
companion is p = 2*(1 - P-direction), and P-MAP is the posterior density at
zero relative to the density maximum.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .convergence import effective_sample_size, split_rhat

__all__ = [
    "KdeConfig",
    "ParameterSummary",
    "MddReport",
    "hpd_interval",
    "posterior_mode",
    "p_direction",
    "p_two_sided",
    "p_map",
    "mdd",
    "mdd_plugin_percent",
    "summarize_chains",
    "summarize_draws",
    "write_summary_csv",
    "write_summary_json",
    "SUMMARY_CSV_HEADER",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Two-sided 95% detectability multiplier and the Laplace variance factor:
# the mean of T-1 increments with variance 2*sigma^2 is detectable at
# 1.96 * sqrt(2) * sigma / sqrt(T-1).
_Z_95 = 1.96
_LAPLACE_VAR_FACTOR = math.sqrt(2.0)


@dataclass(frozen=True)
class KdeConfig:
    """Evaluation grid size and Silverman bandwidth prefactor."""

    grid_size: int = 512
    bandwidth_factor: float = 0.9


def hpd_interval(draws, mass: float = 0.95) -> tuple[float, float]:
    """Shortest contiguous interval over sorted draws holding ``mass`` of them.

    Requires at least 20 draws.  Ties between equally short windows resolve
    to the lowest starting index.
    """
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    n = x.size
    if n < 20:
        raise ValueError(f"need at least 20 draws for an HPD interval, got {n}")
    if not 0.0 < mass < 1.0:
        raise ValueError(f"mass must be in (0, 1), got {mass}")
    k = math.ceil(mass * n)
    widths = x[k - 1 :] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def _silverman_bandwidth(x: np.ndarray, factor: float) -> float:
    sd = x.std()
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread == 0.0:
        spread = sd if sd > 0 else 1.0
    return factor * spread * x.size ** (-0.2)


def _kde_grid(x: np.ndarray, cfg: KdeConfig) -> tuple[np.ndarray, np.ndarray, float]:
    """Gaussian KDE on a fixed grid spanning the draw range via linear binning."""
    lo, hi = x.min(), x.max()
    grid = np.linspace(lo, hi, cfg.grid_size)
    h = _silverman_bandwidth(x, cfg.bandwidth_factor)
    dg = grid[1] - grid[0]
    pos = (x - lo) / dg
    left = np.clip(pos.astype(int), 0, cfg.grid_size - 2)
    frac = pos - left
    counts = np.zeros(cfg.grid_size)
    np.add.at(counts, left, 1.0 - frac)
    np.add.at(counts, left + 1, frac)
    # keep the kernel shorter than the grid or "same" convolution grows
    radius = min(int(math.ceil(6.0 * h / dg)), (cfg.grid_size - 1) // 2)
    offsets = np.arange(-radius, radius + 1) * dg
    kernel = np.exp(-0.5 * (offsets / h) ** 2) / (h * _SQRT_2PI)
    density = np.convolve(counts, kernel, mode="same") / x.size
    return grid, density, h


def posterior_mode(draws, kde: KdeConfig = KdeConfig()) -> float:
    """KDE-argmax point estimate; needs >= 100 draws.

    Zero-variance input returns the common value directly.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size < 100:
        raise ValueError(f"need at least 100 draws for a mode estimate, got {x.size}")
    if np.ptp(x) == 0.0:
        return float(x[0])
    grid, density, _ = _kde_grid(x, kde)
    return float(grid[int(np.argmax(density))])


def p_direction(draws) -> float:
    """Share of draws on the posterior median's side of zero, in [0.5, 1].

    Exact zeros count toward the median's side; for a zero median they join
    the heavier nonzero side.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("p_direction of an empty sample")
    med = np.median(x)
    n_pos = int(np.sum(x > 0))
    n_neg = int(np.sum(x < 0))
    n_zero = x.size - n_pos - n_neg
    if med > 0 or (med == 0 and n_pos >= n_neg):
        favored = n_pos + n_zero
    else:
        favored = n_neg + n_zero
    return max(favored, x.size - favored) / x.size


def p_two_sided(pd: float) -> float:
    """Two-sided tail companion of P-direction: p = 2*(1 - pd)."""
    if not 0.5 <= pd <= 1.0:
        raise ValueError(f"P-direction must be in [0.5, 1], got {pd}")
    return 2.0 * (1.0 - pd)


def p_map(draws, kde: KdeConfig = KdeConfig()) -> float:
    """Posterior density at zero over the maximum density, clipped to [0, 1].

    The numerator is the exact Gaussian KDE evaluated at zero; the
    denominator is the KDE maximum on the evaluation grid (same bandwidth
    and grid as :func:`posterior_mode`).  Degenerate draws give 1 when the
    common value is zero and 0 otherwise.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size < 100:
        raise ValueError(f"need at least 100 draws for P-MAP, got {x.size}")
    if np.ptp(x) == 0.0:
        return 1.0 if x[0] == 0.0 else 0.0
    grid, density, h = _kde_grid(x, kde)
    at_zero = float(np.mean(np.exp(-0.5 * ((x / h) ** 2))) / (h * _SQRT_2PI))
    peak = float(density.max())
    if peak <= 0.0:
        return 0.0
    return float(np.clip(at_zero / peak, 0.0, 1.0))


@dataclass(frozen=True)
class ParameterSummary:
    """One row of the reported table for a scalar parameter."""

    name: str
    mode: float
    hpd_low: float
    hpd_high: float
    p_direction: float
    p_two_sided: float
    p_map: float
    rhat: float
    ess: float

    def __post_init__(self):
        if not self.hpd_low <= self.hpd_high:
            raise ValueError("hpd_low must not exceed hpd_high")


@dataclass(eq=False)
class MddReport:
    """Minimum detectable drift summarized over posterior sigma_rw draws."""

    mode_percent: float
    hpd_low_percent: float
    hpd_high_percent: float
    plugin_percent: float
    n_cohorts: int
    sigma_rw_draws: np.ndarray

    def as_dict(self) -> dict:
        return {
            "mdd_percent_mode": self.mode_percent,
            "mdd_percent_hpd_low": self.hpd_low_percent,
            "mdd_percent_hpd_high": self.hpd_high_percent,
            "mdd_percent_plugin": self.plugin_percent,
            "n_cohorts": self.n_cohorts,
        }


def mdd_beta(sigma_rw, n_cohorts: int):
    """Detectability threshold on the log scale: 1.96*sqrt(2)*sigma/sqrt(T-1)."""
    if n_cohorts < 2:
        raise ValueError("need at least 2 cohorts for a drift threshold")
    sigma_rw = np.asarray(sigma_rw, dtype=float)
    return _Z_95 * _LAPLACE_VAR_FACTOR * sigma_rw / math.sqrt(n_cohorts - 1)


def mdd_plugin_percent(sigma_rw: float, n_cohorts: int) -> float:
    """Percent cohort-to-cohort change implied by a single sigma_rw value."""
    return 100.0 * math.expm1(float(mdd_beta(sigma_rw, n_cohorts)))


def mdd(
    sigma_rw_draws,
    n_cohorts: int,
    mass: float = 0.95,
    kde: KdeConfig = KdeConfig(),
) -> MddReport:
    """Per-draw minimum detectable drift, summarized by mode and HPD.

    Also carries the plug-in value computed from the sigma_rw posterior mode,
    for comparison with the per-draw summarization.
    """
    draws = np.asarray(sigma_rw_draws, dtype=float).ravel()
    if np.any(draws <= 0):
        raise ValueError("sigma_rw draws must be positive")
    percent = 100.0 * np.expm1(mdd_beta(draws, n_cohorts))
    low, high = hpd_interval(percent, mass)
    return MddReport(
        mode_percent=posterior_mode(percent, kde),
        hpd_low_percent=low,
        hpd_high_percent=high,
        plugin_percent=mdd_plugin_percent(posterior_mode(draws, kde), n_cohorts),
        n_cohorts=n_cohorts,
        sigma_rw_draws=draws,
    )


def summarize_chains(
    name: str,
    chains: np.ndarray,
    mass: float = 0.95,
    kde: KdeConfig = KdeConfig(),
) -> ParameterSummary:
    """Full summary of one scalar parameter from its (chains, draws) array."""
    chains = np.asarray(chains, dtype=float)
    flat = chains.ravel()
    low, high = hpd_interval(flat, mass)
    pd = p_direction(flat)
    return ParameterSummary(
        name=name,
        mode=posterior_mode(flat, kde),
        hpd_low=low,
        hpd_high=high,
        p_direction=pd,
        p_two_sided=p_two_sided(pd),
        p_map=p_map(flat, kde),
        rhat=split_rhat(chains).value,
        ess=effective_sample_size(chains).value,
    )


def summarize_draws(
    draws,
    mass: float = 0.95,
    kde: KdeConfig = KdeConfig(),
    include_cohort_slopes: bool = True,
) -> list[ParameterSummary]:
    """Summaries for every stored parameter plus derived b and slopes b_t.

    ``draws`` is a PosteriorDraws; the derived baseline rate b = exp(log_b)
    leads the table, matching how results are reported.
    """
    rows = [summarize_chains("b", np.exp(draws.by_name("log_b")), mass, kde)]
    for name in ["log_b", "beta", "sigma_rw"]:
        rows.append(summarize_chains(name, draws.by_name(name), mass, kde))
    T = draws.n_cohorts
    for t in range(1, T + 1):
        rows.append(summarize_chains(f"a[{t}]", draws.by_name(f"a[{t}]"), mass, kde))
    for t in range(1, T + 1):
        rows.append(
            summarize_chains(f"gamma[{t}]", draws.by_name(f"gamma[{t}]"), mass, kde)
        )
    for t in range(1, T + 1):
        rows.append(summarize_chains(f"w[{t}]", draws.by_name(f"w[{t}]"), mass, kde))
    if include_cohort_slopes:
        slopes = draws.slope_draws().reshape(draws.n_chains, draws.n_kept, T)
        for t in range(T):
            rows.append(summarize_chains(f"b_t[{t + 1}]", slopes[:, :, t], mass, kde))
    return rows


SUMMARY_CSV_HEADER = [
    "parameter",
    "Estimate",
    "Lower C.I.",
    "Upper C.I.",
    "P-direction",
    "p",
    "P-MAP",
    "R-hat",
    "ESS",
]


def write_summary_csv(rows: list[ParameterSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.name,
                    f"{r.mode:.6g}",
                    f"{r.hpd_low:.6g}",
                    f"{r.hpd_high:.6g}",
                    f"{r.p_direction:.4f}",
                    f"{r.p_two_sided:.4f}",
                    f"{r.p_map:.4f}",
                    f"{r.rhat:.4f}",
                    f"{r.ess:.1f}",
                ]
            )


def write_summary_json(
    rows: list[ParameterSummary], path, mdd_report: MddReport | None = None
) -> None:
    payload = {
        r.name: {
            "estimate": r.mode,
            "hpd_low": r.hpd_low,
            "hpd_high": r.hpd_high,
            "p_direction": r.p_direction,
            "p": r.p_two_sided,
            "p_map": r.p_map,
            "rhat": r.rhat,
            "ess": r.ess,
        }
        for r in rows
    }
    if mdd_report is not None:
        payload["mdd"] = mdd_report.as_dict()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
