"""Gamma-Gompertz hazards: individual and cohort-level forces of mortality.

Individuals carry a gamma-distributed frailty multiplier (mean 1, variance
``gamma``) on a Gompertz baseline ``a * exp(b*x)``.  Marginalizing the frailty
gives the cohort-level hazard, which decelerates toward the plateau ``b/gamma``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "STANDARD_START_AGES",
    "AgeGrid",
    "GompertzCohortParams",
    "individual_hazard",
    "cohort_hazard",
    "cohort_hazard_grid",
    "expected_deaths",
]

STANDARD_START_AGES = (50, 60, 70, 80)

# Beyond this exponent the numerator/denominator of the cohort hazard are
# evaluated with exp(b*x) factored out, so the plateau is reached without
# overflowing.
_BX_STABLE = 30.0


@dataclass(frozen=True)
class GompertzCohortParams:
    """One cohort's gamma-Gompertz parameters.

    a      baseline hazard at age offset 0 (per person-year), > 0
    b      Gompertz slope (per year of age), > 0
    gamma  frailty variance, >= 0 (0 recovers the plain Gompertz hazard)
    """

    a: float
    b: float
    gamma: float

    def __post_init__(self):
        for name in ("a", "b", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.a <= 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if self.b <= 0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class AgeGrid:
    """Consecutive one-year age groups starting at ``start_age``.

    Ages are handled as offsets x = 0 .. n_ages-1 from the starting age, so
    the baseline parameter of each cohort refers to the starting age itself.
    """

    start_age: int
    n_ages: int

    def __post_init__(self):
        if self.n_ages < 1:
            raise ValueError(f"n_ages must be >= 1, got {self.n_ages}")
        if self.start_age not in STANDARD_START_AGES:
            warnings.warn(
                f"start_age {self.start_age} is outside the standard set "
                f"{STANDARD_START_AGES}",
                stacklevel=2,
            )

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.n_ages, dtype=float)

    @property
    def midpoints(self) -> np.ndarray:
        """Midpoint offsets of the one-year intervals, x + 0.5."""
        return self.offsets + 0.5

    @property
    def ages(self) -> np.ndarray:
        return self.start_age + np.arange(self.n_ages)


def individual_hazard(z: float, p: GompertzCohortParams, x) :
    """Force of mortality ``z * a * exp(b*x)`` for frailty ``z`` at offset ``x``.

    ``x`` may be a scalar or an array of non-negative age offsets.
    """
    if not np.isfinite(z) or z < 0:
        raise ValueError(f"frailty z must be finite and >= 0, got {z!r}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("age offsets must be finite and >= 0")
    out = z * p.a * np.exp(p.b * x)
    return float(out) if out.ndim == 0 else out


def cohort_hazard(p: GompertzCohortParams, x):
    """Marginal cohort hazard ``a*exp(b*x) / (1 + gamma*(a/b)*(exp(b*x)-1))``.

    Equals the plain Gompertz hazard when ``gamma == 0`` and approaches the
    plateau ``b/gamma`` as ``x`` grows.  For ``b*x`` beyond ``_BX_STABLE`` the
    algebraically equivalent form ``a / (exp(-b*x) + gamma*(a/b)*(1-exp(-b*x)))``
    is used so large exponents never overflow.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("age offsets must be finite and >= 0")
    out = _hazard_core(p.a, p.b, p.gamma, x)
    return float(out) if out.ndim == 0 else out


def _hazard_core(a, b, gamma, x):
    """Vectorized gamma-Gompertz hazard; ``a, b, gamma, x`` must broadcast."""
    a, b, gamma, x = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (a, b, gamma, x))
    )
    bx = b * x
    gab = gamma * a / b
    out = np.empty(bx.shape)

    small = bx <= _BX_STABLE
    ebx = np.exp(bx[small])
    out[small] = a[small] * ebx / (1.0 + gab[small] * (ebx - 1.0))

    large = ~small
    if np.any(large):
        embx = np.exp(-bx[large])
        out[large] = a[large] / (embx + gab[large] * (1.0 - embx))
    return out


def cohort_hazard_grid(a, b, gamma, x_mid) -> np.ndarray:
    """Hazard matrix for per-cohort parameter vectors over shared midpoints.

    ``a``, ``b``, ``gamma`` have one entry per cohort; the result has shape
    (n_cohorts, len(x_mid)).
    """
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    gamma = np.asarray(gamma, dtype=float)[:, None]
    return _hazard_core(a, b, gamma, np.asarray(x_mid, dtype=float)[None, :])


def expected_deaths(p: GompertzCohortParams, grid: AgeGrid, exposures) -> np.ndarray:
    """Per-age expected Poisson death counts, hazard at interval midpoints.

    The one-year interval [x, x+1) is represented by the hazard at x + 0.5,
    multiplied by the person-years of exposure in that interval.
    """
    exposures = np.asarray(exposures, dtype=float)
    if exposures.shape != (grid.n_ages,):
        raise ValueError(
            f"exposures must have length {grid.n_ages}, got shape {exposures.shape}"
        )
    if np.any(exposures < 0):
        raise ValueError("exposures must be >= 0")
    return cohort_hazard(p, grid.midpoints) * exposures
