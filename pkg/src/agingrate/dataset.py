"""Cohort death/exposure grids and their normalized CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .hazards import AgeGrid

__all__ = ["CohortDataset", "write_dataset_csv", "read_dataset_csv"]

DATASET_CSV_HEADER = ["cohort", "age", "deaths", "exposure", "mask"]


@dataclass(eq=False)
class CohortDataset:
    """Rectangular deaths/exposures grid indexed by (cohort, age offset).

    ``deaths`` holds non-negative integer counts (stored as floats),
    ``exposures`` person-years, and ``mask`` marks the cells that enter the
    likelihood.  Cells with zero exposure are always masked out, and deaths
    must be zero there.
    """

    deaths: np.ndarray
    exposures: np.ndarray
    grid: AgeGrid
    cohorts: np.ndarray
    mask: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        self.deaths = np.asarray(self.deaths, dtype=float)
        self.exposures = np.asarray(self.exposures, dtype=float)
        self.cohorts = np.asarray(self.cohorts)
        if self.deaths.ndim != 2 or self.deaths.shape != self.exposures.shape:
            raise ValueError("deaths and exposures must be 2-d with equal shape")
        T, A = self.deaths.shape
        if A != self.grid.n_ages:
            raise ValueError(f"grid has {self.grid.n_ages} ages but data has {A}")
        if self.cohorts.shape != (T,):
            raise ValueError(f"need {T} cohort labels, got {self.cohorts.shape}")
        if self.mask is None:
            self.mask = np.ones((T, A), dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (T, A):
            raise ValueError("mask shape must match the data grid")
        if np.any(self.deaths < 0) or np.any(self.exposures < 0):
            raise ValueError("deaths and exposures must be >= 0")
        finite = np.isfinite(self.deaths) & np.isfinite(self.exposures)
        if not np.all(finite[self.mask]):
            raise ValueError("unmasked cells must be finite")
        if np.any(self.deaths[self.mask] != np.floor(self.deaths[self.mask])):
            raise ValueError("death counts must be integers")
        # Zero-exposure cells cannot carry deaths and never enter the likelihood.
        zero_exp = self.mask & (self.exposures == 0)
        if np.any(self.deaths[zero_exp] > 0):
            raise ValueError("deaths observed in cells with zero exposure")
        self.mask = self.mask & (self.exposures > 0)

    @property
    def n_cohorts(self) -> int:
        return self.deaths.shape[0]

    @property
    def n_ages(self) -> int:
        return self.deaths.shape[1]

    def cohort_index(self, label) -> int:
        idx = np.nonzero(self.cohorts == label)[0]
        if idx.size == 0:
            raise KeyError(f"cohort {label!r} not in dataset")
        return int(idx[0])


def write_dataset_csv(ds: CohortDataset, path) -> None:
    """Write the normalized long-form CSV (cohort, age, deaths, exposure, mask)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_CSV_HEADER)
        ages = ds.grid.ages
        for i, cohort in enumerate(ds.cohorts):
            for j in range(ds.n_ages):
                writer.writerow(
                    [
                        cohort,
                        ages[j],
                        f"{ds.deaths[i, j]:.0f}",
                        repr(float(ds.exposures[i, j])),
                        int(ds.mask[i, j]),
                    ]
                )


def read_dataset_csv(path, label: str = "") -> CohortDataset:
    """Read a normalized dataset CSV produced by :func:`write_dataset_csv`."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATASET_CSV_HEADER:
            raise ValueError(
                f"unexpected dataset header {header!r}; want {DATASET_CSV_HEADER}"
            )
        for row in reader:
            if not row:
                continue
            cohort, age, deaths, exposure, mask = row
            rows.append(
                (int(cohort), int(age), float(deaths), float(exposure), int(mask))
            )
    if not rows:
        raise ValueError(f"dataset file {path} contains no rows")

    cohorts = sorted({r[0] for r in rows})
    ages = sorted({r[1] for r in rows})
    start_age, n_ages = ages[0], len(ages)
    if ages != list(range(start_age, start_age + n_ages)):
        raise ValueError("ages must form a consecutive run of single years")
    cindex = {c: i for i, c in enumerate(cohorts)}

    T = len(cohorts)
    deaths = np.zeros((T, n_ages))
    exposures = np.zeros((T, n_ages))
    mask = np.zeros((T, n_ages), dtype=bool)
    for cohort, age, d, e, m in rows:
        i, j = cindex[cohort], age - start_age
        deaths[i, j] = d
        exposures[i, j] = e
        mask[i, j] = bool(m)

    return CohortDataset(
        deaths=deaths,
        exposures=exposures,
        grid=AgeGrid(start_age=start_age, n_ages=n_ages),
        cohorts=np.asarray(cohorts),
        mask=mask,
        label=label,
    )
