"""Human Mortality Database cohort file parsing and cohort selection.

Reads the standard HMD cohort text layout (two description lines, one
column-header line, then whitespace-delimited Year/Age/Female/Male/Total
rows) for both Deaths and Exposures, and assembles the masked dataset for
one sex under an age-coverage selection rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import CohortDataset
from .exceptions import HmdParseError, SelectionError
from .hazards import AgeGrid

__all__ = [
    "HmdRecord",
    "HmdTable",
    "SelectionRule",
    "parse_hmd",
    "load_hmd",
    "serialize_hmd",
    "build_dataset",
]

logger = logging.getLogger(__name__)

OPEN_AGE = 110
MAX_SINGLE_AGE = 109

# Sanctioned (start_age, minimum observed age groups) pairs.
STANDARD_RULES = {80: 20, 70: 30, 60: 40, 50: 50}

_COLUMNS = ("Year", "Age", "Female", "Male", "Total")


@dataclass(frozen=True)
class HmdRecord:
    """One parsed row; missing cells (".") are None."""

    year: int
    age: int
    open_age: bool
    female: float | None
    male: float | None
    total: float | None


@dataclass(eq=False)
class HmdTable:
    """Parsed records plus provenance."""

    records: list[HmdRecord]
    path: str = "<string>"
    title: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def value(self, record: HmdRecord, sex: str) -> float | None:
        return getattr(record, sex)


def _parse_value(token: str, line_number: int):
    if token == ".":
        return None
    try:
        return float(token)
    except ValueError:
        raise HmdParseError(f"non-numeric value {token!r}", line_number) from None


def _parse_age(token: str, line_number: int) -> tuple[int, bool]:
    if token == f"{OPEN_AGE}+":
        return OPEN_AGE, True
    try:
        age = int(token)
    except ValueError:
        raise HmdParseError(f"unparseable age label {token!r}", line_number) from None
    if not 0 <= age <= MAX_SINGLE_AGE:
        raise HmdParseError(
            f"age {age} outside 0-{MAX_SINGLE_AGE} (open interval must be '{OPEN_AGE}+')",
            line_number,
        )
    return age, False


def parse_hmd(text: str, path: str = "<string>") -> HmdTable:
    """Parse HMD cohort-format text into records.

    The first two lines are free-form description (the second is usually
    blank), the third names the columns, and every following non-empty line
    carries exactly five whitespace-delimited fields.
    """
    lines = text.splitlines()
    if len(lines) < 3:
        raise HmdParseError("file too short for the HMD header (need 3 header lines)")
    header_tokens = lines[2].split()
    if tuple(header_tokens) != _COLUMNS:
        raise HmdParseError(
            f"unexpected column header {header_tokens!r}; want {list(_COLUMNS)}",
            line_number=3,
        )
    records = []
    for line_number, line in enumerate(lines[3:], start=4):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise HmdParseError(
                f"expected 5 columns, found {len(tokens)}", line_number
            )
        try:
            year = int(tokens[0])
        except ValueError:
            raise HmdParseError(f"unparseable year {tokens[0]!r}", line_number) from None
        age, open_age = _parse_age(tokens[1], line_number)
        female, male, total = (_parse_value(v, line_number) for v in tokens[2:5])
        records.append(HmdRecord(year, age, open_age, female, male, total))
    return HmdTable(records=records, path=path, title=lines[0].strip())


def load_hmd(path) -> HmdTable:
    with open(path) as fh:
        return parse_hmd(fh.read(), path=str(path))


def _format_value(v: float | None) -> str:
    return "." if v is None else f"{v:.2f}"


def serialize_hmd(table: HmdTable) -> str:
    """Write records back in the HMD text layout; parse(serialize(t)) == t."""
    lines = [table.title, ""]
    lines.append("  Year          Age             Female            Male           Total")
    for r in table.records:
        age = f"{OPEN_AGE}+" if r.open_age else str(r.age)
        lines.append(
            f"  {r.year}    {age:>6s}    {_format_value(r.female):>12s}"
            f"    {_format_value(r.male):>12s}    {_format_value(r.total):>12s}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SelectionRule:
    """Cohorts must have at least ``min_age_groups`` observed single ages
    at or above ``start_age``."""

    start_age: int = 80
    min_age_groups: int = 20
    allow_nonstandard: bool = False

    def __post_init__(self):
        if self.min_age_groups < 1:
            raise ValueError("min_age_groups must be >= 1")
        if not self.allow_nonstandard:
            expected = STANDARD_RULES.get(self.start_age)
            if expected is None or expected != self.min_age_groups:
                raise ValueError(
                    f"({self.start_age}, {self.min_age_groups}) is not one of the "
                    f"sanctioned (start_age, min_age_groups) pairs "
                    f"{sorted(STANDARD_RULES.items())}; "
                    "pass allow_nonstandard=True to override"
                )

    @classmethod
    def for_start_age(cls, start_age: int) -> "SelectionRule":
        if start_age not in STANDARD_RULES:
            raise ValueError(f"no standard rule for start_age {start_age}")
        return cls(start_age=start_age, min_age_groups=STANDARD_RULES[start_age])


def _grid_values(table: HmdTable, sex: str, years: list[int], start_age: int):
    """(value, present) arrays over the (cohort, single-age) grid."""
    n_ages = OPEN_AGE - start_age  # single years start_age..109
    year_index = {y: i for i, y in enumerate(years)}
    values = np.zeros((len(years), n_ages))
    present = np.zeros((len(years), n_ages), dtype=bool)
    for r in table.records:
        if r.open_age or r.age < start_age or r.year not in year_index:
            continue
        v = table.value(r, sex)
        if v is None:
            continue
        i, j = year_index[r.year], r.age - start_age
        values[i, j] = v
        present[i, j] = True
    return values, present


def build_dataset(
    deaths: HmdTable,
    exposures: HmdTable,
    sex: str,
    rule: SelectionRule = SelectionRule(),
) -> CohortDataset:
    """Select cohorts with enough observed age coverage and build the grid.

    A cell counts as observed when both the death count and a positive
    exposure are present; the open age interval 110+ is excluded (the
    likelihood is defined on single-year hazards).  Cohorts failing the rule
    inside the retained span are kept as fully masked rows so the walk keeps
    one step per birth year.  Fractional HMD death counts are rounded to the
    nearest integer for the Poisson likelihood.
    """
    if sex not in ("male", "female"):
        raise ValueError(f"sex must be 'male' or 'female', got {sex!r}")
    years = sorted(
        {r.year for r in deaths.records} | {r.year for r in exposures.records}
    )
    if not years:
        raise SelectionError("no cohort years present in the input tables")
    d_vals, d_present = _grid_values(deaths, sex, years, rule.start_age)
    e_vals, e_present = _grid_values(exposures, sex, years, rule.start_age)

    mask = d_present & e_present & (e_vals > 0)
    coverage = mask.sum(axis=1)
    passing = np.nonzero(coverage >= rule.min_age_groups)[0]
    if passing.size == 0:
        raise SelectionError(
            f"no cohort has {rule.min_age_groups} observed age groups at ages "
            f">= {rule.start_age} (best coverage: {int(coverage.max())})"
        )
    first, last = int(passing[0]), int(passing[-1])
    gaps = [years[i] for i in range(first, last + 1) if coverage[i] < rule.min_age_groups]
    if gaps:
        logger.warning(
            "%d cohorts inside the retained span fail the coverage rule and are "
            "kept fully masked: %s",
            len(gaps),
            gaps,
        )

    sel = slice(first, last + 1)
    mask = mask[sel]
    mask[coverage[sel] < rule.min_age_groups] = False
    rounded = np.rint(d_vals[sel])
    delta = float(np.abs(rounded - d_vals[sel])[mask].sum())
    if delta > 0:
        logger.info(
            "rounded fractional death counts to integers; total absolute delta %.2f "
            "over %d cells",
            delta,
            int(mask.sum()),
        )
    deaths_grid = np.where(mask, rounded, 0.0)
    exposures_grid = np.where(mask, e_vals[sel], 0.0)

    return CohortDataset(
        deaths=deaths_grid,
        exposures=exposures_grid,
        grid=AgeGrid(start_age=rule.start_age, n_ages=OPEN_AGE - rule.start_age),
        cohorts=np.asarray(years[first : last + 1]),
        mask=mask,
        label=f"{deaths.title} [{sex}]" if deaths.title else sex,
    )
