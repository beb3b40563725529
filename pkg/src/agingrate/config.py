"""Run configuration: one JSON document driving the CLI.

Every constant the source material leaves ambiguous (prior
parameterizations, KDE bandwidth and grid, QQ replicate count) lives here
with documented defaults, so alternate readings are a config edit rather
than a code change.  Exactly one of ``data`` (real files) or ``scenario``
(synthetic truth) must be present.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .exceptions import ConfigError
from .hmd import STANDARD_RULES, SelectionRule
from .posterior import PriorConfig
from .sampler import SamplerConfig
from .simulate import TruthScenario
from .summaries import KdeConfig

__all__ = ["DataConfig", "QqConfig", "FitConfig", "load_config", "config_from_dict"]


@dataclass(frozen=True)
class DataConfig:
    """Input data: either HMD deaths/exposures files or a normalized CSV."""

    deaths: str | None = None
    exposures: str | None = None
    sex: str = "female"
    start_age: int = 80
    min_age_groups: int | None = None
    dataset: str | None = None

    def __post_init__(self):
        hmd_pair = self.deaths is not None or self.exposures is not None
        if self.dataset is not None and hmd_pair:
            raise ValueError("give either dataset or deaths/exposures, not both")
        if self.dataset is None:
            if self.deaths is None or self.exposures is None:
                raise ValueError("need both deaths and exposures paths (or dataset)")
            if self.sex not in ("male", "female"):
                raise ValueError(f"sex must be 'male' or 'female', got {self.sex!r}")

    def selection_rule(self) -> SelectionRule:
        if self.min_age_groups is None:
            return SelectionRule.for_start_age(self.start_age)
        standard = STANDARD_RULES.get(self.start_age) == self.min_age_groups
        return SelectionRule(
            start_age=self.start_age,
            min_age_groups=self.min_age_groups,
            allow_nonstandard=not standard,
        )


@dataclass(frozen=True)
class QqConfig:
    """Posterior predictive QQ settings."""

    n_rep: int = 500
    seed: int = 0
    statistic: str = "mean"
    envelope_mass: float = 0.99

    def __post_init__(self):
        if self.statistic not in ("mean", "median"):
            raise ValueError("statistic must be 'mean' or 'median'")
        if self.n_rep < 100:
            raise ValueError("n_rep must be >= 100")


@dataclass(frozen=True)
class FitConfig:
    """Everything one run needs; built by :func:`load_config`."""

    out: str = "out"
    data: DataConfig | None = None
    scenario: TruthScenario | None = None
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    priors: PriorConfig = field(default_factory=PriorConfig)
    kde: KdeConfig = field(default_factory=KdeConfig)
    qq: QqConfig = field(default_factory=QqConfig)

    def __post_init__(self):
        if (self.data is None) == (self.scenario is None):
            raise ValueError("exactly one of 'data' and 'scenario' must be present")


_SECTIONS = {
    "data": DataConfig,
    "scenario": TruthScenario,
    "sampler": SamplerConfig,
    "priors": PriorConfig,
    "kde": KdeConfig,
    "qq": QqConfig,
}


def _build_section(cls, payload: dict, path: str):
    if not isinstance(payload, dict):
        raise ConfigError(path, f"expected an object, got {type(payload).__name__}")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in payload:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")
    try:
        return cls(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def config_from_dict(raw: dict, base_dir: str = ".") -> FitConfig:
    """Validate a parsed JSON document; errors carry the offending field path.

    Relative data paths are resolved against ``base_dir`` (normally the
    config file's directory).
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = set(_SECTIONS) | {"out"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown section")

    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in raw:
            kwargs[name] = _build_section(cls, raw[name], name)
    out = raw.get("out", "out")
    if not isinstance(out, str) or not out:
        raise ConfigError("out", "must be a non-empty path string")

    try:
        cfg = FitConfig(out=out, **kwargs)
    except ValueError as exc:
        raise ConfigError("<root>", str(exc)) from exc

    if cfg.data is not None:
        resolved = {}
        for attr in ("deaths", "exposures", "dataset"):
            p = getattr(cfg.data, attr)
            if p is None:
                continue
            full = p if os.path.isabs(p) else os.path.join(base_dir, p)
            if not os.path.exists(full):
                raise ConfigError(f"data.{attr}", f"file not found: {full}")
            resolved[attr] = full
        cfg = dataclasses.replace(
            cfg, data=dataclasses.replace(cfg.data, **resolved)
        )
    return cfg


def load_config(path) -> FitConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<config>", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON: {exc}") from exc
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))
