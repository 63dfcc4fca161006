"""Scenario configuration: one params dataclass per scenario plus a TOML loader.

Config file layout::

    scenario = "gap_scaling"
    seed = 20240601
    output_dir = "results"
    workers = 1

    [params]
    ratios = [0.5, 0.6, 0.7]
    a1_sq = 0.5

Keys under ``[params]`` are exactly the field names of the scenario's params
dataclass; unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from ..errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_SEED = 20240601


def _grid(a, b, n):
    return [float(x) for x in np.linspace(a, b, n)]


def _loggrid(a, b, n):
    return [float(x) for x in np.logspace(a, b, n)]


@dataclass
class GapScalingParams:
    ratios: list = field(default_factory=lambda: _grid(0.5, 0.98, 13))
    dim: int = 16
    tail_decay: float = 1.0
    a1_sq: float = 0.5
    epsilon: float = 1e-4
    max_rounds: int = 14
    conjugate: bool = False


@dataclass
class InstabilityParams:
    eigenvalues: list = field(default_factory=lambda: [1.0, 0.999, 0.1])
    strengths: list = field(default_factory=lambda: [0.0, 1e-4, 1e-3, 1e-2])
    trials: int = 50
    k: int = 2
    conjugate: bool = True
    # optional real data: standardized covariance replaces the synthetic one
    dataset: str = ""
    label_column: str = ""


@dataclass
class MagnitudeParams:
    eigenvalues: list = field(default_factory=lambda: [0.5, 0.25])
    alphas: list = field(default_factory=lambda: _loggrid(-6, 0, 61))
    phase_bits: int = 8
    evolution_time: float = 2 * math.pi
    rounds: int = 7
    epsilon: float = 1e-4


@dataclass
class GapMapParams:
    gaps: list = field(default_factory=lambda: _loggrid(math.log10(0.5), -4, 25))
    top: float = 0.5
    dim: int = 16
    tail_decay: float = 1.0
    a1_sq: float = 0.5
    budget: int = 127
    phase_bits: int = 8
    evolution_time: float = 2 * math.pi


@dataclass
class WarmStartParams:
    ratio: float = 0.98
    dim: int = 16
    tail_decay: float = 1.0
    overlaps: list = field(default_factory=lambda: [0.0, 0.01, 0.1, 0.5, 0.9])
    rounds: int = 11
    epsilon: float = 1e-4


@dataclass
class DegeneracyLiftingParams:
    eigenvalues: list = field(default_factory=lambda: [1.0, 1.0, 0.2])
    degeneracy: int = 2
    deltas: list = field(default_factory=lambda: [0.0, 1e-3, 1e-2, 1e-1])
    # "axis": first basis vector of the degenerate block; "random": seeded unit vector inside it
    direction: str = "axis"
    rounds: int = 12


@dataclass
class DownstreamParams:
    dataset: str = ""
    label_column: str = "label"
    standardize: bool = False
    k: int = 2
    alphas: list = field(default_factory=lambda: [1.0, 1e-3, 1e-6])
    rounds: int = 12
    test_fraction: float = 0.3
    n_classes: int = 3
    n_per_class: int = 60
    dim: int = 8
    separation: float = 8.0


PARAMS = {
    "gap_scaling": GapScalingParams,
    "instability": InstabilityParams,
    "magnitude": MagnitudeParams,
    "gap_map": GapMapParams,
    "warm_start": WarmStartParams,
    "degeneracy_lifting": DegeneracyLiftingParams,
    "downstream": DownstreamParams,
}
SCENARIOS = tuple(PARAMS)


def _check_grid(name: str, values) -> None:
    for v in values:
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"grid {name!r} must hold positive finite numbers, got {v!r}")


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = DEFAULT_SEED
    output_dir: str = "results"
    workers: int = 1
    params: Any = None

    def __post_init__(self):
        if self.scenario not in PARAMS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; valid: {', '.join(SCENARIOS)}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit non-negative integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        cls = PARAMS[self.scenario]
        if self.params is None:
            self.params = cls()
        elif isinstance(self.params, dict):
            known = {f.name for f in dataclasses.fields(cls)}
            unknown = sorted(set(self.params) - known)
            if unknown:
                raise ConfigError(f"unknown params for {self.scenario}: {unknown}; valid: {sorted(known)}")
            self.params = cls(**self.params)
        elif not isinstance(self.params, cls):
            raise ConfigError(f"params must be {cls.__name__}")
        self._validate()

    def _validate(self):
        p = self.params
        grids = {
            "gap_scaling": ["ratios"],
            "instability": ["eigenvalues", "strengths"],
            "magnitude": ["eigenvalues", "alphas"],
            "gap_map": ["gaps"],
            "warm_start": ["overlaps"],
            "degeneracy_lifting": ["eigenvalues", "deltas"],
            "downstream": ["alphas"],
        }[self.scenario]
        for name in grids:
            values = getattr(p, name)
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ConfigError(f"{name!r} must be a non-empty list")
            # zero is a meaningful grid point for these
            if name in ("strengths", "deltas", "overlaps", "eigenvalues"):
                if any(not math.isfinite(v) or v < 0 for v in values):
                    raise ConfigError(f"grid {name!r} must hold non-negative finite numbers")
            else:
                _check_grid(name, values)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "params": dataclasses.asdict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {"scenario", "seed", "output_dir", "workers", "params"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}; valid: {sorted(known)}")
        if "scenario" not in d:
            raise ConfigError("config is missing the 'scenario' key")
        return cls(**d)


def load_config(path: Union[str, Path], scenario: Optional[str] = None) -> ScenarioConfig:
    """Read a TOML config. ``scenario`` fills in or must match the file's key."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        d = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    if scenario is not None:
        if d.setdefault("scenario", scenario) != scenario:
            raise ConfigError(f"{path} configures scenario {d['scenario']!r}, not {scenario!r}")
    try:
        return ScenarioConfig.from_dict(d)
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from None
