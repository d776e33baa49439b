"""Centralized configuration for experiments.

Precedence, lowest first: dataclass defaults, CALIBREC_* environment
variables (resolved at call time), a YAML config file, CLI flags.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import yaml

from .errors import ConfigError

ENV_PREFIX = "CALIBREC_"
SCORERS = ("popularity", "itemknn", "import")
ENGINE_NAMES = ("none", "greedy", "cl", "ccl")


@dataclass
class ExperimentConfig:
    # Data
    ratings_path: str = "data/ratings.csv"
    items_path: str = "data/movies.csv"
    train_fraction: float = 0.8

    # Candidates
    N: int = 100
    K: int = 20
    scorer: str = "itemknn"
    k_neighbors: int = 50
    scores_path: Optional[str] = None  # scorer == "import"

    # Engines and weighting
    engines: Tuple[str, ...] = ENGINE_NAMES
    rank_weighting: str = "uniform"  # evaluation-time q(c|u)
    recency: str = "uniform"  # profile weights for p(c|u)
    recency_half_life: float = 10.0
    greedy_weight: float = 1.0

    # lambda1: fixed value, or None to pick per engine from the grid
    lambda1: Optional[float] = None
    lambda_grid: Tuple[float, ...] = (0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0, 100000.0, 1000000.0)
    sweep_divergence: str = "js"

    # Solver budget (per user)
    max_nodes: int = 5000
    max_seconds: float = 10.0
    strict: bool = False
    workers: int = 1

    # Evaluation / output
    alpha: float = 0.05
    output_dir: str = "out"
    seed: int = 7
    progress: bool = False
    log_level: str = "INFO"
    log_json: bool = False

    def validate(self, check_paths: bool = True) -> "ExperimentConfig":
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.K < 1 or self.N < 1:
            raise ConfigError(f"N and K must be >= 1, got N={self.N}, K={self.K}")
        if self.K > self.N:
            raise ConfigError(f"K={self.K} cannot exceed N={self.N}")
        if self.scorer not in SCORERS:
            raise ConfigError(f"unknown scorer {self.scorer!r}; expected one of {SCORERS}")
        if self.k_neighbors < 1:
            raise ConfigError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if self.scorer == "import" and not self.scores_path:
            raise ConfigError("scorer 'import' needs scores_path")
        if not self.engines:
            raise ConfigError("no engines requested")
        for e in self.engines:
            if e not in ENGINE_NAMES:
                raise ConfigError(f"unknown engine {e!r}; expected one of {ENGINE_NAMES}")
        if self.rank_weighting not in ("uniform", "logarithmic"):
            raise ConfigError(f"unknown rank weighting {self.rank_weighting!r}")
        if self.recency not in ("uniform", "exponential"):
            raise ConfigError(f"unknown recency scheme {self.recency!r}")
        if not self.recency_half_life > 0:
            raise ConfigError(f"recency_half_life must be positive, got {self.recency_half_life}")
        if not 0.0 <= self.greedy_weight <= 1.0:
            raise ConfigError(f"greedy_weight must be in [0, 1], got {self.greedy_weight}")
        if self.lambda1 is not None and self.lambda1 < 0:
            raise ConfigError(f"lambda1 must be non-negative, got {self.lambda1}")
        if not self.lambda_grid or any(x < 0 for x in self.lambda_grid):
            raise ConfigError(f"lambda_grid must be non-empty and non-negative, got {list(self.lambda_grid)}")
        if self.sweep_divergence not in ("js", "hellinger"):
            raise ConfigError(f"sweep_divergence must be 'js' or 'hellinger', got {self.sweep_divergence!r}")
        if self.max_nodes < 1 or not self.max_seconds > 0:
            raise ConfigError("solver budget must be positive")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if check_paths:
            paths = [self.ratings_path, self.items_path]
            if self.scorer == "import":
                paths.append(self.scores_path)
            for p in paths:
                if not Path(p).exists():
                    raise ConfigError(f"path does not exist: {p}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["engines"] = list(self.engines)
        d["lambda_grid"] = list(self.lambda_grid)
        return d


def _to_bool(v: Any) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _to_tuple(cast: Callable[[Any], Any]) -> Callable[[Any], tuple]:
    def conv(v: Any) -> tuple:
        if isinstance(v, str):
            v = [x for x in (s.strip() for s in v.split(",")) if x]
        return tuple(cast(x) for x in v)
    return conv


def _optional(cast: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def conv(v: Any) -> Any:
        if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none", "null")):
            return None
        return cast(v)
    return conv


_COERCE: Dict[str, Callable[[Any], Any]] = {
    "train_fraction": float,
    "N": int,
    "K": int,
    "k_neighbors": int,
    "scores_path": _optional(str),
    "engines": _to_tuple(str),
    "recency_half_life": float,
    "greedy_weight": float,
    "lambda1": _optional(float),
    "lambda_grid": _to_tuple(float),
    "max_nodes": int,
    "max_seconds": float,
    "strict": _to_bool,
    "workers": int,
    "alpha": float,
    "seed": int,
    "progress": _to_bool,
    "log_json": _to_bool,
}


def _coerce(name: str, value: Any, source: str) -> Any:
    try:
        return _COERCE.get(name, str)(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{source}: invalid value for {name}: {value!r} ({e})")


def _from_env() -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for f in fields(ExperimentConfig):
        raw = os.getenv(ENV_PREFIX + f.name.upper())
        if raw is not None:
            out[f.name] = _coerce(f.name, raw, f"${ENV_PREFIX}{f.name.upper()}")
    return out


def _from_yaml(path: str | Path) -> Dict[str, Any]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text()) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"{p}: invalid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: expected a mapping at top level")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{p}: unknown keys {unknown}")
    return {k: _coerce(k, v, str(p)) for k, v in data.items()}


def load_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Resolve environment variables at call time, then file, then overrides.

    Overrides with value None are ignored so unset CLI flags fall through.
    """
    merged: Dict[str, Any] = {}
    merged.update(_from_env())
    if path:
        merged.update(_from_yaml(path))
    known = {f.name for f in fields(ExperimentConfig)}
    for k, v in (overrides or {}).items():
        if k not in known:
            raise ConfigError(f"unknown option {k!r}")
        if v is not None:
            merged[k] = _coerce(k, v, "flag")
    return replace(ExperimentConfig(), **merged)


def dump_config(config: ExperimentConfig, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(yaml.safe_dump(config.to_dict(), sort_keys=True))
    return p
