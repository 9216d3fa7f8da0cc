from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .errors import ConfigError


DEFAULT_CONFIG_PATH = Path("~/.config/lrdpp/config.yaml").expanduser()

# Epochs of near-constant learning rate before annealing halves it.
ANNEAL_EPOCHS = 10


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for stochastic ascent on the low-rank DPP likelihood."""

    k: int = 30
    alpha: float = 1.0
    epsilon0: float = 1.0e-5
    beta: float = 0.95
    batch_size: int = 1000
    t_anneal: Optional[float] = None  # resolved from the dataset size when unset
    delta: float = 1.0e-5
    max_iters: int = 10000
    seed: int = 0
    init_scale: float = 0.1
    workers: int = 1

    def validate(self) -> "TrainConfig":
        """Check the invariants and return self so calls can be chained."""
        problems = []
        if self.k < 1:
            problems.append(f"k must be >= 1 (got {self.k})")
        if not self.epsilon0 > 0:
            problems.append(f"epsilon0 must be > 0 (got {self.epsilon0})")
        if not 0.0 <= self.beta <= 1.0:
            problems.append(f"beta must lie in [0, 1] (got {self.beta})")
        if not self.delta > 0:
            problems.append(f"delta must be > 0 (got {self.delta})")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1 (got {self.batch_size})")
        if self.alpha < 0:
            problems.append(f"alpha must be >= 0 (got {self.alpha})")
        if self.max_iters < 1:
            problems.append(f"max_iters must be >= 1 (got {self.max_iters})")
        if not self.init_scale > 0:
            problems.append(f"init_scale must be > 0 (got {self.init_scale})")
        if self.t_anneal is not None and not self.t_anneal > 0:
            problems.append(f"t_anneal must be > 0 (got {self.t_anneal})")
        if self.workers < 1:
            problems.append(f"workers must be >= 1 (got {self.workers})")
        if problems:
            raise ConfigError("Invalid training configuration: " + "; ".join(problems))
        return self

    def resolve(self, n_baskets: int) -> "TrainConfig":
        """Fill the annealing horizon from the number of training baskets."""
        if self.t_anneal is not None:
            return self
        epochs = max(1, math.ceil(n_baskets / self.batch_size))
        return replace(self, t_anneal=float(epochs * ANNEAL_EPOCHS))

    def resolved(self) -> Dict[str, Any]:
        """Return every field as a plain mapping, suitable for printing."""
        return asdict(self)


PathLikeOrStr = Union[os.PathLike, str]

_FIELD_TYPES = {f.name: f.type for f in fields(TrainConfig)}
_CASTS = {"k": int, "batch_size": int, "max_iters": int, "seed": int, "workers": int}

ENV_PREFIX = "LRDPP_"


def _cast(key: str, value: Any) -> Any:
    caster = _CASTS.get(key, float)
    if caster is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"Invalid value for {key}: {value!r} is not a whole number")
    try:
        return caster(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid value for {key}: {value!r}") from exc


def load_config(config_path: Optional[PathLikeOrStr] = None) -> Dict[str, Any]:
    """
    Load training defaults from disk and merge environment overrides.

    When no path is given we read ~/.config/lrdpp/config.yaml if it exists;
    without it the built-in defaults apply. An explicitly requested file
    that does not exist is an error.
    """
    path = Path(config_path).expanduser() if config_path else DEFAULT_CONFIG_PATH

    data: Dict[str, Any] = {}
    if path.exists():
        with path.open("r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration file {path} must contain a mapping")
    elif config_path:
        raise FileNotFoundError(
            f"Configuration file not found at {path}. "
            "A minimal config looks like:\n\n"
            "k: 30\n"
            "alpha: 1.0\n"
            "epsilon0: 1.0e-5\n"
            "beta: 0.95\n"
            "batch_size: 1000"
        )

    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"Unknown config keys in {path}: {', '.join(unknown)}")

    # Environment variable overrides
    for key in _FIELD_TYPES:
        value = os.getenv(ENV_PREFIX + key.upper())
        if value is not None:
            data[key] = value

    return {key: _cast(key, value) for key, value in data.items() if value is not None}


def make_train_config(
    defaults: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> TrainConfig:
    """
    Build a validated TrainConfig. Explicit overrides (CLI flags) win over
    the defaults returned by load_config; None values are ignored.
    """
    merged: Dict[str, Any] = {}
    for layer in (defaults or {}, overrides or {}):
        for key, value in layer.items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"Unknown training option: {key}")
            merged[key] = _cast(key, value)
    return TrainConfig(**merged).validate()
