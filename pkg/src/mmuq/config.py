"""Experiment configuration: the study grid, counts, seeds and file layout."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .buckling import FAILURE_THRESHOLD, MEAN_PLATE, PlateConfig
from .distributions import FAMILIES, ModelFamily
from .evidence import ModelPriorProbs
from .priors import HISTORICAL_SOURCES

__all__ = [
    "ExperimentConfig",
    "PARAMETER_PRIOR_NAMES",
    "MODEL_PRIOR_NAMES",
    "NONINFORMATIVE",
    "model_prior_probs",
    "load_config",
]

NONINFORMATIVE = "noninformative"
PARAMETER_PRIOR_NAMES = (NONINFORMATIVE,) + tuple(HISTORICAL_SOURCES)
MODEL_PRIOR_NAMES = ("uniform", "strong_correct", "strong_incorrect", "savvy")

DEFAULT_SIZES = (10, 25, 50, 100, 500, 1000, 5000, 10000)

_STRONG = 0.9
_WEAK = (1.0 - _STRONG) / 6.0


def model_prior_probs(name: str) -> ModelPriorProbs:
    """Fixed prior model probability tables ("savvy" priors depend on the
    dataset size and are handled where the data are known)."""
    m = len(FAMILIES)
    if name == "uniform":
        return ModelPriorProbs.uniform(m)
    if name == "strong_correct":
        favored = ModelFamily.LOGNORMAL
    elif name == "strong_incorrect":
        favored = ModelFamily.LOGLOGISTIC
    else:
        raise KeyError(f"no fixed probability table for model prior {name!r}")
    pi = np.full(m, _WEAK)
    pi[FAMILIES.index(favored)] = _STRONG
    return ModelPriorProbs(pi)


@dataclass(frozen=True)
class ExperimentConfig:
    """One study run: which grid cells to compute and at what sampling cost."""

    name: str = "study"
    seed: int = 2018
    dataset_sizes: tuple[int, ...] = DEFAULT_SIZES
    parameter_priors: tuple[str, ...] = PARAMETER_PRIOR_NAMES
    model_priors: tuple[str, ...] = ("uniform",)
    n_k: int = 10_000
    n_d: int = 5000
    n_propagation: int = 100_000
    plate: PlateConfig = field(default_factory=lambda: MEAN_PLATE)
    failure_threshold: float = FAILURE_THRESHOLD
    output_dir: str = "out"
    workers: int = 1
    # ensemble-sampler settings (final inference and prior construction)
    chain_steps: int = 2000
    chain_burn_in: int = 500
    chain_walkers: int = 32
    pre_prior_steps: int = 1500
    pre_prior_burn_in: int = 500
    kde_max_components: int = 5000
    emit_psi_table: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "dataset_sizes", tuple(int(s) for s in self.dataset_sizes))
        object.__setattr__(self, "parameter_priors", tuple(self.parameter_priors))
        object.__setattr__(self, "model_priors", tuple(self.model_priors))
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.dataset_sizes or min(self.dataset_sizes) < 1:
            raise ValueError("dataset_sizes must be nonempty positive integers")
        for p in self.parameter_priors:
            if p not in PARAMETER_PRIOR_NAMES:
                raise ValueError(f"unknown parameter prior {p!r}")
        for mp in self.model_priors:
            if mp not in MODEL_PRIOR_NAMES:
                raise ValueError(f"unknown model prior {mp!r}")
        if not self.parameter_priors or not self.model_priors:
            raise ValueError("prior selections must be nonempty")
        for count_name in ("n_k", "n_d", "n_propagation", "workers"):
            if getattr(self, count_name) < 1:
                raise ValueError(f"{count_name} must be >= 1")

    @property
    def out_root(self) -> Path:
        return Path(self.output_dir) / self.name

    def cell_dir(self, size: int, param_prior: str, model_prior: str | None = None) -> Path:
        d = self.out_root / str(size) / param_prior
        return d if model_prior is None else d / model_prior

    def grid(self) -> list[tuple[int, str, str]]:
        return [
            (size, pp, mp)
            for size in self.dataset_sizes
            for pp in self.parameter_priors
            for mp in self.model_priors
        ]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["plate"] = asdict(self.plate)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an ExperimentConfig from JSON; unknown keys are rejected."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    plate = raw.pop("plate", None)
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    cfg = ExperimentConfig(**raw)
    if plate is not None:
        cfg = cfg.with_overrides(plate=PlateConfig(**plate))
    return cfg
