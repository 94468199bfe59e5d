"""Experiment configuration: a flat ``key = value`` text file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union, get_args, get_origin, get_type_hints

APPROACHES = ("1", "1.1", "1.2", "2", "2.1", "2.2", "3", "3.1", "3.2")
DATASETS = ("moons", "circles", "random", "csv")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(errors))
        self.errors = errors


@dataclass
class ExperimentConfig:
    # dataset selection
    dataset: str = "moons"
    csv_path: Optional[str] = None
    label_column: str = "label"
    positive_label: str = "1"
    negative_label: Optional[str] = None
    noise: float = 0.1
    train_count: int = 210
    test_count: int = 90
    validation_count: int = 500
    pca_components: int = 10
    scale: bool = True
    # circuit budgets
    qubits: int = 6
    layers: int = 6
    # genetic search
    population_size: int = 100
    offspring_per_generation: int = 15
    crossover_fraction: float = 0.3
    mutation_probability: float = 0.7
    mutation_bit_fraction: float = 0.2
    generations: int = 1200
    use_cache: bool = True
    seed: int = 0
    # classifier and metrics
    C: float = 1.0
    gamma: Optional[float] = None
    kta_subsets: int = 5
    rmse_error: str = "symmetric"
    rmse_target: float = 1.0
    # refinement
    refine_budget: int = 100
    refine_initial_step: float = 0.5
    refine_final_step: float = 1e-3
    refine_top_k: Optional[int] = None
    # reporting
    approaches: list[str] = field(default_factory=lambda: list(APPROACHES))
    grid_resolution: int = 100

    def validate(self) -> list[str]:
        errors = []
        if self.dataset not in DATASETS:
            errors.append(f"dataset must be one of {', '.join(DATASETS)}")
        if self.dataset == "csv" and not self.csv_path:
            errors.append("dataset = csv requires csv_path")
        for name in ("train_count", "test_count"):
            if getattr(self, name) < 2 or getattr(self, name) % 2:
                errors.append(f"{name} must be a positive even number")
        if self.validation_count < 0 or self.validation_count % 2:
            errors.append("validation_count must be a non-negative even number")
        if self.dataset != "random" and self.validation_count == 0:
            errors.append("validation_count may only be 0 for the random dataset")
        for name in ("qubits", "layers", "population_size", "offspring_per_generation",
                     "kta_subsets", "refine_budget", "grid_resolution", "pca_components"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be positive")
        if self.generations < 0:
            errors.append("generations must be non-negative")
        for name in ("crossover_fraction", "mutation_probability", "mutation_bit_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors.append(f"{name} must lie in [0, 1]")
        if self.C <= 0:
            errors.append("C must be positive")
        if self.gamma is not None and self.gamma <= 0:
            errors.append("gamma must be positive")
        if self.kta_subsets > self.train_count:
            errors.append("kta_subsets cannot exceed train_count")
        if self.rmse_error not in ("symmetric", "literal"):
            errors.append("rmse_error must be symmetric or literal")
        if not 0 < self.refine_final_step < self.refine_initial_step:
            errors.append("need 0 < refine_final_step < refine_initial_step")
        if self.refine_top_k is not None and self.refine_top_k < 1:
            errors.append("refine_top_k must be positive")
        bad = [a for a in self.approaches if a not in APPROACHES]
        if bad:
            errors.append(f"unknown approaches {bad}; choose from {', '.join(APPROACHES)}")
        if not self.approaches:
            errors.append("at least one approach is required")
        return errors

    def check(self) -> "ExperimentConfig":
        errors = self.validate()
        if errors:
            raise ConfigError(errors)
        return self


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(raw: str, tp):
    if get_origin(tp) is Union:  # Optional[X]
        if raw.lower() in ("", "none", "null"):
            return None
        tp = next(a for a in get_args(tp) if a is not type(None))
    if get_origin(tp) is list:
        return [s.strip() for s in raw.split(",") if s.strip()]
    if tp is bool:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return tp(raw)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    hints = get_type_hints(ExperimentConfig)
    values, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected key = value")
            continue
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in hints:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        try:
            values[key] = _coerce(raw, hints[key])
        except ValueError as exc:
            errors.append(f"{source}:{lineno}: bad value for {key}: {exc}")
    errors += ExperimentConfig(**values).validate()
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    return parse_config(text, str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, list):
            v = ",".join(v)
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"
