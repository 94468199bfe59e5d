"""Datasets, CSV ingestion, PCA, min-max scaling and balanced splitting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.size:
            raise DataError("features must be (n, d) with one label per row")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise DataError("labels must be +1 or -1")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain missing or non-finite values")

    def __len__(self) -> int:
        return self.labels.size

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx, name: Optional[str] = None) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], name or self.name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(self.n_features)] + ["label"])
        for row, lab in zip(self.features, self.labels):
            w.writerow([repr(float(v)) for v in row] + [int(lab)])
        return buf.getvalue()


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    validation_count: int

    @property
    def total(self) -> int:
        return self.train_count + self.test_count + self.validation_count


def _balanced_labels(n: int) -> np.ndarray:
    if n % 2:
        raise DataError(f"class-balanced generation needs an even n, got {n}")
    return np.repeat([-1, 1], n // 2)


def make_moons(n: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Two interleaved half circles; class -1 is the upper-left arc."""
    rng = np.random.default_rng(seed)
    y = _balanced_labels(n)
    t = np.linspace(0, np.pi, n // 2)
    upper = np.c_[np.cos(t), np.sin(t)]
    lower = np.c_[1 - np.cos(t), 0.5 - np.sin(t)]
    X = np.r_[upper, lower] + noise * rng.standard_normal((n, 2))
    return Dataset(X, y, "moons")


def make_circles(n: int, noise: float = 0.05, seed: int = 0, factor: float = 0.5) -> Dataset:
    """Concentric circles; class -1 is the outer ring."""
    rng = np.random.default_rng(seed)
    y = _balanced_labels(n)
    t = np.linspace(0, 2 * np.pi, n // 2, endpoint=False)
    ring = np.c_[np.cos(t), np.sin(t)]
    X = np.r_[ring, factor * ring] + noise * rng.standard_normal((n, 2))
    return Dataset(X, y, "circles")


def make_random(n: int, seed: int = 0) -> Dataset:
    """Uniform points in the unit square with balanced, randomly assigned labels."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, 2))
    y = rng.permutation(_balanced_labels(n))
    return Dataset(X, y, "random")


def load_csv(path, label_column: str, positive_label: str,
             negative_label: Optional[str] = None) -> Dataset:
    """Read a headed CSV; every column except the label must be numeric.

    Rows whose label is neither ``positive_label`` nor ``negative_label`` raise,
    unless ``negative_label`` is None, in which case every other value maps to -1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header {header}")
        li = header.index(label_column)
        feats, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
            lab = row[li].strip()
            if lab == positive_label:
                labels.append(1)
            elif negative_label is None or lab == negative_label:
                labels.append(-1)
            else:
                raise DataError(f"{path}: row {lineno} has unknown label {lab!r}")
            try:
                feats.append([float(v) for k, v in enumerate(row) if k != li])
            except ValueError:
                raise DataError(f"{path}: row {lineno} has a non-numeric feature") from None
    if not labels:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(feats), np.array(labels), path.stem)


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (d, k), orthonormal columns
    explained_variance: np.ndarray


def fit_pca(features, k: int = 10) -> PcaModel:
    X = np.asarray(features, dtype=float)
    d = X.shape[1]
    if d < k:
        raise DataError(f"cannot keep {k} components of {d}-dimensional data")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / max(X.shape[0] - 1, 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:k]
    comps = vecs[:, order]
    # deterministic sign: largest-magnitude entry positive
    pivot = comps[np.argmax(np.abs(comps), axis=0), np.arange(k)]
    comps = comps * np.where(pivot < 0, -1.0, 1.0)
    return PcaModel(mean, comps, vals[order])


def apply_pca(model: PcaModel, features) -> np.ndarray:
    return (np.asarray(features, dtype=float) - model.mean) @ model.components


@dataclass
class ScalerModel:
    minimum: np.ndarray
    maximum: np.ndarray

    def transform(self, features) -> np.ndarray:
        span = np.where(self.maximum > self.minimum, self.maximum - self.minimum, 1.0)
        return 2.0 * (np.asarray(features, dtype=float) - self.minimum) / span - 1.0


def fit_scaler(features) -> ScalerModel:
    X = np.asarray(features, dtype=float)
    return ScalerModel(X.min(axis=0), X.max(axis=0))


@dataclass
class Splits:
    train: Dataset
    test: Dataset
    validation: Dataset
    pca: Optional[PcaModel] = None
    scaler: Optional[ScalerModel] = None


def split(dataset: Dataset, spec: SplitSpec, seed: int = 0, pca_components: int = 10,
          scale: bool = True) -> Splits:
    """Disjoint class-balanced train/test/validation splits.

    PCA (only when the data has more than ``pca_components`` features) and
    min-max scaling to [-1, 1] are fit on the training split and applied to all.
    """
    counts = (spec.train_count, spec.test_count, spec.validation_count)
    if any(c % 2 for c in counts):
        raise DataError(f"split counts {counts} must be even to stay class-balanced")
    rng = np.random.default_rng(seed)
    pos = rng.permutation(np.flatnonzero(dataset.labels == 1))
    neg = rng.permutation(np.flatnonzero(dataset.labels == -1))
    half = spec.total // 2
    if half > pos.size or half > neg.size:
        raise DataError(
            f"split {counts} needs {half} points per class; have {pos.size} positive, {neg.size} negative"
        )
    parts, start = [], 0
    for c in counts:
        idx = np.r_[pos[start:start + c // 2], neg[start:start + c // 2]]
        parts.append(np.sort(idx))
        start += c // 2
    train, test, val = (dataset.subset(p, f"{dataset.name}") for p in parts)

    pca = scaler = None
    if dataset.n_features > pca_components:
        pca = fit_pca(train.features, pca_components)
        train, test, val = (replace(s, features=apply_pca(pca, s.features)) for s in (train, test, val))
    if scale:
        scaler = fit_scaler(train.features)
        train, test, val = (replace(s, features=scaler.transform(s.features)) for s in (train, test, val))
    return Splits(train, test, val, pca, scaler)
