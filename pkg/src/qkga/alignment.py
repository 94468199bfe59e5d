"""Kernel-target alignment and its subset-averaged approximation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoding import FeatureMapCircuit
from .kernel import KernelCounter, gram_matrix, pair_count


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class ApproxPartition:
    subsets: tuple[np.ndarray, ...]

    @property
    def subset_count(self) -> int:
        return len(self.subsets)

    @property
    def evaluation_count(self) -> int:
        return sum(pair_count(len(s)) for s in self.subsets)


def oracle_matrix(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=float)
    return np.outer(y, y)


def kta(gram, labels) -> float:
    """Frobenius alignment between a Gram matrix and the label outer product."""
    K = np.asarray(getattr(gram, "entries", gram), dtype=float)
    y = np.asarray(labels, dtype=float)
    if K.shape != (y.size, y.size):
        raise ValueError(f"gram shape {K.shape} does not match {y.size} labels")
    ko = float(y @ K @ y)
    kk = float(np.sum(K * K))
    oo = float(y.size) ** 2
    return ko / np.sqrt(kk * oo)


def make_partition(n: int, a: int, rng: np.random.Generator) -> ApproxPartition:
    """Shuffle ``range(n)`` and cut it into ``a`` contiguous near-equal chunks."""
    if not 1 <= a <= n:
        raise PartitionError(f"need 1 <= a <= n, got a={a}, n={n}")
    perm = rng.permutation(n)
    return ApproxPartition(tuple(np.sort(c) for c in np.array_split(perm, a)))


def kta_approx(fm: FeatureMapCircuit, X, labels, partition: ApproxPartition,
               counter: Optional[KernelCounter] = None, tag: str = "train") -> float:
    X = np.asarray(X, dtype=float)
    y = np.asarray(labels, dtype=float)
    covered = np.sort(np.concatenate(partition.subsets))
    if covered.size != y.size or np.any(covered != np.arange(y.size)):
        raise PartitionError("partition does not cover the sample indices exactly once")
    values = [kta(gram_matrix(fm, X[s], counter, tag), y[s]) for s in partition.subsets]
    return float(np.mean(values))
