"""Quantum kernel, Gram and cross-kernel matrices with evaluation accounting.

The kernel is the squared fidelity ``|<psi(x)|psi(y)>|^2`` of two encoded
states. Evaluation counts follow the symmetric accounting: a Gram matrix over
``n`` points costs ``(n^2 - n) / 2`` evaluations, a cross matrix ``m * n``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoding import FeatureMapCircuit
from .simulator import DimensionError, prepare_feature_state, prepare_states


class KernelCounter:
    """Tally of kernel evaluations, keyed by a free-form tag such as ``"train"``."""

    def __init__(self):
        self.counts: Counter = Counter()

    def add(self, n: int, tag: str = "train") -> None:
        self.counts[tag] += int(n)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def touching(self, *names: str) -> int:
        """Evaluations whose tag mentions any of ``names``."""
        return sum(v for k, v in self.counts.items() if any(n in k.split("x") for n in names))


@dataclass
class GramMatrix:
    entries: np.ndarray
    evaluation_count: int

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_csv(self) -> str:
        return "\n".join(",".join(repr(float(v)) for v in row) for row in self.entries) + "\n"


def pair_count(n: int) -> int:
    return (n * n - n) // 2


def kernel(fm: FeatureMapCircuit, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise DimensionError(f"kernel arguments differ in shape: {x.shape} vs {y.shape}")
    overlap = np.vdot(prepare_feature_state(fm, x), prepare_feature_state(fm, y))
    return float(min(1.0, abs(overlap) ** 2))


def gram_from_states(states: np.ndarray) -> np.ndarray:
    G = np.abs(states.conj() @ states.T) ** 2
    G = np.clip((G + G.T) / 2, 0.0, 1.0)
    np.fill_diagonal(G, 1.0)
    return G


def cross_from_states(states_a: np.ndarray, states_b: np.ndarray) -> np.ndarray:
    return np.clip(np.abs(states_a.conj() @ states_b.T) ** 2, 0.0, 1.0)


def gram_matrix(fm: FeatureMapCircuit, X, counter: Optional[KernelCounter] = None,
                tag: str = "train") -> GramMatrix:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 1:
        raise ValueError("gram_matrix needs at least one sample")
    G = gram_from_states(prepare_states(fm, X))
    evals = pair_count(n)
    if counter is not None:
        counter.add(evals, tag)
    return GramMatrix(G, evals)


def cross_kernel(fm: FeatureMapCircuit, A, B, counter: Optional[KernelCounter] = None,
                 tag: str = "otherxtrain") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"feature dimensions differ: {A.shape[1]} vs {B.shape[1]}")
    K = cross_from_states(prepare_states(fm, A), prepare_states(fm, B))
    if counter is not None:
        counter.add(K.size, tag)
    return K


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (A ** 2).sum(1)[:, None] + (B ** 2).sum(1)[None, :] - 2 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))
