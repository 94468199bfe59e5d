"""Dual soft-margin SVM over precomputed kernels, plus classifier metrics.

Training solves

    min_a  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j K_ij,
    s.t.   0 <= a_i <= C,  y^T a = 0

by SMO with second-order working-set selection. The inner loop is compiled
with numba since the genetic search trains thousands of models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numba
import numpy as np


class DegenerateProblemError(ValueError):
    """Training labels contain a single class."""


@numba.njit(cache=True)
def _smo(K, y, C, eps, max_iter):
    n = K.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    tau = 1e-12
    it = 0
    while it < max_iter:
        # select i: max over I_up of -y G
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                b = gmax - v
                if i >= 0 and b > 0:
                    a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if a <= 0:
                        a = tau
                    score = -(b * b) / a
                    if score < best:
                        best = score
                        j = t
        if i < 0 or j < 0 or gmax - gmin < eps:
            break
        it += 1
        yi = y[i]
        yj = y[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = tau
        old_i = alpha[i]
        old_j = alpha[j]
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(n):
            G[t] += y[t] * (yi * K[t, i] * di + yj * K[t, j] * dj)

    # offset from free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    s = 0.0
    nfree = 0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            s += yg
    if nfree > 0:
        rho = s / nfree
    else:
        rho = (ub + lb) / 2
    return alpha, rho, it


@dataclass
class SvmModel:
    dual_coefficients: np.ndarray  # alpha_i * y_i, one per training point
    bias: float
    C: float
    iterations: int = 0

    @property
    def training_refs(self) -> np.ndarray:
        return np.flatnonzero(self.dual_coefficients)


class MarginStats(NamedTuple):
    mean: float
    std_dev: float
    per_point: np.ndarray


def _check_labels(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=float)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    return y


def train_svm(gram, labels, C: float = 1.0, tol: float = 1e-6, max_iter: int = 10_000_000) -> SvmModel:
    """Train on a precomputed Gram matrix (array or ``GramMatrix``)."""
    K = np.ascontiguousarray(getattr(gram, "entries", gram), dtype=float)
    y = _check_labels(labels)
    if K.shape != (y.size, y.size):
        raise ValueError(f"gram shape {K.shape} does not match {y.size} labels")
    if np.all(y == y[0]):
        raise DegenerateProblemError("training labels contain a single class")
    if C <= 0:
        raise ValueError("C must be positive")
    alpha, rho, iters = _smo(K, y, float(C), float(tol), int(max_iter))
    return SvmModel(alpha * y, float(-rho), float(C), int(iters))


def dual_objective(model: SvmModel, gram, labels) -> float:
    """Value of the minimised dual objective at the model's coefficients."""
    K = np.asarray(getattr(gram, "entries", gram), dtype=float)
    y = _check_labels(labels)
    alpha = model.dual_coefficients * y
    return float(0.5 * model.dual_coefficients @ K @ model.dual_coefficients - alpha.sum())


def decision_values(model: SvmModel, kernel_rows) -> np.ndarray:
    """Decision function for each row of kernel values against the training set."""
    K = np.atleast_2d(np.asarray(getattr(kernel_rows, "entries", kernel_rows), dtype=float))
    if K.shape[1] != model.dual_coefficients.size:
        raise ValueError(
            f"kernel rows have {K.shape[1]} columns, model has {model.dual_coefficients.size} training points"
        )
    return K @ model.dual_coefficients + model.bias


def decision_function(model: SvmModel, kernel_row) -> float:
    return float(decision_values(model, np.asarray(kernel_row, dtype=float)[None, :])[0])


def predict_sign(df) -> np.ndarray:
    return np.where(np.asarray(df) >= 0, 1, -1)


def accuracy(model: SvmModel, cross, labels) -> float:
    y = _check_labels(labels)
    if y.size == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return float(np.mean(predict_sign(decision_values(model, cross)) == y))


def margins(model: SvmModel, gram, labels) -> MarginStats:
    y = _check_labels(labels)
    per_point = y * decision_values(model, gram)
    return MarginStats(float(per_point.mean()), float(per_point.std()), per_point)


def rmse_errors(df, labels, m: float = 1.0,
                mode: Literal["symmetric", "literal"] = "symmetric") -> np.ndarray:
    df = np.asarray(df, dtype=float)
    y = _check_labels(labels)
    err = np.zeros_like(df)
    pos = (y > 0) & (df < m)
    err[pos] = m - df[pos]
    neg = (y < 0) & (df > -m)
    if mode == "symmetric":
        err[neg] = df[neg] + m
    elif mode == "literal":
        err[neg] = df[neg] - m
    else:
        raise ValueError(f"unknown rmse mode {mode!r}")
    return err


def rmse(model: SvmModel, gram, labels, m: float = 1.0,
         mode: Literal["symmetric", "literal"] = "symmetric") -> float:
    err = rmse_errors(decision_values(model, gram), labels, m, mode)
    return float(np.sqrt(np.mean(err ** 2)))


def roc_curve(scores, labels) -> list[tuple[float, float]]:
    """(FPR, TPR) pairs from a threshold sweep, (0, 0) through (1, 1)."""
    s = np.asarray(scores, dtype=float)
    y = _check_labels(labels)
    n_pos = int((y > 0).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y > 0)
    fp = np.cumsum(y < 0)
    # last index of each group of tied scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    points = [(0.0, 0.0)]
    points += [(fp[k] / n_neg, tp[k] / n_pos) for k in ends]
    return [(float(a), float(b)) for a, b in points]


def roc_points(model: SvmModel, cross, labels) -> list[tuple[float, float]]:
    return roc_curve(decision_values(model, cross), labels)


def auc(points) -> float:
    p = np.asarray(points, dtype=float)
    return float(np.sum(np.diff(p[:, 0]) * (p[1:, 1] + p[:-1, 1]) / 2))


def confusion_counts(predicted, actual) -> np.ndarray:
    """2x2 counts ``[[TP, FN], [FP, TN]]``: rows actual (+1, -1), columns predicted (+1, -1)."""
    p = np.asarray(predicted)
    a = np.asarray(actual)
    return np.array([
        [np.sum((a > 0) & (p > 0)), np.sum((a > 0) & (p < 0))],
        [np.sum((a < 0) & (p > 0)), np.sum((a < 0) & (p < 0))],
    ], dtype=int)


def confusion_matrix(model: SvmModel, cross, labels) -> np.ndarray:
    return confusion_counts(predict_sign(decision_values(model, cross)), _check_labels(labels))
