"""Budgeted derivative-free refinement of rotation proportionality factors.

``cobyla_minimize`` is the unconstrained core of Powell's COBYLA: a simplex of
``n + 1`` interpolation points defines a linear model, each iteration steps to
the minimiser of that model on a ball of radius ``rho``, and ``rho`` shrinks
when the model stops predicting progress.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .alignment import kta
from .encoding import FeatureMapCircuit
from .kernel import KernelCounter, gram_matrix
from .svm import rmse, train_svm


class Objective(str, enum.Enum):
    MIN_RMSE = "min_rmse"
    MAX_KTA = "max_kta"


@dataclass
class RefineConfig:
    objective: Objective = Objective.MAX_KTA
    budget: int = 100
    initial_step: float = 0.5
    final_step: float = 1e-3
    C: float = 1.0
    rmse_target: float = 1.0
    rmse_mode: str = "symmetric"

    def __post_init__(self):
        self.objective = Objective(self.objective)
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if not 0 < self.final_step < self.initial_step:
            raise ValueError("need 0 < final_step < initial_step")


@dataclass
class RefineTrace:
    evaluations: list[tuple[np.ndarray, float]] = field(default_factory=list)

    @property
    def best_index(self) -> Optional[int]:
        if not self.evaluations:
            return None
        return int(np.argmin([v for _, v in self.evaluations]))

    def running_best(self) -> list[float]:
        return list(np.minimum.accumulate([v for _, v in self.evaluations]))

    def to_csv(self) -> str:
        n = len(self.evaluations[0][0]) if self.evaluations else 0
        lines = ["index," + ",".join(f"p{k}" for k in range(n)) + ("," if n else "") + "objective"]
        for i, (x, v) in enumerate(self.evaluations):
            cells = [str(i)] + [repr(float(p)) for p in x] + [repr(float(v))]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def cobyla_minimize(f: Callable[[np.ndarray], float], x0, budget: int = 100,
                    initial_step: float = 0.5, final_step: float = 1e-3):
    """Minimise ``f`` with at most ``budget`` evaluations.

    Returns the best evaluated point (earliest on ties) and the trace.
    """
    trace = RefineTrace()
    x0 = np.array(x0, dtype=float)
    n = x0.size

    def ev(x):
        v = float(f(x.copy()))
        trace.evaluations.append((x.copy(), v))
        return v

    sim = [x0]
    fs = [ev(x0)]
    rho = float(initial_step)
    for i in range(n):
        if len(trace.evaluations) >= budget:
            break
        x = x0.copy()
        x[i] += rho
        sim.append(x)
        fs.append(ev(x))

    while n and len(sim) == n + 1 and len(trace.evaluations) < budget:
        b = int(np.argmin(fs))
        sim[0], sim[b] = sim[b], sim[0]
        fs[0], fs[b] = fs[b], fs[0]
        base = sim[0]
        D = np.array([v - base for v in sim[1:]])
        df = np.array(fs[1:]) - fs[0]
        dists = np.linalg.norm(D, axis=1)
        sv = np.linalg.svd(D / rho, compute_uv=False)
        g = np.linalg.lstsq(D, df, rcond=None)[0]

        far = int(np.argmax(dists))
        if dists[far] > 2 * rho or sv.min() < 0.25:
            # restore a well-poised simplex of scale rho
            others = np.delete(D, far, axis=0)
            if others.shape[0]:
                d = np.linalg.svd(others)[2][-1]
            else:
                d = np.ones(1)
            if g @ d > 0:
                d = -d
            x = base + rho * d
            sim[far + 1] = x
            fs[far + 1] = ev(x)
            continue

        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            rho *= 0.5
            if rho < final_step:
                break
            continue
        x = base - rho * g / gn
        fx = ev(x)
        c = np.linalg.lstsq(D.T, x - base, rcond=None)[0]
        j = int(np.argmax(np.abs(c)))
        if fx < fs[0] or fx < fs[j + 1]:
            sim[j + 1] = x
            fs[j + 1] = fx
        if (fs[0] - fx) < 0.1 * rho * gn:
            rho *= 0.5
            if rho < final_step:
                break

    best = trace.best_index
    return trace.evaluations[best][0].copy(), trace


def extract_parameters(fm: FeatureMapCircuit) -> np.ndarray:
    if fm.overrides is not None:
        return np.array(fm.overrides, dtype=float)
    return np.array([g.proportionality for g in fm.rotation_gates], dtype=float)


def apply_parameters(fm: FeatureMapCircuit, params) -> FeatureMapCircuit:
    return fm.with_overrides(params)


def training_objective(fm: FeatureMapCircuit, X, y, config: RefineConfig,
                       counter: Optional[KernelCounter] = None) -> float:
    """Minimisation-convention objective on the training split (KTA negated)."""
    G = gram_matrix(fm, X, counter, "train")
    if config.objective is Objective.MAX_KTA:
        return -kta(G, y)
    model = train_svm(G, y, config.C)
    return rmse(model, G, y, config.rmse_target, config.rmse_mode)


def refine_circuit(fm: FeatureMapCircuit, X, y, config: RefineConfig,
                   counter: Optional[KernelCounter] = None):
    """Return ``fm`` with refined overrides and the optimiser trace."""
    x0 = extract_parameters(fm)
    if x0.size == 0:
        return fm, RefineTrace()
    best, trace = cobyla_minimize(
        lambda p: training_objective(apply_parameters(fm, p), X, y, config, counter),
        x0, config.budget, config.initial_step, config.final_step,
    )
    return apply_parameters(fm, best), trace
