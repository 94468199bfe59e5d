"""Orchestration of the nine approaches: GA search, refinement, selection, metrics.

Approach ``b`` (1, 2 or 3) fixes the GA objectives; suffix ``.1`` refines the
final population for minimum training RMSE and ``.2`` for maximum training
KTA. Approaches sharing a base reuse one GA run.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .alignment import ApproxPartition, kta, kta_approx, make_partition
from .config import ExperimentConfig
from .data import Dataset, SplitSpec, Splits, load_csv, make_circles, make_moons, make_random, split
from .encoding import (Chromosome, FeatureMapCircuit, decode_chromosome, render_gate_list,
                       render_text, size_metric, weighted_size)
from .kernel import (KernelCounter, cross_from_states, gram_from_states, gram_matrix, pair_count,
                     rbf_kernel)
from .nsga2 import GaConfig, GaResult, Individual, run as run_ga
from .refine import Objective, RefineConfig, refine_circuit, training_objective
from .simulator import DimensionError, SimulationError, prepare_states
from .svm import (DegenerateProblemError, accuracy, auc, confusion_matrix, decision_values, margins,
                  rmse, roc_points, train_svm)

log = logging.getLogger(__name__)

# Worst-case fitness for candidates whose evaluation fails.
SENTINEL_SIZE = 1e6
_RECOVERABLE = (SimulationError, DimensionError, DegenerateProblemError, np.linalg.LinAlgError,
                FloatingPointError)


@dataclass(frozen=True)
class ApproachSpec:
    id: str
    base: int
    refinement: Optional[Objective]

    @property
    def objectives(self) -> tuple[str, str]:
        first = {1: "test_accuracy", 2: "train_kta", 3: "train_kta_approx"}[self.base]
        return first, ("weighted_size" if self.base == 1 else "unweighted_size")

    @classmethod
    def parse(cls, approach_id: str) -> "ApproachSpec":
        base, _, suffix = approach_id.partition(".")
        refinement = {"": None, "1": Objective.MIN_RMSE, "2": Objective.MAX_KTA}[suffix]
        return cls(approach_id, int(base), refinement)


class CandidateEvaluator:
    """Fitness for one base approach; holds only the splits that approach may read.

    Base 1 sees train and test, bases 2 and 3 see the training split alone.
    """

    def __init__(self, base: int, train: Dataset, test: Optional[Dataset] = None, *,
                 C: float = 1.0, qubits: int = 6, layers: int = 6,
                 partition: Optional[ApproxPartition] = None):
        if base == 1 and test is None:
            raise ValueError("approach 1 needs the test split")
        if base == 3 and partition is None:
            raise ValueError("approach 3 needs a partition")
        self.base = base
        self.train = train
        self.test = test if base == 1 else None
        self.partition = partition
        self.C = C
        self.counter = KernelCounter()
        self.failures = 0

    @property
    def kernel_evaluations(self) -> int:
        return self.counter.total

    def sentinel(self) -> tuple[float, float]:
        return (0.0 if self.base == 1 else 1.0, SENTINEL_SIZE)

    def __call__(self, chromosome: Chromosome) -> tuple[float, float]:
        fm = decode_chromosome(chromosome, self.train.n_features)
        sm = size_metric(fm).sm
        X, y = self.train.features, self.train.labels
        try:
            if self.base == 1:
                s_train = prepare_states(fm, X)
                G = gram_from_states(s_train)
                self.counter.add(pair_count(len(y)), "train")
                model = train_svm(G, y, self.C)
                K = cross_from_states(prepare_states(fm, self.test.features), s_train)
                self.counter.add(K.size, "testxtrain")
                acc = accuracy(model, K, self.test.labels)
                return -acc, weighted_size(sm, acc)
            if self.base == 2:
                return -kta(gram_matrix(fm, X, self.counter, "train"), y), sm
            return -kta_approx(fm, X, y, self.partition, self.counter, "train"), sm
        except _RECOVERABLE as exc:
            self.failures += 1
            log.debug("candidate %s failed: %r", chromosome.bits, exc)
            return self.sentinel()


def make_evaluator(base: int, splits: Splits, config: ExperimentConfig) -> CandidateEvaluator:
    partition = None
    if base == 3:
        rng = np.random.default_rng([config.seed, 3])
        partition = make_partition(len(splits.train), config.kta_subsets, rng)
    return CandidateEvaluator(base, splits.train, splits.test if base == 1 else None,
                              C=config.C, qubits=config.qubits, layers=config.layers,
                              partition=partition)


def evaluate_candidate(chromosome: Chromosome, splits: Splits, approach, config=None):
    spec = approach if isinstance(approach, ApproachSpec) else ApproachSpec.parse(str(approach))
    return make_evaluator(spec.base, splits, config or ExperimentConfig())(chromosome)


@dataclass
class Candidate:
    """A final-population member ready for selection (possibly refined)."""

    index: int
    chromosome: Chromosome
    circuit: FeatureMapCircuit
    fitness: tuple[float, float]


@dataclass
class Scored:
    candidate: Candidate
    model: object
    validation_accuracy: float
    sm: float


def _train_model(fm: FeatureMapCircuit, train: Dataset, C: float,
                 counter: Optional[KernelCounter] = None):
    states = prepare_states(fm, train.features)
    G = gram_from_states(states)
    if counter is not None:
        counter.add(pair_count(len(train)), "train")
    return train_svm(G, train.labels, C), states, G


def select_best(candidates: list[Candidate], splits: Splits, C: float = 1.0,
                counter: Optional[KernelCounter] = None) -> tuple[Scored, list[float]]:
    """Highest validation accuracy; ties go to smaller SM, then lower index."""
    scored = []
    for cand in candidates:
        fm = cand.circuit
        try:
            model, s_train, _ = _train_model(fm, splits.train, C, counter)
            K = cross_from_states(prepare_states(fm, splits.validation.features), s_train)
            if counter is not None:
                counter.add(K.size, "validationxtrain")
            acc = accuracy(model, K, splits.validation.labels)
        except _RECOVERABLE:
            model, acc = None, -1.0
        scored.append(Scored(cand, model, acc, size_metric(fm).sm))
    best = min(scored, key=lambda s: (-s.validation_accuracy, s.sm, s.candidate.index))
    return best, [s.validation_accuracy for s in scored]


def build_dataset(config: ExperimentConfig) -> Dataset:
    n = config.train_count + config.test_count + config.validation_count
    if config.dataset == "moons":
        return make_moons(n, config.noise, config.seed)
    if config.dataset == "circles":
        return make_circles(n, config.noise, config.seed)
    if config.dataset == "random":
        return make_random(n, config.seed)
    return load_csv(config.csv_path, config.label_column, config.positive_label, config.negative_label)


def build_splits(config: ExperimentConfig, dataset: Optional[Dataset] = None) -> Splits:
    dataset = dataset if dataset is not None else build_dataset(config)
    spec = SplitSpec(config.train_count, config.test_count, config.validation_count)
    splits = split(dataset, spec, config.seed, config.pca_components, config.scale)
    if config.validation_count == 0:
        # no held-out set: validate on the union of train and test
        union = Dataset(np.r_[splits.train.features, splits.test.features],
                        np.r_[splits.train.labels, splits.test.labels], dataset.name)
        splits = dataclasses.replace(splits, validation=union)
    return splits


def ga_config(config: ExperimentConfig) -> GaConfig:
    return GaConfig(
        population_size=config.population_size,
        offspring_per_generation=config.offspring_per_generation,
        crossover_fraction=config.crossover_fraction,
        mutation_probability=config.mutation_probability,
        mutation_bit_fraction=config.mutation_bit_fraction,
        generations=config.generations,
        seed=config.seed,
        qubits=config.qubits,
        layers=config.layers,
        use_cache=config.use_cache,
    )


@dataclass
class BaseRun:
    base: int
    result: GaResult
    evaluator: CandidateEvaluator
    candidates: list[Candidate]


def run_base(base: int, splits: Splits, config: ExperimentConfig) -> BaseRun:
    evaluator = make_evaluator(base, splits, config)
    result = run_ga(ga_config(config), evaluator)
    d = splits.train.n_features
    candidates = [
        Candidate(i, ind.chromosome, decode_chromosome(ind.chromosome, d), ind.fitness)
        for i, ind in enumerate(result.population)
    ]
    log.info("approach %d: GA done, %d evaluations, %d cache hits, %d kernel evaluations",
             base, result.evaluations, result.cache_hits, evaluator.kernel_evaluations)
    return BaseRun(base, result, evaluator, candidates)


def refine_population(candidates: list[Candidate], splits: Splits, objective: Objective,
                      config: ExperimentConfig, counter: Optional[KernelCounter] = None):
    """Refine the top-k candidates by primary fitness (all when k is None)."""
    order = sorted(candidates, key=lambda c: (c.fitness[0], c.index))
    if config.refine_top_k is not None:
        order = order[: config.refine_top_k]
    rcfg = RefineConfig(objective, config.refine_budget, config.refine_initial_step,
                        config.refine_final_step, config.C, config.rmse_target, config.rmse_error)
    X, y = splits.train.features, splits.train.labels
    refined, records, traces = [], [], {}
    for cand in order:
        fm = cand.circuit
        try:
            before = training_objective(fm, X, y, rcfg, counter)
            new_fm, trace = refine_circuit(fm, X, y, rcfg, counter)
        except _RECOVERABLE as exc:
            log.debug("refinement of %d failed: %r", cand.index, exc)
            continue
        after = before if not trace.evaluations else trace.evaluations[trace.best_index][1]
        sign = -1.0 if objective is Objective.MAX_KTA else 1.0
        records.append({
            "index": cand.index,
            "metric": "train_kta" if objective is Objective.MAX_KTA else "train_rmse",
            "before": sign * before,
            "after": sign * after,
            "evaluations": len(trace.evaluations),
            "sm_before": size_metric(fm).sm,
            "sm_after": size_metric(new_fm).sm,
        })
        traces[cand.index] = trace
        refined.append(dataclasses.replace(cand, circuit=new_fm))
    return refined, records, traces


def _grid(validation: Dataset, resolution: int) -> np.ndarray:
    lo = validation.features.min(axis=0)
    hi = validation.features.max(axis=0)
    gx = np.linspace(lo[0], hi[0], resolution)
    gy = np.linspace(lo[1], hi[1], resolution)
    xx, yy = np.meshgrid(gx, gy)
    return np.c_[xx.ravel(), yy.ravel()]


def _f(x) -> float:
    return float(x)


def describe_model(fm: FeatureMapCircuit, model, splits: Splits, config: ExperimentConfig,
                   counter: Optional[KernelCounter] = None):
    """Every reported metric for one classifier; also returns the decision grid."""
    s_train = prepare_states(fm, splits.train.features)
    G = gram_from_states(s_train)
    y_tr = splits.train.labels
    K_test = cross_from_states(prepare_states(fm, splits.test.features), s_train)
    K_val = cross_from_states(prepare_states(fm, splits.validation.features), s_train)
    if counter is not None:
        counter.add(pair_count(len(y_tr)), "train")
        counter.add(K_test.size, "testxtrain")
        counter.add(K_val.size, "validationxtrain")
    test_acc = accuracy(model, K_test, splits.test.labels)
    sizes = size_metric(fm, test_acc)
    mstats = margins(model, G, y_tr)
    roc = roc_points(model, K_val, splits.validation.labels)
    cm = confusion_matrix(model, K_val, splits.validation.labels)
    info = {
        "circuit_text": render_text(fm),
        "gate_list": render_gate_list(fm),
        "n_local": sizes.n_local,
        "n_cnot": sizes.n_cnot,
        "sm": _f(sizes.sm),
        "ws": _f(sizes.ws),
        "accuracy": {
            "train": accuracy(model, G, y_tr),
            "test": test_acc,
            "validation": accuracy(model, K_val, splits.validation.labels),
        },
        "kta_train": _f(kta(G, y_tr)),
        "rmse_train": rmse(model, G, y_tr, config.rmse_target, config.rmse_error),
        "margins": {
            "mean": mstats.mean,
            "std_dev": mstats.std_dev,
            "per_point": [_f(v) for v in mstats.per_point],
        },
        "roc": [list(p) for p in roc],
        "auc": auc(roc),
        "confusion_matrix": {"tp": int(cm[0, 0]), "fn": int(cm[0, 1]),
                             "fp": int(cm[1, 0]), "tn": int(cm[1, 1])},
        "support_vectors": int(model.training_refs.size),
    }
    grid = None
    if splits.train.n_features == 2:
        pts = _grid(splits.validation, config.grid_resolution)
        K_grid = cross_from_states(prepare_states(fm, pts), s_train)
        grid = np.c_[pts, decision_values(model, K_grid)]
    return info, grid


def rbf_baseline(splits: Splits, config: ExperimentConfig) -> dict:
    gamma = config.gamma if config.gamma is not None else 1.0 / splits.train.n_features
    Xtr = splits.train.features
    model = train_svm(rbf_kernel(Xtr, Xtr, gamma), splits.train.labels, config.C)
    out = {"gamma": gamma, "C": config.C}
    for name in ("train", "test", "validation"):
        ds = getattr(splits, name)
        out[name] = accuracy(model, rbf_kernel(ds.features, Xtr, gamma), ds.labels)
    return out


@dataclass
class ExperimentReport:
    data: dict
    grids: dict = field(default_factory=dict)
    ga_traces: dict = field(default_factory=dict)
    refine_traces: dict = field(default_factory=dict)


def run_experiment(config: ExperimentConfig, splits: Optional[Splits] = None) -> ExperimentReport:
    config.check()
    splits = splits if splits is not None else build_splits(config)
    specs = [ApproachSpec.parse(a) for a in config.approaches]
    data = {
        "tool": "qkga",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": dataclasses.asdict(config),
        "seed": config.seed,
        "dataset": {
            "name": splits.train.name,
            "n_features": splits.train.n_features,
            "train": len(splits.train),
            "test": len(splits.test),
            "validation": len(splits.validation),
        },
        "rbf_baseline": rbf_baseline(splits, config),
        "approaches": {},
        "kernel_evaluations": {},
    }
    report = ExperimentReport(data)
    base_runs: dict[int, BaseRun] = {}
    for spec in specs:
        if spec.base not in base_runs:
            base_runs[spec.base] = run_base(spec.base, splits, config)
            report.ga_traces[str(spec.base)] = base_runs[spec.base].result.history
        br = base_runs[spec.base]
        post = KernelCounter()
        refinement, traces = [], {}
        pool = br.candidates
        if spec.refinement is not None:
            pool, refinement, traces = refine_population(br.candidates, splits, spec.refinement,
                                                         config, post)
            if not pool:
                pool = br.candidates
        best, val_accs = select_best(pool, splits, config.C, post)
        cand = best.candidate
        info, grid = describe_model(cand.circuit, best.model, splits, config, post)
        entry = {
            "approach": spec.id,
            "base": spec.base,
            "objectives": list(spec.objectives),
            "refinement": None if spec.refinement is None else spec.refinement.value,
            "best": {
                "index": cand.index,
                "chromosome": cand.chromosome.bits,
                "overrides": None if cand.circuit.overrides is None else list(cand.circuit.overrides),
                "ga_fitness": list(cand.fitness),
                **info,
            },
            "selection_validation_accuracies": val_accs,
            "ga": {
                "evaluations": br.result.evaluations,
                "cache_hits": br.result.cache_hits,
                "failures": br.evaluator.failures,
                "kernel_evaluations": dict(sorted(br.evaluator.counter.counts.items())),
                "final_population": [
                    {"chromosome": c.chromosome.bits, "fitness": list(c.fitness)} for c in br.candidates
                ],
            },
            "refinement_summary": refinement,
        }
        data["approaches"][spec.id] = entry
        data["kernel_evaluations"][spec.id] = {
            "ga": br.evaluator.kernel_evaluations,
            "post_ga": post.total,
        }
        if grid is not None:
            report.grids[spec.id] = grid
        if cand.index in traces:
            report.refine_traces[spec.id] = traces[cand.index]
        log.info("approach %s: validation accuracy %.4f", spec.id, info["accuracy"]["validation"])
    return report
