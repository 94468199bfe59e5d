import json

import numpy as np
import pytest

from qkga import harness
from qkga.cli import main
from qkga.config import ConfigError, ExperimentConfig, dump_config, parse_config
from qkga.data import Dataset, split, SplitSpec
from qkga.encoding import Chromosome, decode_chromosome, size_metric, weighted_size
from qkga.harness import (ApproachSpec, Candidate, SENTINEL_SIZE, build_splits, evaluate_candidate,
                          make_evaluator, run_experiment, select_best)
from qkga.report import emit_report, load_report


@pytest.fixture
def splits(tiny_config):
    return build_splits(tiny_config)


def test_approach_parse():
    assert ApproachSpec.parse("1").objectives == ("test_accuracy", "weighted_size")
    s = ApproachSpec.parse("3.2")
    assert (s.base, s.refinement.value) == (3, "max_kta")
    assert s.objectives == ("train_kta_approx", "unweighted_size")
    assert ApproachSpec.parse("2.1").refinement.value == "min_rmse"


def test_empty_circuit_under_approach_2(splits, tiny_config):
    empty = Chromosome("01000" * 4, 2, 2)
    f1, f2 = evaluate_candidate(empty, splits, "2", tiny_config)
    assert f1 == pytest.approx(0.0, abs=1e-12) and f2 == 0.0


def test_approach_1_objectives_use_ws(splits, tiny_config):
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = Chromosome("".join(rng.choice(["0", "1"], 20)), 2, 2)
        f1, f2 = evaluate_candidate(c, splits, "1", tiny_config)
        sm = size_metric(decode_chromosome(c, 2)).sm
        assert f2 == pytest.approx(weighted_size(sm, -f1))
        assert (f1, f2) == evaluate_candidate(c, splits, "1", tiny_config)
    assert weighted_size(3.0, 1.0) == 6.0


def test_failed_candidate_gets_sentinel(splits, tiny_config, monkeypatch):
    def broken(*a, **k):
        raise harness.DegenerateProblemError("boom")

    monkeypatch.setattr(harness, "train_svm", broken)
    ev = make_evaluator(1, splits, tiny_config)
    assert ev(Chromosome("00000" * 4, 2, 2)) == (0.0, SENTINEL_SIZE)
    assert ev.failures == 1


def test_evaluators_hold_only_permitted_splits(splits, tiny_config):
    assert make_evaluator(1, splits, tiny_config).test is splits.test
    for base in (2, 3):
        ev = make_evaluator(base, splits, tiny_config)
        assert ev.test is None
        assert not hasattr(ev, "validation")


def _cand(i, bits):
    c = Chromosome(bits, 2, 2)
    return Candidate(i, c, decode_chromosome(c, 2), (0.0, 0.0))


def test_select_best(splits):
    single = [_cand(0, "11100" + "01000" * 3)]
    assert select_best(single, splits)[0].candidate.index == 0
    rng = np.random.default_rng(4)
    cands = [_cand(i, "".join(rng.choice(["0", "1"], 20))) for i in range(8)]
    best, accs = select_best(cands, splits)
    assert best.validation_accuracy == max(accs) >= np.median(accs)


def test_select_best_tie_prefers_smaller_circuit(splits):
    # a CNOT controlled by an idle qubit leaves the kernel, hence accuracy, unchanged
    small = _cand(0, "11100" + "01000" * 3)
    large = _cand(1, "11100" + "01000" + "01000" + "00100")
    best, accs = select_best([large, small], splits)
    assert accs[0] == accs[1]
    assert best.candidate.index == 0


def test_run_experiment_and_emit(tmp_path, tiny_config):
    tiny_config.approaches = ["1", "2.1", "3.2"]
    report = run_experiment(tiny_config)
    files = {p.name for p in emit_report(report, tmp_path)}
    assert {"report.json", "roc_1.csv", "circuit_2.1.txt", "gatrace_3.2.log",
            "decision_grid_1.csv"} <= files
    assert len((tmp_path / "decision_grid_1.csv").read_text().splitlines()) == 10 * 10 + 1
    assert load_report(tmp_path / "report.json") == report.data
    log = (tmp_path / "gatrace_1.log").read_text().splitlines()
    assert len(log) == tiny_config.generations
    assert set(json.loads(log[-1])) >= {"generation", "best_objectives", "front0_size",
                                        "kernel_evaluations"}
    for aid in ("2.1", "3.2"):
        for rec in report.data["approaches"][aid]["refinement_summary"]:
            assert rec["sm_before"] == rec["sm_after"]


def test_default_grid_has_ten_thousand_rows(tmp_path, tiny_config):
    tiny_config.approaches = ["2"]
    tiny_config.grid_resolution = 100
    emit_report(run_experiment(tiny_config), tmp_path)
    assert len((tmp_path / "decision_grid_2.csv").read_text().splitlines()) == 10001


def test_no_grid_for_wide_data(tmp_path, tiny_config):
    rng = np.random.default_rng(0)
    data = Dataset(rng.normal(size=(60, 3)), np.repeat([-1, 1], 30))
    tiny_config.approaches = ["2"]
    report = run_experiment(tiny_config, harness.build_splits(tiny_config, data))
    emit_report(report, tmp_path)
    assert not list(tmp_path.glob("decision_grid_*"))


def test_generations_zero_reports_random_population(tiny_config):
    tiny_config.generations = 0
    tiny_config.approaches = ["2"]
    report = run_experiment(tiny_config)
    assert report.data["approaches"]["2"]["ga"]["evaluations"] == tiny_config.population_size


def test_random_dataset_validates_on_train_and_test():
    cfg = ExperimentConfig(dataset="random", train_count=20, test_count=10, validation_count=0)
    s = build_splits(cfg)
    assert len(s.validation) == 30


def test_config_parse_and_errors():
    cfg = parse_config("dataset = circles\nseed = 3  # comment\napproaches = 1, 2.2\nscale = off\n"
                       "refine_top_k = none\n")
    assert (cfg.dataset, cfg.seed, cfg.approaches, cfg.scale, cfg.refine_top_k) == \
        ("circles", 3, ["1", "2.2"], False, None)
    assert parse_config(dump_config(cfg)) == cfg
    with pytest.raises(ConfigError) as info:
        parse_config("train_count = 21\nC = -1\nbogus = 2\n")
    assert len(info.value.errors) == 3
    with pytest.raises(ConfigError) as info:
        parse_config("train_count = 21\nC = -1\napproaches = 4\n")
    assert len(info.value.errors) == 3


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("population_size = 0\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    broken = tmp_path / "broken.cfg"
    broken.write_text("dataset = csv\ncsv_path = /nonexistent.csv\n")
    assert main(["run", "--config", str(broken), "--out", str(tmp_path / "o")]) == 3
    good = tmp_path / "good.cfg"
    good.write_text("train_count = 20\ntest_count = 10\nvalidation_count = 20\nqubits = 2\nlayers = 2\n"
                    "population_size = 6\noffspring_per_generation = 4\ngenerations = 2\n"
                    "refine_budget = 5\ngrid_resolution = 5\n")
    out = tmp_path / "run"
    assert main(["run", "--config", str(good), "--approach", "2", "--approach", "2.2",
                 "--seed", "5", "--out", str(out), "--refine-top-k", "1"]) == 0
    data = load_report(out / "report.json")
    assert sorted(data["approaches"]) == ["2", "2.2"] and data["seed"] == 5
    assert len(data["approaches"]["2.2"]["refinement_summary"]) == 1
