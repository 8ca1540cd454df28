import csv
import json
import math
import statistics
from pathlib import Path

import numpy as np
import pytest

from stringgp.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from stringgp.errors import ConfigError, InvalidSpec
from stringgp.experiments import (ExperimentConfig, aggregate_rows, run_benchmark,
                                  run_experiment, write_results)
from stringgp.metrics import ones_histogram

ROOT = Path(__file__).resolve().parents[1]

SMALL = {
    "task": "toy_regression",
    "data": {"n": 30, "length": 8},
    "kernel_orders": [2, 3],
    "noise": {"num": 4},
    "methods": ["full", "random", "sa"],
    "selection": {"m": 3, "sa_iterations": 30},
    "repeats": 3,
    "seed": 11,
}


def write_config(tmp_path, overrides=None, name="cfg.json"):
    d = {**SMALL, "output": str(tmp_path / "out")}
    d.update(overrides or {})
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="repeets"):
            ExperimentConfig.from_dict({"repeets": 3})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="temperature"):
            ExperimentConfig.from_dict({"selection": {"temperature": 2}})

    @pytest.mark.parametrize("d", [{"repeats": 0}, {"methods": ["svm"]}, {"task": "mnist"},
                                   {"kernel_orders": [0]}, {"selection": {"m": 0}},
                                   {"split": {"train_fraction": 1.5}},
                                   {"task": "uci_splice", "data": {"path": "/no/such/file"}},
                                   {"task": "custom_csv"}])
    def test_invalid(self, d):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(d)

    @pytest.mark.parametrize("name", ["toy_regression", "toy_classification", "poisson_tf",
                                      "splice", "splice_benchmark"])
    def test_shipped_configs_load(self, name):
        cfg = ExperimentConfig.load(ROOT / "configs" / f"{name}.json")
        assert cfg.repeats >= 1


class TestRun:
    def test_results_and_aggregate(self, tmp_path):
        cfg = ExperimentConfig.load(write_config(tmp_path))
        result = run_experiment(cfg)
        write_results(result, cfg.output)
        rows = read_csv(Path(cfg.output) / "results.csv")
        per = [r for r in rows if r["repeat"] not in ("mean", "se")]
        assert len(per) == 9
        assert [r["seed"] for r in per if r["method"] == "full"] == ["11", "12", "13"]
        # recompute mean and SE from the per-repeat rows with the statistics module
        for method in cfg.methods:
            vals = [float(r["mse"]) for r in per if r["method"] == method]
            mean = next(r for r in rows if r["repeat"] == "mean" and r["method"] == method)
            se = next(r for r in rows if r["repeat"] == "se" and r["method"] == method)
            assert float(mean["mse"]) == pytest.approx(statistics.fmean(vals), rel=1e-12)
            assert float(se["mse"]) == pytest.approx(statistics.stdev(vals) / math.sqrt(3),
                                                     rel=1e-12)
        assert (Path(cfg.output) / "trace.csv").exists()
        assert (Path(cfg.output) / "inducing_histogram.csv").exists()
        timing = read_csv(Path(cfg.output) / "timing.csv")
        assert len(timing) == 9

    def test_classification_outputs(self, tmp_path):
        cfg = ExperimentConfig.load(write_config(tmp_path, {"task": "toy_classification",
                                                            "repeats": 2}))
        result = run_experiment(cfg)
        write_results(result, cfg.output)
        cal = read_csv(Path(cfg.output) / "calibration.csv")
        # 3 methods x (2 repeats + pooled) x 10 bins
        assert len(cal) == 90
        pooled = [r for r in cal if r["repeat"] == "all" and r["method"] == "full"]
        per = [r for r in cal if r["repeat"] in ("0", "1") and r["method"] == "full"]
        assert sum(int(r["count"]) for r in pooled) == sum(int(r["count"]) for r in per)
        for row in result.rows:
            assert 0 <= row["auprc"] <= 1

    def test_aggregate_single_repeat(self):
        rows = [{"method": "full", "likelihood": "gaussian", "mse": 0.5,
                 **{c: float("nan") for c in ("selection_objective", "log_evidence",
                                              "mse_rates", "auprc", "test_log_likelihood",
                                              "calibration_ad")}}]
        mean, se = aggregate_rows(rows, ["full"])
        assert mean["mse"] == 0.5 and se["mse"] == 0.0
        assert math.isnan(mean["auprc"])

    def test_threads_do_not_change_results(self, tmp_path):
        cfg = ExperimentConfig.load(write_config(tmp_path, {"repeats": 2}))
        write_results(run_experiment(cfg), tmp_path / "serial")
        write_results(run_experiment(cfg, threads=2), tmp_path / "parallel")
        for name in ("results.csv", "trace.csv"):
            assert ((tmp_path / "serial" / name).read_bytes()
                    == (tmp_path / "parallel" / name).read_bytes())


class TestCLI:
    def test_run_is_deterministic(self, tmp_path, capsys):
        path = write_config(tmp_path, {"methods": ["random", "sa"]})
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["run", str(path), "--output", str(out)]) == EXIT_OK
            outs.append(out)
        for name in ("results.csv", "trace.csv", "inducing_histogram.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        assert "random" in capsys.readouterr().out

    def test_seed_override(self, tmp_path):
        path = write_config(tmp_path, {"methods": ["random"], "repeats": 1})
        main(["run", str(path), "--output", str(tmp_path / "a"), "--seed", "5"])
        rows = read_csv(tmp_path / "a" / "results.csv")
        assert rows[0]["seed"] == "5"

    def test_config_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"task": "toy_regression", "unknown": 1}')
        assert main(["run", str(path)]) == EXIT_CONFIG
        assert "unknown" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["run", str(tmp_path / "none.json")]) == EXIT_CONFIG

    def test_bad_threads(self, tmp_path):
        assert main(["run", str(write_config(tmp_path)), "--threads", "0"]) == EXIT_CONFIG

    def test_runtime_error_exit(self, tmp_path):
        # m larger than the training set fails at run time
        path = write_config(tmp_path, {"methods": ["random"], "selection": {"m": 50}})
        assert main(["run", str(path)]) == EXIT_RUNTIME

    def test_gen_data(self, tmp_path):
        path = write_config(tmp_path, {"task": "poisson_tf"})
        assert main(["gen-data", str(path), "--output", str(tmp_path / "g")]) == EXIT_OK
        data = read_csv(tmp_path / "g" / "data.csv")
        rates = read_csv(tmp_path / "g" / "rates.csv")
        assert len(data) == len(rates) == 30

    def test_plot_missing_input(self, tmp_path):
        assert main(["plot", str(tmp_path / "nothing")]) == EXIT_RUNTIME

    def test_verbose_flag(self, tmp_path):
        path = write_config(tmp_path, {"methods": ["random"], "repeats": 1})
        assert main(["run", str(path), "-v", "--output", str(tmp_path / "v")]) == EXIT_OK


class TestBenchmark:
    def test_rows_and_growth(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "task": "toy_classification", "data": {"n": 1000, "length": 12},
            "kernel_orders": [3], "selection": {"m": 10},
            "benchmark": {"sizes": [200, 400], "test_n": 100, "methods": ["full", "random"]},
        })
        rows = run_benchmark(cfg)
        assert [(r["n"], r["method"]) for r in rows] == [(200, "full"), (200, "random"),
                                                         (400, "full"), (400, "random")]
        for r in rows:
            assert r["total"] == pytest.approx(r["selection"] + r["fit"] + r["predict"])
            assert 0 <= r["auprc"] <= 1

    def test_too_large_size(self):
        cfg = ExperimentConfig.from_dict({"data": {"n": 50},
                                          "benchmark": {"sizes": [100], "test_n": 10}})
        with pytest.raises(InvalidSpec):
            run_benchmark(cfg)

    def test_empty_sweep_rejected(self):
        cfg = ExperimentConfig.from_dict({"benchmark": {"sizes": []}})
        with pytest.raises(InvalidSpec):
            run_benchmark(cfg)


@pytest.fixture(scope="module")
def poisson_timing():
    d = json.loads((ROOT / "configs" / "poisson_tf.json").read_text())
    cfg = ExperimentConfig.from_dict({**d, "methods": ["random", "greedy", "sa"], "repeats": 1})
    rep = run_experiment(cfg).repeats[0]
    return {t["method"]: t["selection"] for t in rep.timing}


class TestTimingOrder:
    def test_sa_slower_than_random(self, poisson_timing):
        assert poisson_timing["sa"] > poisson_timing["random"]

    @pytest.mark.xfail(reason="greedy on 50 training points makes 455 evidence calls against "
                              "2000 for annealing, so annealing is the slower selector here",
                       strict=True)
    def test_greedy_slower_than_sa(self, poisson_timing):
        assert poisson_timing["greedy"] > poisson_timing["sa"]


@pytest.mark.slow
def test_classification_histogram_mode_near_boundary():
    d = json.loads((ROOT / "configs" / "toy_classification.json").read_text())
    cfg = ExperimentConfig.from_dict({**d, "methods": ["sa"], "repeats": 50})
    hists = [ones_histogram(z) for z in run_experiment(cfg).inducing_sets("sa")]
    # the mode takes the smallest count among ties, as scipy.stats.mode does
    modes = [int(np.argmax(h)) for h in hists]
    lowest = np.mean([4 <= m <= 7 for m in modes])
    any_tied = np.mean([np.any(h[4:8] == h.max()) for h in hists])
    print(f"mode in 4..7 on {lowest:.2f} of seeds ({any_tied:.2f} counting any tied mode)")
    assert lowest >= 0.7
