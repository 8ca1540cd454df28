"""Config-driven experiments: data, hyperparameter grids, selection, fit, evaluation."""

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import data as datamod
from .errors import ConfigError, InvalidSpec, MissingInput
from .gp import class_probability, fit_full, grid_search_full, log_evidence, noise_grid, predict_full
from .kernel import FeatureCache, KernelConfig
from .likelihoods import Poisson, make_likelihood
from .metrics import auprc, calibration, calibration_ad, mse, ones_histogram
from .select import SelectionConfig, select_greedy, select_greedy_subset, select_random, select_sa
from .sparse import EvidenceObjective, fit_sparse, sparse_predict

log = logging.getLogger(__name__)

TASKS = ("toy_regression", "toy_classification", "poisson_tf", "uci_promoters", "uci_splice",
         "custom_csv")
DEFAULT_LIKELIHOOD = {
    "toy_regression": "gaussian",
    "toy_classification": "bernoulli",
    "poisson_tf": "poisson",
    "uci_promoters": "bernoulli",
    "uci_splice": "bernoulli",
}
METHODS = ("full", "full_gaussian", "random", "greedy", "greedy_subset", "sa")
SPARSE_METHODS = ("random", "greedy", "greedy_subset", "sa")

RESULT_COLUMNS = (
    "repeat", "seed", "method", "likelihood", "order", "noise", "m", "n_train", "n_test",
    "selection_objective", "log_evidence", "mse", "mse_rates", "auprc", "test_log_likelihood",
    "calibration_ad",
)
METRIC_COLUMNS = ("selection_objective", "log_evidence", "mse", "mse_rates", "auprc",
                  "test_log_likelihood", "calibration_ad")
TIMING_COLUMNS = ("hyper", "selection", "fit", "predict")


def _strict(cls, d, where):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class DataConfig:
    n: int = 100
    length: int = 10
    rate: float = 1.0
    path: str = None
    subsample: int = None  # draw this many records (per repeat) before splitting


@dataclass(frozen=True)
class NoiseConfig:
    low: float = 1e-4
    high: float = 1e1
    num: int = 10
    values: list = None

    def grid(self):
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return noise_grid(self.low, self.high, self.num)


@dataclass(frozen=True)
class SelectionParams:
    m: int = 5
    subset_size: int = 10
    sa_iterations: int = 2000
    T0: float = 1.0
    decay: float = 0.999
    n_chars: int = 1

    def for_method(self, method, seed):
        return SelectionConfig(method, self.m, self.subset_size, self.sa_iterations, self.T0,
                               self.decay, self.n_chars, seed)


@dataclass(frozen=True)
class SplitParams:
    kind: str = "fraction"
    train_fraction: float = 0.6
    folds: int = 10
    train_n: int = None
    test_n: int = None

    def spec(self):
        return datamod.SplitSpec(self.kind, self.train_fraction, self.folds, self.train_n,
                                 self.test_n)


@dataclass(frozen=True)
class BenchmarkParams:
    sizes: list = (200, 400)
    test_n: int = 200
    methods: list = ("full", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "toy_regression"
    likelihood: str = None
    data: DataConfig = field(default_factory=DataConfig)
    kernel_orders: list = (1, 2, 3, 4, 5)
    normalize_kernel: bool = False
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    methods: list = ("full", "random", "greedy", "sa")
    selection: SelectionParams = field(default_factory=SelectionParams)
    split: SplitParams = field(default_factory=SplitParams)
    full_subsample: int = None
    refine_noise: bool = True
    repeats: int = 20
    seed: int = 0
    calibration_bins: int = 10
    histogram_char: str = None
    output: str = "results"
    benchmark: BenchmarkParams = field(default_factory=BenchmarkParams)

    @classmethod
    def from_dict(cls, d, base_dir=None):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        kw = dict(d)
        kw["data"] = _strict(DataConfig, d.get("data"), "data")
        kw["noise"] = _strict(NoiseConfig, d.get("noise"), "noise")
        kw["selection"] = _strict(SelectionParams, d.get("selection"), "selection")
        kw["split"] = _strict(SplitParams, d.get("split"), "split")
        kw["benchmark"] = _strict(BenchmarkParams, d.get("benchmark"), "benchmark")
        for key in ("kernel_orders", "methods"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if kw["data"].path and base_dir is not None and not Path(kw["data"].path).is_absolute():
            kw["data"] = DataConfig(**{**kw["data"].__dict__,
                                       "path": str(Path(base_dir) / kw["data"].path)})
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    @property
    def likelihood_kind(self):
        return self.likelihood or DEFAULT_LIKELIHOOD.get(self.task)

    def validate(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.likelihood_kind not in ("gaussian", "bernoulli", "poisson"):
            raise ConfigError("custom_csv tasks need an explicit likelihood")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown method(s) {bad}; choose from {METHODS}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not self.kernel_orders or any(int(k) != k or k < 1 for k in self.kernel_orders):
            raise ConfigError("kernel_orders must be positive integers")
        if self.task in ("uci_promoters", "uci_splice", "custom_csv"):
            if not self.data.path:
                raise ConfigError(f"task {self.task} needs data.path")
            if not Path(self.data.path).exists():
                raise ConfigError(f"data file not found: {self.data.path}")
        try:
            self.split.spec()
            self.selection.for_method("random", 0)
        except InvalidSpec as exc:
            raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- data


def load_data(cfg, seed):
    """Return ``(dataset, true_rates_or_None)`` for one repeat."""
    d = cfg.data
    rates = None
    if cfg.task == "toy_regression":
        data = datamod.gen_binary_toy(d.n, d.length, seed)[0]
    elif cfg.task == "toy_classification":
        data = datamod.gen_binary_toy(d.n, d.length, seed)[1]
    elif cfg.task == "poisson_tf":
        data, rates = datamod.gen_poisson_tf(d.n, d.length, d.rate, seed)
    else:
        path = Path(d.path)
        if not path.exists():
            raise MissingInput(f"data file not found: {path}")
        if cfg.task == "uci_promoters":
            data = datamod.parse_promoters(path)
        elif cfg.task == "uci_splice":
            data = datamod.parse_splice(path)
        else:
            data = datamod.read_dataset(path)
    if d.subsample is not None and d.subsample < data.n:
        idx = np.sort(np.random.default_rng([seed, 7]).choice(data.n, d.subsample, replace=False))
        data = data.subset(idx)
        rates = None if rates is None else rates[idx]
    return data, rates


def histogram_char(cfg, alphabet):
    if cfg.histogram_char:
        return cfg.histogram_char
    if cfg.task.startswith("toy"):
        return "1"
    if cfg.task == "poisson_tf":
        return "A"
    return None


# ---------------------------------------------------------------- fitting


@dataclass
class MethodOutcome:
    method: str
    order: int
    noise: float
    likelihood: object
    model: object
    inducing: list = None
    trace: object = None
    selection_objective: float = float("nan")
    timing: dict = field(default_factory=dict)


class _Caches:
    """One feature cache per kernel order, shared across methods of a repeat."""

    def __init__(self, normalize):
        self.normalize = normalize
        self._by_order = {}

    def __call__(self, kcfg):
        key = (kcfg.order, kcfg.normalize)
        if key not in self._by_order:
            self._by_order[key] = FeatureCache(kcfg)
        return self._by_order[key]


def _subsample(data, size, seed):
    if size is None or size >= data.n:
        return data
    idx = np.sort(np.random.default_rng([seed, 11]).choice(data.n, size, replace=False))
    return data.subset(idx)


def fit_full_method(train, cfg, lik_kind, seed, caches):
    t0 = time.perf_counter()
    train = _subsample(train, cfg.full_subsample, seed)
    order, s2, _ = grid_search_full(train, lik_kind, cfg.kernel_orders, cfg.noise.grid(), caches)
    t1 = time.perf_counter()
    kcfg = KernelConfig(order, cfg.normalize_kernel)
    lik = make_likelihood(lik_kind, s2)
    model = fit_full(train, kcfg, lik, caches(kcfg))
    t2 = time.perf_counter()
    return MethodOutcome("full", order, s2, lik, model,
                         timing={"hyper": t1 - t0, "selection": 0.0, "fit": t2 - t1})


def _sparse_grid(train, z, lik_kind, orders, noises, normalize, caches):
    best = None
    for order in orders:
        kcfg = KernelConfig(order, normalize)
        grid = noises if lik_kind == "gaussian" else [None]
        for s2 in grid:
            obj = EvidenceObjective(train, kcfg, make_likelihood(lik_kind, s2), caches(kcfg))
            try:
                ev = obj(z)
            except (ArithmeticError, ValueError):
                continue
            if best is None or ev > best[2]:
                best = (order, s2, ev)
    if best is None:
        raise InvalidSpec("no kernel order / noise pair gave a finite sparse evidence")
    return best


def fit_sparse_method(method, train, cfg, lik_kind, seed, caches):
    sel = cfg.selection.for_method(method, seed)
    t0 = time.perf_counter()
    z0 = select_random(train, sel)
    order, s2, _ = _sparse_grid(train, z0, lik_kind, cfg.kernel_orders, cfg.noise.grid(),
                                cfg.normalize_kernel, caches)
    t1 = time.perf_counter()
    kcfg = KernelConfig(order, cfg.normalize_kernel)
    lik = make_likelihood(lik_kind, s2)
    objective = EvidenceObjective(train, kcfg, lik, caches(kcfg))
    trace = None
    if method == "random":
        z = z0
    elif method == "greedy":
        z = select_greedy(train, sel, objective)
    elif method == "greedy_subset":
        z = select_greedy_subset(train, sel, objective)
    else:
        z, trace = select_sa(train, sel, objective, initial=z0)
    sel_obj = objective(z)
    t2 = time.perf_counter()
    if lik_kind == "gaussian" and cfg.refine_noise:
        order, s2, _ = _sparse_grid(train, z, lik_kind, [order], cfg.noise.grid(),
                                    cfg.normalize_kernel, caches)
        lik = make_likelihood(lik_kind, s2)
    t3 = time.perf_counter()
    model = fit_sparse(train, z, kcfg, lik, caches(kcfg))
    t4 = time.perf_counter()
    return MethodOutcome(method, order, s2, lik, model, list(z), trace, sel_obj,
                         {"hyper": (t1 - t0) + (t3 - t2), "selection": t2 - t1, "fit": t4 - t3})


def fit_method(method, train, cfg, seed, caches=None):
    caches = caches if caches is not None else _Caches(cfg.normalize_kernel)
    lik_kind = cfg.likelihood_kind
    if method == "full":
        return fit_full_method(train, cfg, lik_kind, seed, caches)
    if method == "full_gaussian":
        out = fit_full_method(train, cfg, "gaussian", seed, caches)
        out.method = "full_gaussian"
        return out
    return fit_sparse_method(method, train, cfg, lik_kind, seed, caches)


def predict(outcome, test_inputs):
    if outcome.inducing is None:
        return predict_full(outcome.model, test_inputs)
    return sparse_predict(outcome.model, test_inputs)


# ---------------------------------------------------------------- evaluation


@dataclass
class Predictions:
    """Test-set predictions pooled over folds."""

    truth: list = field(default_factory=list)
    point: list = field(default_factory=list)  # regression mean / class prob / rate
    rates: list = field(default_factory=list)
    loglik: float = 0.0


def _accumulate(pred, outcome, post, test, true_rates):
    lik = outcome.likelihood
    y = np.asarray(test.targets, dtype=float)
    pred.truth.append(y)
    pred.loglik += float(np.sum(lik.predictive_log_density(y, post.mean, post.var)))
    if lik.name == "bernoulli":
        pred.point.append(class_probability(post))
    elif lik.name == "poisson":
        pred.point.append(Poisson.rate_mean(post.mean, post.var))
        if true_rates is not None:
            pred.rates.append(true_rates)
    else:
        pred.point.append(post.mean)


def _metrics(pred, lik_name, bins):
    y = np.concatenate(pred.truth)
    p = np.concatenate(pred.point)
    out = {k: float("nan") for k in ("mse", "mse_rates", "auprc", "calibration_ad")}
    out["test_log_likelihood"] = pred.loglik
    curve = None
    if lik_name == "bernoulli":
        if y.sum() > 0:
            out["auprc"] = auprc(p, y)
        curve = calibration(p, y, bins)
        out["calibration_ad"] = calibration_ad(curve)
    else:
        out["mse"] = mse(p, y)
        if pred.rates:
            out["mse_rates"] = mse(p, np.concatenate(pred.rates))
    return out, curve


# ---------------------------------------------------------------- repeats


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    rows: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)  # method -> CalibrationCurve
    inducing: dict = field(default_factory=dict)  # method -> list of inducing sets
    traces: dict = field(default_factory=dict)  # method -> list of AnnealTrace
    timing: list = field(default_factory=list)


def run_repeat(cfg, r):
    seed = cfg.seed + r
    data, rates = load_data(cfg, seed)
    parts = datamod.split_indices(data.n, cfg.split.spec(), seed)
    if cfg.split.kind != "kfold":
        parts = [parts]
    result = RepeatResult(r, seed)
    caches = _Caches(cfg.normalize_kernel)
    for method in cfg.methods:
        pred = Predictions()
        timing = dict.fromkeys(TIMING_COLUMNS, 0.0)
        info = {}
        for tr, te in parts:
            train, test = data.subset(tr), data.subset(te)
            outcome = fit_method(method, train, cfg, seed, caches)
            t0 = time.perf_counter()
            post = predict(outcome, test.inputs)
            timing["predict"] += time.perf_counter() - t0
            for k, v in outcome.timing.items():
                timing[k] += v
            _accumulate(pred, outcome, post, test, None if rates is None else rates[te])
            info.setdefault("order", []).append(outcome.order)
            info.setdefault("noise", []).append(outcome.noise)
            info.setdefault("selection_objective", []).append(outcome.selection_objective)
            info.setdefault("log_evidence", []).append(_model_evidence(outcome))
            info.setdefault("n_train", []).append(train.n)
            info.setdefault("n_test", []).append(test.n)
            if outcome.inducing is not None:
                result.inducing.setdefault(method, []).append(outcome.inducing)
            if outcome.trace is not None:
                result.traces.setdefault(method, []).append(outcome.trace)
        metrics, curve = _metrics(pred, outcome.likelihood.name, cfg.calibration_bins)
        if curve is not None:
            result.curves[method] = curve
        row = {
            "repeat": r, "seed": seed, "method": method, "likelihood": outcome.likelihood.name,
            "order": _single(info["order"]), "noise": _single(info["noise"]),
            "m": cfg.selection.m if method in SPARSE_METHODS else "",
            "n_train": int(np.sum(info["n_train"])), "n_test": int(np.sum(info["n_test"])),
            "selection_objective": float(np.mean(info["selection_objective"])),
            "log_evidence": float(np.mean(info["log_evidence"])),
            **metrics,
        }
        result.rows.append(row)
        result.timing.append({"repeat": r, "method": method, **timing,
                              "total": sum(timing.values())})
    return result


def _model_evidence(outcome):
    model = outcome.model
    if outcome.inducing is None:
        return log_evidence(model)
    return model.log_evidence


def _single(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return ""
    return vals[0] if len(set(vals)) == 1 else ";".join(str(v) for v in vals)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    repeats: list

    @property
    def rows(self):
        return [row for rep in self.repeats for row in rep.rows]

    def method_values(self, method, column):
        return np.array([row[column] for row in self.rows if row["method"] == method], dtype=float)

    def aggregate(self):
        return aggregate_rows(self.rows, self.config.methods)

    def inducing_sets(self, method):
        return [z for rep in self.repeats for z in rep.inducing.get(method, [])]


def aggregate_rows(rows, methods):
    """Mean and standard error (sample std / sqrt(count)) per method and metric."""
    out = []
    for method in methods:
        sel = [r for r in rows if r["method"] == method]
        if not sel:
            continue
        mean_row = {"repeat": "mean", "method": method, "likelihood": sel[0]["likelihood"]}
        se_row = {"repeat": "se", "method": method, "likelihood": sel[0]["likelihood"]}
        for col in METRIC_COLUMNS:
            vals = np.array([r[col] for r in sel], dtype=float)
            if np.all(np.isnan(vals)):
                mean_row[col] = se_row[col] = float("nan")
                continue
            mean_row[col] = float(np.mean(vals))
            se_row[col] = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out += [mean_row, se_row]
    return out


def run_experiment(cfg, threads=1):
    """Run every repeat; results are ordered by repeat regardless of threads."""
    if threads > 1 and cfg.repeats > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            reps = list(pool.map(run_repeat, [cfg] * cfg.repeats, range(cfg.repeats)))
    else:
        reps = [run_repeat(cfg, r) for r in range(cfg.repeats)]
    return ExperimentResult(cfg, reps)


# ---------------------------------------------------------------- output


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    if v is None:
        return ""
    return str(v)


def _write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in columns])


def write_results(result, outdir):
    """Write results, calibration, histogram, trace and timing CSVs.

    Everything except ``timing.csv`` is a deterministic function of the
    config and seed.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    _write_rows(outdir / "results.csv", RESULT_COLUMNS, result.rows + result.aggregate())

    curves = [(rep.repeat, m, rep.curves[m]) for rep in result.repeats for m in cfg.methods
              if m in rep.curves]
    if curves:
        with open(outdir / "calibration.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "repeat", "bin_lo", "bin_hi", "mean_pred", "frac_pos", "count"])
            for repeat, method, curve in curves:
                curve.to_csv(fh, {"method": method, "repeat": repeat})
            for method in cfg.methods:
                pooled = _pool_curves([c for _, m, c in curves if m == method])
                if pooled is not None:
                    pooled.to_csv(fh, {"method": method, "repeat": "all"})

    char = histogram_char(cfg, None)
    hist_rows = []
    if char is not None:
        for method in cfg.methods:
            sets = result.inducing_sets(method)
            if not sets:
                continue
            total = None
            for rep in result.repeats:
                for z in rep.inducing.get(method, []):
                    h = ones_histogram(z, char)
                    hist_rows += [{"method": method, "repeat": rep.repeat, "count": k,
                                   "frequency": int(v)} for k, v in enumerate(h)]
                    total = h if total is None else _add_hist(total, h)
            hist_rows += [{"method": method, "repeat": "all", "count": k, "frequency": int(v)}
                          for k, v in enumerate(total)]
        if hist_rows:
            _write_rows(outdir / "inducing_histogram.csv",
                        ("method", "repeat", "count", "frequency"), hist_rows)

    traces = [(rep.repeat, m, tr) for rep in result.repeats for m in cfg.methods
              for tr in rep.traces.get(m, [])]
    if traces:
        with open(outdir / "trace.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "repeat", "t", "T", "E", "objective", "accepted", "best_so_far"])
            for repeat, method, tr in traces:
                for rec in tr.records:
                    w.writerow([method, repeat, rec.t, _cell(rec.temperature), _cell(rec.energy),
                                _cell(rec.objective), int(rec.accepted), _cell(rec.best_so_far)])

    timing_rows = [t for rep in result.repeats for t in rep.timing]
    _write_rows(outdir / "timing.csv", ("repeat", "method") + TIMING_COLUMNS + ("total",),
                timing_rows)


def _add_hist(a, b):
    n = max(len(a), len(b))
    return np.pad(a, (0, n - len(a))) + np.pad(b, (0, n - len(b)))


def _pool_curves(curves):
    if not curves:
        return None
    counts = sum(c.counts for c in curves)
    pred_sum = sum(np.nan_to_num(c.mean_pred) * c.counts for c in curves)
    pos_sum = sum(np.nan_to_num(c.frac_pos) * c.counts for c in curves)
    with np.errstate(invalid="ignore", divide="ignore"):
        return type(curves[0])(curves[0].edges, pred_sum / counts, pos_sum / counts, counts)


# ---------------------------------------------------------------- benchmark


BENCHMARK_COLUMNS = ("n", "method", "order", "m", "selection", "fit", "predict", "total", "auprc",
                     "mse")


def run_benchmark(cfg):
    """Wall-clock of selection, fit and predict for each training size in the sweep."""
    b = cfg.benchmark
    if cfg.selection.m < 1:
        raise InvalidSpec("benchmark needs m >= 1")
    if not b.sizes:
        raise InvalidSpec("benchmark needs at least one size")
    order = int(cfg.kernel_orders[0])
    kcfg = KernelConfig(order, cfg.normalize_kernel)
    lik_kind = cfg.likelihood_kind
    noise = float(cfg.noise.grid()[len(cfg.noise.grid()) // 2]) if lik_kind == "gaussian" else None
    lik = make_likelihood(lik_kind, noise)
    rows = []
    for n in b.sizes:
        data, _ = load_data(cfg, cfg.seed)
        need = n + b.test_n
        if need > data.n:
            raise InvalidSpec(f"benchmark size {n} + {b.test_n} test points exceeds {data.n}")
        tr, te = datamod.split_indices(data.n, datamod.SplitSpec("fixed", train_n=n,
                                                                 test_n=b.test_n), cfg.seed)
        train, test = data.subset(tr), data.subset(te)
        for method in b.methods:
            cache = FeatureCache(kcfg)
            t0 = time.perf_counter()
            if method == "full":
                t1 = t0
                model = fit_full(train, kcfg, lik, cache)
                t2 = time.perf_counter()
                post = predict_full(model, test.inputs)
                m = ""
            else:
                sel = cfg.selection.for_method(method, cfg.seed)
                if method == "random":
                    z = select_random(train, sel)
                else:
                    # random selection never evaluates the objective
                    objective = EvidenceObjective(train, kcfg, lik, cache)
                    if method == "greedy":
                        z = select_greedy(train, sel, objective)
                    elif method == "greedy_subset":
                        z = select_greedy_subset(train, sel, objective)
                    else:
                        z, _ = select_sa(train, sel, objective)
                t1 = time.perf_counter()
                model = fit_sparse(train, z, kcfg, lik, cache)
                t2 = time.perf_counter()
                post = sparse_predict(model, test.inputs)
                m = sel.m
            t3 = time.perf_counter()
            row = {"n": n, "method": method, "order": order, "m": m, "selection": t1 - t0,
                   "fit": t2 - t1, "predict": t3 - t2, "total": t3 - t0,
                   "auprc": float("nan"), "mse": float("nan")}
            y = np.asarray(test.targets, dtype=float)
            if lik_kind == "bernoulli":
                row["auprc"] = auprc(class_probability(post), y) if y.sum() > 0 else float("nan")
            elif lik_kind == "poisson":
                row["mse"] = mse(Poisson.rate_mean(post.mean, post.var), y)
            else:
                row["mse"] = mse(post.mean, y)
            rows.append(row)
    return rows


def write_benchmark(rows, outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_rows(outdir / "benchmark.csv", BENCHMARK_COLUMNS, rows)


def generate_data(cfg, outdir):
    """Write the dataset of the first repeat (and true rates for count tasks)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    data, rates = load_data(cfg, cfg.seed)
    datamod.write_dataset(data, outdir / "data.csv")
    written = [outdir / "data.csv"]
    if rates is not None:
        with open(outdir / "rates.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sequence", "rate"])
            for x, lam in zip(data.inputs, rates):
                w.writerow([x, repr(float(lam))])
        written.append(outdir / "rates.csv")
    return written
