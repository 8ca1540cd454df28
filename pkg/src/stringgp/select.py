"""Inducing-point selection: random, greedy, greedy over random subsets, annealing.

Every strategy treats the objective as a black box mapping a list of
inducing strings to a float (larger is better), normally
:class:`stringgp.sparse.EvidenceObjective`.
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError

from .domain import perturb
from .errors import InvalidSpec, StringGPError, TooFewPoints

log = logging.getLogger(__name__)

METHODS = ("random", "greedy", "greedy_subset", "sa")


@dataclass(frozen=True)
class SelectionConfig:
    method: str = "sa"
    m: int = 5
    subset_size: int = 10
    sa_iterations: int = 2000
    T0: float = 1.0
    decay: float = 0.999
    n_chars: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidSpec(f"unknown selection method {self.method!r}")
        if self.m < 1:
            raise InvalidSpec("m must be >= 1")
        if self.subset_size < 1:
            raise InvalidSpec("subset_size must be >= 1")
        if not self.T0 > 0:
            raise InvalidSpec("T0 must be positive")
        if not 0 < self.decay < 1:
            raise InvalidSpec("decay must lie in (0, 1)")
        if self.sa_iterations < 0 or self.n_chars < 1:
            raise InvalidSpec("sa_iterations must be >= 0 and n_chars >= 1")


@dataclass
class AnnealRecord:
    t: int
    temperature: float
    energy: float
    objective: float
    accepted: bool
    best_so_far: float


@dataclass
class AnnealTrace:
    records: list = field(default_factory=list)
    initial: list = None
    initial_objective: float = None
    final: list = None
    best: list = None
    best_objective: float = -math.inf

    def to_csv(self, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(["t", "T", "E", "objective", "accepted", "best_so_far"])
            for r in self.records:
                w.writerow([r.t, repr(r.temperature), repr(r.energy), repr(r.objective),
                            int(r.accepted), repr(r.best_so_far)])
        finally:
            if own:
                fh.close()


def _distinct_indices(data):
    seen = {}
    for i, x in enumerate(data.inputs):
        seen.setdefault(x, i)
    return list(seen.values())


def select_random(data, cfg):
    """Uniform draw of ``m`` distinct training strings."""
    pool = _distinct_indices(data)
    if cfg.m > len(pool):
        raise TooFewPoints(f"m={cfg.m} exceeds the {len(pool)} distinct training inputs")
    rng = np.random.default_rng(cfg.seed)
    picked = rng.choice(len(pool), size=cfg.m, replace=False)
    return [data.inputs[pool[i]] for i in picked]


def acceptance_probability(energy, temperature):
    """``min(1, exp(E / T))`` where ``E`` is the objective gain of the proposal."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if energy >= 0:
        return 1.0
    if math.isinf(energy):
        return 0.0
    return math.exp(energy / temperature)


def temperature(t, cfg):
    return cfg.T0 * cfg.decay ** t


def _safe_eval(objective, z):
    try:
        value = float(objective(z))
    except (StringGPError, LinAlgError, FloatingPointError, ValueError) as exc:
        log.info("objective failed on proposal: %s", exc)
        return None
    return value if math.isfinite(value) else None


def select_sa(data, cfg, objective, alphabet=None, initial=None):
    """Simulated annealing over inducing strings anywhere in the domain.

    Starts from :func:`select_random` (or ``initial``), perturbs one
    uniformly chosen inducing string per iteration, and returns the best
    set seen together with the full trace.
    """
    alphabet = alphabet if alphabet is not None else data.alphabet
    rng = np.random.default_rng([cfg.seed, 1])
    z = list(initial) if initial is not None else select_random(data, cfg)
    current = float(objective(z))
    if not math.isfinite(current):
        raise ValueError("objective is not finite on the initial inducing set")
    trace = AnnealTrace(initial=list(z), initial_objective=current, best=list(z),
                        best_objective=current)
    for t in range(cfg.sa_iterations):
        T = temperature(t, cfg)
        j = int(rng.integers(len(z)))
        proposal = list(z)
        proposal[j] = perturb(z[j], alphabet, rng, cfg.n_chars)
        value = _safe_eval(objective, proposal)
        u = rng.random()
        if value is None:
            energy, accepted = -math.inf, False
            value = math.nan
        else:
            energy = value - current
            accepted = u < acceptance_probability(energy, T)
        if accepted:
            z, current = proposal, value
            if value > trace.best_objective:
                trace.best, trace.best_objective = list(z), value
        trace.records.append(AnnealRecord(t, T, energy, value, accepted, trace.best_objective))
    trace.final = list(z)
    return list(trace.best), trace


def _greedy(data, cfg, objective, candidates_for_round, history):
    pool = _distinct_indices(data)
    if cfg.m > len(pool):
        raise TooFewPoints(f"m={cfg.m} exceeds the {len(pool)} distinct training inputs")
    chosen = []
    remaining = list(pool)
    for r in range(cfg.m):
        best = None
        for i in candidates_for_round(remaining):
            value = objective([data.inputs[c] for c in chosen] + [data.inputs[i]])
            # ties go to the lowest index
            if best is None or value > best[0] or (value == best[0] and i < best[1]):
                best = (value, i)
        chosen.append(best[1])
        remaining.remove(best[1])
        if history is not None:
            history.append((r, best[1], best[0]))
    return [data.inputs[i] for i in chosen]


def select_greedy(data, cfg, objective, history=None):
    """Add, m times, the training string whose inclusion maximizes the objective.

    ``history`` (a list) receives ``(round, index, objective)`` tuples.
    """
    return _greedy(data, cfg, objective, lambda remaining: remaining, history)


def select_greedy_subset(data, cfg, objective, history=None):
    """Greedy selection scoring only a fresh random subset of candidates each round."""
    rng = np.random.default_rng([cfg.seed, 2])
    s = cfg.subset_size

    def candidates(remaining):
        if s >= len(remaining):
            return remaining
        picked = rng.choice(len(remaining), size=s, replace=False)
        return [remaining[i] for i in sorted(picked)]

    return _greedy(data, cfg, objective, candidates, history)


def select(data, cfg, objective=None):
    """Dispatch on ``cfg.method``; returns ``(inducing, trace_or_None)``."""
    if cfg.method == "random":
        return select_random(data, cfg), None
    if cfg.method == "greedy":
        return select_greedy(data, cfg, objective), None
    if cfg.method == "greedy_subset":
        return select_greedy_subset(data, cfg, objective), None
    return select_sa(data, cfg, objective)
