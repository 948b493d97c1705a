"""The solver family and its run logs.

All solvers minimize a noisy objective over length-M integer gene vectors,
spend exactly floor(b/lambda)*lambda objective evaluations, and log every
evaluation (value and best-so-far) for the convergence criteria downstream.
Populations are initialized without consuming evaluations: unevaluated
parents carry an infinite value, so the first generation's truncation keeps
only evaluated offspring.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InvalidConfigurationError, SamplingDegeneracyError
from .metricspace import (
    MetricContext,
    build_stepsize_distribution,
    dd_mutation,
    step_to_distance,
)

__all__ = [
    "OptimizerConfig",
    "RunLog",
    "ea_mutate",
    "uniform_crossover",
    "run_ea",
    "run_dd_ea",
    "run_umda",
    "run_umda_u",
    "run_umda_u_pls",
    "run_umda_u_pls_dist",
    "run_solver",
    "save_runlog",
    "load_runlog",
    "ALGORITHMS",
]

Objective = Callable[[np.ndarray], float]

ALGORITHMS = (
    "ea_plus",
    "ea_crossover",
    "dd_ea",
    "umda",
    "umda_u",
    "umda_u_pls",
    "umda_u_pls_dist",
)


@dataclass(frozen=True)
class OptimizerConfig:
    """Solver parameters; the probability floor of the EDA family is
    derived as 1/((L-1)*M), never configured."""

    algorithm_id: str
    n_genes: int
    n_filters: int
    budget_b: int
    mu: int = 10
    lambda_: int = 20
    mutation_rate_r: float = 1.0
    mean_m: float = 0.1
    metric_id: str | None = None
    dd_budget: int = 1000
    dd_offspring: int = 5
    dd_retries: int = 10

    def __post_init__(self):
        if self.algorithm_id not in ALGORITHMS:
            raise InvalidConfigurationError(f"unknown algorithm_id {self.algorithm_id!r}")
        if not 1 <= self.mu <= self.lambda_ <= self.budget_b:
            raise InvalidConfigurationError(
                f"need mu <= lambda <= budget, got mu={self.mu}, lambda={self.lambda_}, b={self.budget_b}"
            )
        if not 0.0 < self.mutation_rate_r <= self.n_genes:
            raise InvalidConfigurationError("mutation rate must lie in (0, M]")
        if self.n_genes < 1 or self.n_filters < 2:
            raise InvalidConfigurationError("need at least 1 gene and 2 filters")

    @property
    def p_min(self) -> float:
        return 1.0 / ((self.n_filters - 1) * self.n_genes)

    def to_json_dict(self) -> dict:
        return {
            "algorithm_id": self.algorithm_id,
            "n_genes": self.n_genes,
            "n_filters": self.n_filters,
            "budget_b": self.budget_b,
            "mu": self.mu,
            "lambda": self.lambda_,
            "mutation_rate_r": self.mutation_rate_r,
            "mean_m": self.mean_m,
            "metric_id": self.metric_id,
            "dd_budget": self.dd_budget,
            "dd_offspring": self.dd_offspring,
            "dd_retries": self.dd_retries,
        }


@dataclass(eq=False)
class RunLog:
    """Per-evaluation trace of one solver run."""

    algorithm_id: str
    seed: int
    f: np.ndarray
    g: np.ndarray
    candidates: np.ndarray
    best_genes: np.ndarray
    best_value: float
    config: dict
    metric_context: dict | None = None

    @property
    def n_evaluations(self) -> int:
        return len(self.f)


class _Recorder:
    """Collects the per-evaluation trace while a solver runs."""

    def __init__(self, objective: Objective):
        self._objective = objective
        self.f: list[float] = []
        self.g: list[float] = []
        self.candidates: list[np.ndarray] = []
        self._best = math.inf

    def __call__(self, genes: np.ndarray) -> float:
        value = float(self._objective(genes))
        self.f.append(value)
        self._best = min(self._best, value)
        self.g.append(self._best)
        self.candidates.append(np.asarray(genes, dtype=np.int64).copy())
        return value

    def finish(self, cfg: OptimizerConfig, seed: int, best_genes: np.ndarray,
               best_value: float, metric_context: dict | None = None) -> RunLog:
        return RunLog(
            algorithm_id=cfg.algorithm_id,
            seed=seed,
            f=np.array(self.f),
            g=np.array(self.g),
            candidates=np.stack(self.candidates),
            best_genes=np.asarray(best_genes, dtype=np.int64),
            best_value=float(best_value),
            config=cfg.to_json_dict(),
            metric_context=metric_context,
        )


def ea_mutate(x: np.ndarray, rate_r: float, n_filters: int, rng: np.random.Generator) -> np.ndarray:
    """Resample k ~ Binomial(M, r/M) components uniformly; k = 0 shifts to 1.

    The replacement draw may repeat the existing value.
    """
    x = np.asarray(x, dtype=np.int64)
    m = len(x)
    if not 0.0 < rate_r <= m:
        raise ValueError(f"mutation rate must lie in (0, M], got {rate_r}")
    k = int(rng.binomial(m, rate_r / m))
    if k == 0:
        k = 1
    positions = rng.choice(m, size=k, replace=False)
    child = x.copy()
    child[positions] = rng.integers(0, n_filters, size=k)
    return child


def uniform_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    p1 = np.asarray(p1, dtype=np.int64)
    p2 = np.asarray(p2, dtype=np.int64)
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    mask = rng.integers(0, 2, size=len(p1)).astype(bool)
    return np.where(mask, p1, p2)


def _truncate(pop, vals, children, child_vals, mu):
    """Elitist survival: mu best of parents + children, stable in
    evaluation order so ties resolve toward the earlier candidate."""
    combined = list(zip(vals + child_vals, pop + children))
    combined.sort(key=lambda vc: vc[0])
    return [c for _, c in combined[:mu]], [v for v, _ in combined[:mu]]


def run_ea(cfg: OptimizerConfig, objective: Objective, rng: np.random.Generator,
           seed: int = 0, crossover: bool = False) -> RunLog:
    """(mu+lambda) EA; with `crossover`, each child first blends two
    uniformly picked parents ((mu/2+lambda) EA)."""
    rec = _Recorder(objective)
    pop = [rng.integers(0, cfg.n_filters, size=cfg.n_genes) for _ in range(cfg.mu)]
    vals = [math.inf] * cfg.mu
    for _ in range(cfg.budget_b // cfg.lambda_):
        children = []
        for _ in range(cfg.lambda_):
            if crossover:
                p1 = pop[int(rng.integers(cfg.mu))]
                p2 = pop[int(rng.integers(cfg.mu))]
                base = uniform_crossover(p1, p2, rng)
            else:
                base = pop[int(rng.integers(cfg.mu))]
            children.append(ea_mutate(base, cfg.mutation_rate_r, cfg.n_filters, rng))
        child_vals = [rec(c) for c in children]
        pop, vals = _truncate(pop, vals, children, child_vals, cfg.mu)
    return rec.finish(cfg, seed, pop[0], vals[0])


def run_dd_ea(cfg: OptimizerConfig, objective: Objective, ctx: MetricContext,
              rng: np.random.Generator, seed: int = 0) -> RunLog:
    """(mu/2+lambda) EA whose mutation steps to a distance drawn from the
    maximum-entropy step-size distribution and mapped through gamma."""
    dist = build_stepsize_distribution(cfg.mean_m)
    rec = _Recorder(objective)
    pop = [rng.integers(0, cfg.n_filters, size=cfg.n_genes) for _ in range(cfg.mu)]
    vals = [math.inf] * cfg.mu
    for _ in range(cfg.budget_b // cfg.lambda_):
        children = []
        for _ in range(cfg.lambda_):
            p1 = pop[int(rng.integers(cfg.mu))]
            p2 = pop[int(rng.integers(cfg.mu))]
            base = uniform_crossover(p1, p2, rng)
            s = float(np.clip(dist.sample(rng), 1e-12, 1.0 - 1e-12))
            target = step_to_distance(s, ctx.gamma)
            children.append(dd_mutation(base, ctx.metric, target, rng,
                                        cfg.dd_budget, cfg.dd_offspring, cfg.dd_retries))
        child_vals = [rec(c) for c in children]
        pop, vals = _truncate(pop, vals, children, child_vals, cfg.mu)
    return rec.finish(cfg, seed, pop[0], vals[0], ctx.to_json_dict())


def _sample_row(row: np.ndarray, rng: np.random.Generator, size=None):
    """Sample filter ids proportionally to clamped probabilities."""
    return rng.choice(len(row), size=size, p=row / row.sum())


def _clamped_frequencies(top: np.ndarray, n_filters: int, p_min: float) -> np.ndarray:
    freq = np.bincount(top.ravel(), minlength=n_filters) / top.size
    return np.clip(freq, p_min, 1.0 - p_min)


def _umda_loop(cfg, objective, rng, seed, sample_generation, update_model, metric_context=None):
    """Shared EDA skeleton: sample lambda, rank, refit, track best-so-far."""
    rec = _Recorder(objective)
    best = rng.integers(0, cfg.n_filters, size=cfg.n_genes)
    best_val = math.inf
    for _ in range(cfg.budget_b // cfg.lambda_):
        cands = sample_generation(rng)
        vals = np.array([rec(c) for c in cands])
        order = np.argsort(vals, kind="stable")
        top = np.stack([cands[k] for k in order[: cfg.mu]])
        update_model(top)
        if best_val >= vals[order[0]]:
            best = cands[order[0]]
            best_val = float(vals[order[0]])
    return rec.finish(cfg, seed, best, best_val, metric_context)


def run_umda(cfg: OptimizerConfig, objective: Objective, rng: np.random.Generator,
             seed: int = 0) -> RunLog:
    """Per-component estimation of distribution over the filter ids."""
    model = np.full((cfg.n_genes, cfg.n_filters), 1.0 / cfg.n_filters)

    def sample_generation(rng):
        cols = [_sample_row(model[i], rng, size=cfg.lambda_) for i in range(cfg.n_genes)]
        return list(np.stack(cols, axis=1))

    def update_model(top):
        for i in range(cfg.n_genes):
            model[i] = _clamped_frequencies(top[:, i], cfg.n_filters, cfg.p_min)

    return _umda_loop(cfg, objective, rng, seed, sample_generation, update_model)


def run_umda_u(cfg: OptimizerConfig, objective: Objective, rng: np.random.Generator,
               seed: int = 0) -> RunLog:
    """One shared filter distribution fitted over all genes of the elite."""
    model = np.full(cfg.n_filters, 1.0 / cfg.n_filters)

    def sample_generation(rng):
        flat = _sample_row(model, rng, size=(cfg.lambda_, cfg.n_genes))
        return list(flat)

    def update_model(top):
        model[:] = _clamped_frequencies(top, cfg.n_filters, cfg.p_min)

    return _umda_loop(cfg, objective, rng, seed, sample_generation, update_model)


def _pls_candidate(model: np.ndarray, cfg: OptimizerConfig, rng: np.random.Generator,
                   distance_weights=None) -> np.ndarray:
    """Sequential no-repeat sampling; with `distance_weights`, genes after
    the first prefer filters far from the ones already chosen."""
    genes = np.empty(cfg.n_genes, dtype=np.int64)
    admissible = np.ones(cfg.n_filters, dtype=bool)
    genes[0] = _sample_row(model, rng)
    admissible[genes[0]] = False
    accumulated = None
    for i in range(1, cfg.n_genes):
        weights = model * admissible
        if distance_weights is not None:
            accumulated = distance_weights(genes[i - 1], accumulated)
            weights = weights * accumulated
        total = weights.sum()
        if total <= 0.0:
            raise SamplingDegeneracyError(f"no admissible filter at position {i}")
        genes[i] = rng.choice(cfg.n_filters, p=weights / total)
        admissible[genes[i]] = False
    return genes


def run_umda_u_pls(cfg: OptimizerConfig, objective: Objective, rng: np.random.Generator,
                   seed: int = 0) -> RunLog:
    """Shared-distribution EDA whose sampling never repeats a filter."""
    if cfg.n_filters < cfg.n_genes:
        raise InvalidConfigurationError("no-repeat sampling needs L >= M")
    model = np.full(cfg.n_filters, 1.0 / cfg.n_filters)

    def sample_generation(rng):
        return [_pls_candidate(model, cfg, rng) for _ in range(cfg.lambda_)]

    def update_model(top):
        model[:] = _clamped_frequencies(top, cfg.n_filters, cfg.p_min)

    return _umda_loop(cfg, objective, rng, seed, sample_generation, update_model)


def run_umda_u_pls_dist(cfg: OptimizerConfig, objective: Objective, ctx: MetricContext,
                        rng: np.random.Generator, seed: int = 0) -> RunLog:
    """No-repeat shared-distribution EDA with distance-weighted conditionals:
    the weight of filter j is proportional to its model probability times
    its summed distance to the genes already placed."""
    if cfg.n_filters < cfg.n_genes:
        raise InvalidConfigurationError("no-repeat sampling needs L >= M")
    model = np.full(cfg.n_filters, 1.0 / cfg.n_filters)
    features = ctx.metric.features

    def distance_weights(last_gene: int, accumulated):
        step = np.abs(features - features[last_gene])
        return step if accumulated is None else accumulated + step

    def sample_generation(rng):
        return [_pls_candidate(model, cfg, rng, distance_weights) for _ in range(cfg.lambda_)]

    def update_model(top):
        model[:] = _clamped_frequencies(top, cfg.n_filters, cfg.p_min)

    return _umda_loop(cfg, objective, rng, seed, sample_generation, update_model,
                      ctx.to_json_dict())


def run_solver(cfg: OptimizerConfig, objective: Objective, rng: np.random.Generator,
               seed: int = 0, ctx: MetricContext | None = None) -> RunLog:
    """Dispatch one seeded run of any registered solver."""
    if cfg.algorithm_id in ("dd_ea", "umda_u_pls_dist") and ctx is None:
        raise InvalidConfigurationError(f"{cfg.algorithm_id} needs an explored MetricContext")
    if cfg.algorithm_id == "ea_plus":
        return run_ea(cfg, objective, rng, seed, crossover=False)
    if cfg.algorithm_id == "ea_crossover":
        return run_ea(cfg, objective, rng, seed, crossover=True)
    if cfg.algorithm_id == "dd_ea":
        return run_dd_ea(cfg, objective, ctx, rng, seed)
    if cfg.algorithm_id == "umda":
        return run_umda(cfg, objective, rng, seed)
    if cfg.algorithm_id == "umda_u":
        return run_umda_u(cfg, objective, rng, seed)
    if cfg.algorithm_id == "umda_u_pls":
        return run_umda_u_pls(cfg, objective, rng, seed)
    if cfg.algorithm_id == "umda_u_pls_dist":
        return run_umda_u_pls_dist(cfg, objective, ctx, rng, seed)
    raise InvalidConfigurationError(f"unknown algorithm_id {cfg.algorithm_id!r}")


def save_runlog(log: RunLog, csv_path: str | Path) -> None:
    """Write the trace as CSV (t, f, g, genes) plus a JSON footer file
    sharing the stem (best candidate, config, metric context)."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "f", "g", "genes"])
        for t in range(log.n_evaluations):
            writer.writerow([
                t + 1,
                repr(float(log.f[t])),
                repr(float(log.g[t])),
                ";".join(str(int(v)) for v in log.candidates[t]),
            ])
    footer = {
        "algorithm_id": log.algorithm_id,
        "seed": log.seed,
        "config": log.config,
        "metric_context": log.metric_context,
        "best": {"genes": [int(v) for v in log.best_genes], "value": log.best_value},
        "n_evaluations": log.n_evaluations,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(footer, indent=2, sort_keys=True))


def load_runlog(csv_path: str | Path) -> RunLog:
    csv_path = Path(csv_path)
    f, g, cands = [], [], []
    with csv_path.open() as fh:
        reader = csv.DictReader(fh)
        expected = {"t", "f", "g", "genes"}
        if set(reader.fieldnames or ()) != expected:
            raise ValueError(f"unexpected run-log columns {reader.fieldnames} in {csv_path}")
        for row in reader:
            f.append(float(row["f"]))
            g.append(float(row["g"]))
            cands.append([int(v) for v in row["genes"].split(";")])
    footer = json.loads(csv_path.with_suffix(".json").read_text())
    return RunLog(
        algorithm_id=footer["algorithm_id"],
        seed=footer["seed"],
        f=np.array(f),
        g=np.array(g),
        candidates=np.array(cands, dtype=np.int64),
        best_genes=np.array(footer["best"]["genes"], dtype=np.int64),
        best_value=footer["best"]["value"],
        config=footer["config"],
        metric_context=footer["metric_context"],
    )
