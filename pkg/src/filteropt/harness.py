"""Experiment orchestration: campaigns, solver ranking, diverse selection.

A campaign pins its library and resolved configuration into the output
directory, runs every (solver, run) cell with seeds derived from the master
seed, records the second-moment baseline candidate, and writes a manifest
of content hashes. Reruns of the same configuration produce byte-identical
artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfigurationError
from .instrument import SimulatorConfig, evaluate
from .metricspace import FilterMetric, MetricContext, explore, lap_metric, metric_for
from .optimizers import OptimizerConfig, RunLog, load_runlog, run_solver, save_runlog
from .seeding import derive_seed, rng_from
from .spectra import FilterLibrary, baseline_selection, generate_library, load_library, save_library
from .stats import mwu_test

__all__ = [
    "ExperimentConfig",
    "DiverseSet",
    "run_campaign",
    "rank_solvers",
    "select_diverse",
    "reevaluate",
    "baseline_candidate",
    "default_d_min",
    "load_campaign_library",
    "save_diverse_set",
    "load_diverse_set",
]

_SALT_CTX = 61
_SALT_RUN = 67
_SALT_EVAL = 71
_SALT_SOLVER_RNG = 73
_SALT_BASELINE = 79
_SALT_REEVAL = 83
_SALT_DMIN = 89

_METRIC_INDEX = {"d1": 1, "d2": 2}


@dataclass(eq=False)
class ExperimentConfig:
    """Parsed experiment configuration (one JSON document)."""

    library_spec: dict
    simulator: SimulatorConfig
    K: int
    solver_specs: list[dict]
    n_runs: int
    master_seed: int
    output_dir: str | None = None
    explore_R: int = 10
    baseline_K_big: int = 10_000

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        sim_doc = dict(doc["simulator"])
        K = int(sim_doc.pop("K"))
        if K < 1:
            raise InvalidConfigurationError("simulator K must be >= 1")
        simulator = SimulatorConfig(**sim_doc)
        n_runs = int(doc.get("n_runs", 1))
        if n_runs < 1:
            raise InvalidConfigurationError("n_runs must be >= 1")
        return cls(
            library_spec=dict(doc["library"]),
            simulator=simulator,
            K=K,
            solver_specs=[dict(s) for s in doc.get("solvers", [])],
            n_runs=n_runs,
            master_seed=int(doc.get("master_seed", 0)),
            output_dir=doc.get("output_dir"),
            explore_R=int(doc.get("explore_R", 10)),
            baseline_K_big=int(doc.get("baseline_K_big", 10_000)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def resolve_library(self) -> FilterLibrary:
        if "path" in self.library_spec:
            return load_library(self.library_spec["path"])
        return generate_library(
            int(self.library_spec["seed"]),
            int(self.library_spec["L"]),
            int(self.library_spec["Q"]),
        )

    def solver_configs(self, lib: FilterLibrary) -> list[tuple[str, OptimizerConfig]]:
        """(label, config) pairs; labels disambiguate repeated algorithms."""
        out = []
        labels = set()
        for spec in self.solver_specs:
            spec = dict(spec)
            label = spec.pop("label", None)
            if "lambda" in spec:
                spec["lambda_"] = spec.pop("lambda")
            cfg = OptimizerConfig(n_genes=self.simulator.M, n_filters=lib.size, **spec)
            if label is None:
                label = cfg.algorithm_id + (f"_{cfg.metric_id}" if cfg.metric_id else "")
            if label in labels:
                raise InvalidConfigurationError(f"duplicate solver label {label!r}")
            labels.add(label)
            out.append((label, cfg))
        return out

    def canonical_dict(self) -> dict:
        return {
            "library": self.library_spec,
            "simulator": {
                "c_star": self.simulator.c_star,
                "photon_noise_alpha": self.simulator.photon_noise_alpha,
                "read_noise_sigma": self.simulator.read_noise_sigma,
                "gain": self.simulator.gain,
                "N": self.simulator.N,
                "M": self.simulator.M,
                "retrieval_iters": self.simulator.retrieval_iters,
                "K": self.K,
            },
            "solvers": self.solver_specs,
            "n_runs": self.n_runs,
            "master_seed": self.master_seed,
            "explore_R": self.explore_R,
            "baseline_K_big": self.baseline_K_big,
        }


def baseline_candidate(lib: FilterLibrary, m: int) -> np.ndarray:
    """Top-m filters by spectral second moment as an m-gene candidate."""
    return np.array(baseline_selection(lib, m), dtype=np.int64)


def explored_contexts(cfg: ExperimentConfig, lib: FilterLibrary) -> dict[str, MetricContext]:
    """One explored context per metric referenced by the solver list."""
    metric_ids = sorted({s.get("metric_id") for s in cfg.solver_specs if s.get("metric_id")})
    return {
        mid: explore(lib, mid, cfg.explore_R, cfg.simulator.M,
                     derive_seed(cfg.master_seed, _SALT_CTX, _METRIC_INDEX[mid]))
        for mid in metric_ids
    }


def _make_objective(cfg: ExperimentConfig, lib: FilterLibrary, run_seed: int):
    """Noisy objective with one fresh sub-seeded stream per evaluation."""
    counter = {"t": 0}

    def objective(genes: np.ndarray) -> float:
        counter["t"] += 1
        stream = derive_seed(run_seed, _SALT_EVAL, counter["t"])
        return evaluate(genes, cfg.K, cfg.simulator, lib, stream).estimate

    return objective


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_campaign(cfg: ExperimentConfig, out_dir: str | Path) -> dict:
    """Execute every (solver, run) cell and return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-probe"
    probe.write_text("")
    probe.unlink()

    lib = cfg.resolve_library()
    artifacts: list[Path] = []

    lib_path = out / "library.json"
    save_library(lib, lib_path)
    artifacts.append(lib_path)

    config_path = out / "config.json"
    config_text = json.dumps(cfg.canonical_dict(), indent=2, sort_keys=True)
    config_path.write_text(config_text)
    artifacts.append(config_path)

    contexts = explored_contexts(cfg, lib)
    if contexts:
        ctx_path = out / "metric_contexts.json"
        ctx_path.write_text(json.dumps(
            {mid: ctx.to_json_dict() for mid, ctx in contexts.items()},
            indent=2, sort_keys=True))
        artifacts.append(ctx_path)

    for si, (label, solver_cfg) in enumerate(cfg.solver_configs(lib)):
        ctx = contexts.get(solver_cfg.metric_id) if solver_cfg.metric_id else None
        for r in range(cfg.n_runs):
            run_seed = derive_seed(cfg.master_seed, _SALT_RUN, si, r)
            objective = _make_objective(cfg, lib, run_seed)
            rng = rng_from(run_seed, _SALT_SOLVER_RNG)
            log = run_solver(solver_cfg, objective, rng, seed=run_seed, ctx=ctx)
            csv_path = out / f"{label}_run{r:02d}.csv"
            save_runlog(log, csv_path)
            artifacts.extend([csv_path, csv_path.with_suffix(".json")])

    base = baseline_candidate(lib, cfg.simulator.M)
    base_k = evaluate(base, cfg.K, cfg.simulator, lib, derive_seed(cfg.master_seed, _SALT_BASELINE, 0))
    base_big = evaluate(base, cfg.baseline_K_big, cfg.simulator, lib,
                        derive_seed(cfg.master_seed, _SALT_BASELINE, 1))
    baseline_path = out / "baseline.json"
    baseline_path.write_text(json.dumps({
        "genes": [int(v) for v in base],
        "K": cfg.K,
        "estimate": base_k.estimate,
        "K_big": cfg.baseline_K_big,
        "estimate_big": base_big.estimate,
    }, indent=2, sort_keys=True))
    artifacts.append(baseline_path)

    config_hash = hashlib.sha256(config_text.encode()).hexdigest()
    manifest = {
        "campaign_id": config_hash[:16],
        "config_hash": config_hash,
        "artifacts": [
            {"path": p.name, "sha": _sha256(p)}
            for p in sorted(artifacts, key=lambda p: p.name)
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def campaign_runlogs(campaign_dir: str | Path, label: str) -> list[RunLog]:
    paths = sorted(Path(campaign_dir).glob(f"{label}_run*.csv"))
    if not paths:
        raise ValueError(f"no run logs for solver {label!r} in {campaign_dir}")
    return [load_runlog(p) for p in paths]


def load_campaign_library(campaign_dir: str | Path) -> FilterLibrary:
    return load_library(Path(campaign_dir) / "library.json")


def rank_solvers(
    finals_by_label: dict[str, np.ndarray],
    bests_by_label: dict[str, list[np.ndarray]],
    reference: str,
    m: int,
    alternative: str = "less",
) -> dict:
    """Rank-test the reference solver's final best-so-far values against
    every competitor, plus a distinct-filter constraint audit per solver."""
    if reference not in finals_by_label:
        raise ValueError(f"reference solver {reference!r} has no logs")
    for label, finals in finals_by_label.items():
        if len(finals) < 2:
            raise ValueError(f"solver {label!r} needs >= 2 runs, got {len(finals)}")
    ref_finals = finals_by_label[reference]
    soft_floor = int(0.75 * m)
    rows = []
    for label in sorted(finals_by_label):
        finals = finals_by_label[label]
        distinct = np.array([len(np.unique(b)) for b in bests_by_label[label]])
        rows.append({
            "solver": label,
            "n_runs": int(len(finals)),
            "median_final_g": float(np.median(finals)),
            "p_value": mwu_test(ref_finals, finals, alternative).p_value,
            "share_distinct_eq_m": float(np.mean(distinct == m)),
            "share_distinct_gt_soft": float(np.mean(distinct > soft_floor)),
        })
    return {
        "reference": reference,
        "alternative": alternative,
        "m": m,
        "soft_floor": soft_floor,
        "rows": rows,
    }


def rank_campaign(campaign_dir: str | Path, reference: str, alternative: str = "less") -> dict:
    """Load a campaign's logs and rank its solvers against `reference`."""
    campaign_dir = Path(campaign_dir)
    labels = sorted({p.name.rsplit("_run", 1)[0] for p in campaign_dir.glob("*_run*.csv")})
    if not labels:
        raise ValueError(f"no run logs found in {campaign_dir}")
    finals, bests, m = {}, {}, None
    for label in labels:
        logs = campaign_runlogs(campaign_dir, label)
        finals[label] = np.array([log.g[-1] for log in logs])
        bests[label] = [log.best_genes for log in logs]
        m = len(logs[0].best_genes)
    return rank_solvers(finals, bests, reference, m, alternative)


@dataclass(eq=False)
class DiverseSet:
    """Greedy maximal set of good-and-mutually-distant candidates."""

    members: list[tuple[np.ndarray, float]]
    d_min: float
    f_max: float
    K: int | None = None

    def genes(self) -> list[np.ndarray]:
        return [g for g, _ in self.members]

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.members])


def select_diverse(
    pool: list[tuple[np.ndarray, float]],
    metric: FilterMetric,
    d_min: float,
    f_max: float,
) -> DiverseSet:
    """Greedily keep candidates in ascending objective order, rejecting any
    whose value exceeds f_max or whose assignment distance to an already
    selected member falls below d_min."""
    if not pool:
        raise ValueError("candidate pool must be nonempty")
    order = sorted(range(len(pool)), key=lambda i: pool[i][1])
    feats = metric.features
    selected: list[tuple[np.ndarray, float]] = []
    selected_sorted: list[np.ndarray] = []
    for i in order:
        genes, value = pool[i]
        if value > f_max:
            continue
        fsorted = np.sort(feats[np.asarray(genes)])
        if selected_sorted:
            dists = np.abs(np.stack(selected_sorted) - fsorted).sum(axis=1)
            if dists.min() < d_min:
                continue
        selected.append((np.asarray(genes, dtype=np.int64), float(value)))
        selected_sorted.append(fsorted)
    return DiverseSet(members=selected, d_min=d_min, f_max=f_max)


def campaign_pool(campaign_dir: str | Path, label: str) -> list[tuple[np.ndarray, float]]:
    """Every evaluated candidate (with its recorded value) across the
    designated solver's runs, in run-then-evaluation order."""
    pool = []
    for log in campaign_runlogs(campaign_dir, label):
        for genes, value in zip(log.candidates, log.f):
            pool.append((genes, float(value)))
    return pool


def default_d_min(lib: FilterLibrary, m: int, seed: int, n_pairs: int = 200) -> float:
    """Half the mean assignment distance between uniform random pairs."""
    metric = metric_for(lib, "d1")
    rng = rng_from(seed, _SALT_DMIN)
    total = 0.0
    for _ in range(n_pairs):
        x = rng.integers(0, lib.size, size=m)
        y = rng.integers(0, lib.size, size=m)
        total += lap_metric(metric, x, y)
    return total / n_pairs / 2.0


def reevaluate(
    ds: DiverseSet,
    k_big: int,
    simulator: SimulatorConfig,
    lib: FilterLibrary,
    seed: int,
) -> DiverseSet:
    """Fresh sample-mean estimates at k_big draws per member, re-sorted."""
    if k_big < 1:
        raise InvalidConfigurationError("k_big must be >= 1")
    fresh = []
    for i, (genes, _) in enumerate(ds.members):
        est = evaluate(genes, k_big, simulator, lib, derive_seed(seed, _SALT_REEVAL, i)).estimate
        fresh.append((genes, float(est)))
    fresh.sort(key=lambda gv: gv[1])
    return DiverseSet(members=fresh, d_min=ds.d_min, f_max=ds.f_max, K=k_big)


def save_diverse_set(ds: DiverseSet, path: str | Path) -> None:
    doc = {
        "d_min": ds.d_min,
        "f_max": ds.f_max,
        "K": ds.K,
        "members": [{"genes": [int(v) for v in g], "value": val} for g, val in ds.members],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def load_diverse_set(path: str | Path) -> DiverseSet:
    doc = json.loads(Path(path).read_text())
    return DiverseSet(
        members=[(np.array(m["genes"], dtype=np.int64), float(m["value"])) for m in doc["members"]],
        d_min=doc["d_min"],
        f_max=doc["f_max"],
        K=doc.get("K"),
    )
