"""Command-line interface.

Verbs: generate-library, run, rank, neighborhood, select, reevaluate,
precision. Campaign-scale verbs read one JSON experiment config; artifact
verbs work directly on campaign output directories.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    ExperimentConfig,
    campaign_pool,
    default_d_min,
    load_campaign_library,
    load_diverse_set,
    rank_campaign,
    reevaluate,
    run_campaign,
    save_diverse_set,
    select_diverse,
)
from .instrument import draw_d_samples
from .metricspace import explore, metric_for, precision_experiment
from .seeding import derive_seed
from .spectra import generate_library, save_library
from .stats import neighborhood_experiment, save_neighborhood_report


def _cmd_generate_library(args) -> int:
    lib = generate_library(args.seed, args.L, args.Q)
    save_library(lib, args.out)
    print(f"wrote library of {lib.size} filters on {lib.grid.q_count} samples to {args.out}")
    return 0


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.master_seed = args.seed
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    out = args.out or cfg.output_dir
    if out is None:
        print("no output directory: pass --out or set output_dir in the config", file=sys.stderr)
        return 2
    manifest = run_campaign(cfg, out)
    print(f"campaign {manifest['campaign_id']}: {len(manifest['artifacts'])} artifacts in {out}")
    return 0


def _cmd_rank(args) -> int:
    table = rank_campaign(args.campaign, args.reference, args.alternative)
    text = json.dumps(table, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


def _cmd_neighborhood(args) -> int:
    cfg = _load_config(args)
    lib = cfg.resolve_library()
    ctx = None
    if args.metric != "hamming":
        ctx = explore(lib, args.metric, cfg.explore_R, cfg.simulator.M,
                      derive_seed(cfg.master_seed, 61, 1 if args.metric == "d1" else 2))
    report = neighborhood_experiment(
        lib, cfg.simulator, args.K, args.metric, args.n, cfg.master_seed, ctx)
    save_neighborhood_report(report, args.out)
    print(f"{args.metric}: rejected {100 * report.rejection_fraction:.1f}% of {args.n}x{args.n} "
          f"cells at threshold {report.threshold:.2e}")
    return 0


def _cmd_select(args) -> int:
    lib = load_campaign_library(args.campaign)
    baseline = json.loads((Path(args.campaign) / "baseline.json").read_text())
    cfg_doc = json.loads((Path(args.campaign) / "config.json").read_text())
    m = cfg_doc["simulator"]["M"]
    master_seed = cfg_doc["master_seed"]
    d_min = args.d_min if args.d_min is not None else default_d_min(lib, m, master_seed)
    f_max = args.f_max if args.f_max is not None else baseline["estimate_big"] / 4.0
    pool = campaign_pool(args.campaign, args.solver)
    ds = select_diverse(pool, metric_for(lib, "d1"), d_min, f_max)
    save_diverse_set(ds, args.out)
    print(f"selected {len(ds.members)} of {len(pool)} candidates "
          f"(d_min={d_min:.4g}, f_max={f_max:.4g}) -> {args.out}")
    return 0


def _cmd_reevaluate(args) -> int:
    cfg = _load_config(args)
    lib = cfg.resolve_library()
    ds = load_diverse_set(args.infile)
    fresh = reevaluate(ds, args.k_big, cfg.simulator, lib, cfg.master_seed)
    save_diverse_set(fresh, args.out)
    print(f"reevaluated {len(fresh.members)} members at K={args.k_big} -> {args.out}")
    if args.samples_out:
        from .harness import baseline_candidate

        doc = {}
        if fresh.members:
            top = fresh.members[0][0]
            doc["samples"] = draw_d_samples(
                top, args.k_big, cfg.simulator, lib,
                derive_seed(cfg.master_seed, 97, 0)).tolist()
        base = baseline_candidate(lib, cfg.simulator.M)
        doc["baseline_samples"] = draw_d_samples(
            base, args.k_big, cfg.simulator, lib,
            derive_seed(cfg.master_seed, 97, 1)).tolist()
        Path(args.samples_out).write_text(json.dumps(doc))
        print(f"wrote deviation samples to {args.samples_out}")
    return 0


def _cmd_precision(args) -> int:
    cfg = _load_config(args)
    lib = cfg.resolve_library()
    ctx = explore(lib, args.metric, cfg.explore_R, cfg.simulator.M,
                  derive_seed(cfg.master_seed, 61, 1 if args.metric == "d1" else 2))
    summary = precision_experiment(ctx, cfg.simulator.M, args.grid, args.repeats,
                                   seed=cfg.master_seed)
    doc = {
        "metric_id": args.metric,
        "step_sizes": summary.step_sizes.tolist(),
        "distances": summary.distances.tolist(),
        "mean_deviation": summary.mean_deviation.tolist(),
        "median_of_means": summary.median_of_means,
        "max_of_means": float(np.max(summary.mean_deviation)),
    }
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True))
    print(f"{args.metric}: median of per-target means {summary.median_of_means:.2e}, "
          f"max {doc['max_of_means']:.2e} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filteropt",
                                     description="Filter-selection optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-library", help="write a pinned synthetic library")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--L", type=int, default=200, help="number of filters")
    p.add_argument("--Q", type=int, default=256, help="grid samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate_library)

    p = sub.add_parser("run", help="run a full campaign from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("rank", help="rank campaign solvers against a reference")
    p.add_argument("--campaign", required=True, help="campaign output directory")
    p.add_argument("--reference", required=True, help="reference solver label")
    p.add_argument("--alternative", choices=["less", "two_sided"], default="less")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("neighborhood", help="neighborhood flatness experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--metric", choices=["hamming", "d1", "d2"], default="d1")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--K", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=_cmd_neighborhood)

    p = sub.add_parser("select", help="greedy diverse selection from a campaign pool")
    p.add_argument("--campaign", required=True)
    p.add_argument("--solver", required=True, help="solver label whose runs form the pool")
    p.add_argument("--d-min", type=float, default=None)
    p.add_argument("--f-max", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("reevaluate", help="reestimate a diverse set at large K")
    p.add_argument("--config", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k-big", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples-out", default=None,
                   help="also dump raw deviation draws of the top member and baseline")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reevaluate)

    p = sub.add_parser("precision", help="mutation precision sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--metric", choices=["d1", "d2"], default="d1")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_precision)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
