"""Batch command-line front end.

Commands: cluster (CSV in, JSON report + optional SVG out), simulate
(write a bundled layout to CSV), game (solve one preset, export the
utility landscape), sweep (weight or wall-level grids with an aggregate
CSV), eta (Manhattan radius for given moments).

Exit codes: 0 success, 2 validation error, 3 runtime degeneracy
(singular geometry, grid budget). Reports are byte-deterministic for a
fixed (input, config, seed); wall-clock timing goes to timing.json.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .core import AdclustParams, adclust
from .dataset import ingest_csv, read_truth_csv, write_csv
from .errors import (DegenerateGeometryError, DegenerateRegionError,
                     GridBudgetError, ValidationError)
from .game import solve_game
from .report import (build_cluster_report, build_game_report, cluster_metrics,
                     dump_json, render_svg, write_landscape_csv,
                     write_sweep_csv, write_timing)
from .synthetic import (game_names, game_preset, simulation_names,
                        simulation_preset)
from .walls import eta_of_alpha, stats_from_moments

WEIGHT_GRID = (1.0, 10.0, 30.0, 50.0, 100.0)
WALL_ALPHA_GRID = (0.6, 0.7, 0.8, 0.9, 0.95)
WALL_K_GRID = (1.0, 30.0, 50.0)

_PARAM_FIELDS = {
    "k": float, "alpha": float, "wall_kind": str, "coef_rt": float,
    "coef_dt": float, "target_fraction": float, "seed": int,
    "bandwidth": float, "log_base": float, "exact_density": bool,
    "min_wall_size": int, "eta_sample_size": int,
}
_GAME_FIELDS = {
    "alpha_step": float, "t_step": float, "joint_t_step": float,
    "joint_budget": int, "eta_sample_size": int, "cost_c": float,
    "sample_size": int,
}


def _read_config(path: str, section: str, fields: dict) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValidationError(f"cannot read config {path}")
    if section not in parser:
        return {}
    out = {}
    for key, raw in parser[section].items():
        if key not in fields:
            raise ValidationError(f"unknown config key {key!r} in [{section}]")
        caster = fields[key]
        if caster is bool:
            out[key] = parser[section].getboolean(key)
        else:
            try:
                out[key] = caster(raw)
            except ValueError:
                raise ValidationError(
                    f"config key {key!r}: cannot parse {raw!r}") from None
    return out


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _params_from_args(args, overrides: dict) -> AdclustParams:
    fields = dict(overrides)
    for name in ("k", "alpha", "seed", "coef_rt", "coef_dt", "bandwidth",
                 "target_fraction", "min_wall_size"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if getattr(args, "wall", None) is not None:
        fields["wall_kind"] = args.wall
    return AdclustParams(**fields)


def _cmd_cluster(args) -> int:
    overrides = {}
    if args.config:
        overrides = _read_config(args.config, "cluster", _PARAM_FIELDS)
    params = _params_from_args(args, overrides)
    dataset, info = ingest_csv(args.input, label_column=args.label_column,
                               label_fraction=args.label_fraction,
                               seed=params.seed)
    truth = info.truth
    if args.truth:
        truth = read_truth_csv(args.truth)
        if truth.shape[0] != dataset.n:
            raise ValidationError(
                f"truth rows ({truth.shape[0]}) do not match dataset rows "
                f"({dataset.n})")

    start = time.perf_counter()
    result = adclust(dataset, params)
    elapsed = time.perf_counter() - start

    out = _ensure_out(args.out)
    command = {"command": "cluster", "input": os.path.basename(args.input),
               "label_column": args.label_column,
               "label_fraction": args.label_fraction,
               "dropped_rows": list(info.dropped_rows),
               "retained_labels": info.retained_label_count}
    rep = build_cluster_report(dataset, result, truth, command)
    dump_json(rep, os.path.join(out, "report.json"))
    write_timing(out, elapsed)
    if dataset.q == 2:
        svg = render_svg(dataset.points, result.composition.region,
                         result.walls)
        with open(os.path.join(out, "regions.svg"), "w") as fh:
            fh.write(svg)
    else:
        print(f"plotting requires q=2 (input has q={dataset.q}); "
              "metrics-only report written")
    counts = result.composition.region_counts()
    summary = ", ".join(f"{k}={v}" for k, v in counts.items())
    print(f"rt={result.thresholds.rt:.6g} dt={result.thresholds.dt:.6g} "
          f"walls={len(result.walls)}")
    print(summary)
    print(f"report: {os.path.join(out, 'report.json')}")
    return 0


def _cmd_simulate(args) -> int:
    dataset, truth, _ = simulation_preset(args.preset, seed=args.seed)
    out_path = args.out
    parent = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(parent, exist_ok=True)
    write_csv(out_path, dataset)
    stem, ext = os.path.splitext(out_path)
    truth_path = f"{stem}.truth{ext or '.csv'}"
    write_csv(truth_path, dataset, labels=truth)
    print(f"dataset: {out_path}")
    print(f"truth:   {truth_path}")
    return 0


def _cmd_game(args) -> int:
    overrides = {}
    if args.config:
        overrides = _read_config(args.config, "game", _GAME_FIELDS)
    config_samples = overrides.pop("sample_size", 10_000)
    sample_size = args.samples if args.samples is not None else config_samples
    config = game_preset(args.preset, wall_kind=args.wall, seed=args.seed,
                         sample_size=sample_size)
    for key, value in overrides.items():
        setattr(config, key, value)

    start = time.perf_counter()
    eq, tables = solve_game(config, args.orientation)
    elapsed = time.perf_counter() - start

    out = _ensure_out(args.out)
    command = {"command": "game", "preset": args.preset,
               "orientation": args.orientation, "samples": sample_size}
    rep = build_game_report(eq, tables, command)
    dump_json(rep, os.path.join(out, "report.json"))
    write_landscape_csv(os.path.join(out, "landscape.csv"), tables)
    write_timing(out, elapsed)
    ts = ", ".join(f"{t:g}" for t in eq.t)
    print(f"{args.preset} {args.orientation}: alpha={eq.alpha:g} "
          f"t=({ts}) defender={eq.defender_utility:.4f}")
    print(f"report: {os.path.join(out, 'report.json')}")
    return 0


def _sweep_run(task: dict) -> dict:
    """One grid point; top-level so process pools can pickle it."""
    if task["preset"] is not None:
        dataset, truth, params = simulation_preset(
            task["preset"], seed=task["seed"], k=task["k"],
            alpha=task["alpha"], wall_kind=task["wall_kind"])
    else:
        dataset, info = ingest_csv(task["input"],
                                   label_column=task["label_column"],
                                   label_fraction=task["label_fraction"],
                                   seed=task["seed"])
        truth = info.truth if info.truth is not None else task["truth"]
        params = AdclustParams(k=task["k"], alpha=task["alpha"],
                               wall_kind=task["wall_kind"], seed=task["seed"],
                               **task["overrides"])
    result = adclust(dataset, params)
    metrics = cluster_metrics(dataset.points, result, truth)
    command = {"command": "sweep", "kind": task["kind"], "k": task["k"],
               "alpha": task["alpha"], "run": task["run"]}
    rep = build_cluster_report(dataset, result, truth, command)
    row = {
        "k": task["k"], "alpha": task["alpha"], "seed": task["seed"],
        "run": task["run"],
        "mixed_count": metrics["region_counts"]["mixed_overlap"],
        "outlier_count": metrics["region_counts"]["outlier"],
        "mixed_plus_outliers": metrics["mixed_plus_outliers"],
        "abnormal_fraction_mixed": metrics["abnormal_fraction_mixed"],
        "wall_purity": metrics["wall_purity"],
        "wall_count": metrics["wall_count"],
    }
    return {"row": row, "report": rep,
            "name": f"report_k{task['k']:g}_a{task['alpha']:g}"
                    f"_r{task['run']}.json"}


_SWEEP_COLUMNS = ["k", "alpha", "seed", "run", "mixed_count", "outlier_count",
                  "mixed_plus_outliers", "abnormal_fraction_mixed",
                  "wall_purity", "wall_count"]


def _cmd_sweep(args) -> int:
    overrides = {}
    if args.config:
        overrides = _read_config(args.config, "cluster", _PARAM_FIELDS)
    overrides.pop("k", None)
    overrides.pop("alpha", None)
    overrides.pop("seed", None)
    overrides.pop("wall_kind", None)

    if (args.preset is None) == (args.input is None):
        raise ValidationError("exactly one of --preset / --input is required")
    truth = None
    if args.truth:
        truth = read_truth_csv(args.truth)

    if args.kind == "weight":
        grid = [(k, args.alpha) for k in WEIGHT_GRID]
    else:
        grid = [(k, a) for a in WALL_ALPHA_GRID for k in WALL_K_GRID]

    tasks = []
    for run in range(args.runs):
        for k, alpha in grid:
            tasks.append({
                "kind": args.kind, "k": k, "alpha": alpha,
                "seed": args.seed + run, "run": run,
                "preset": args.preset, "input": args.input,
                "label_column": args.label_column,
                "label_fraction": args.label_fraction,
                "truth": truth, "wall_kind": args.wall,
                "overrides": overrides,
            })

    start = time.perf_counter()
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_sweep_run, tasks))
    else:
        outcomes = [_sweep_run(t) for t in tasks]
    elapsed = time.perf_counter() - start

    out = _ensure_out(args.out)
    rows = [o["row"] for o in outcomes]
    order = sorted(range(len(rows)),
                   key=lambda i: (rows[i]["run"], rows[i]["alpha"],
                                  rows[i]["k"]))
    write_sweep_csv(os.path.join(out, "aggregate.csv"),
                    [rows[i] for i in order], _SWEEP_COLUMNS)
    for i in order:
        dump_json(outcomes[i]["report"],
                  os.path.join(out, outcomes[i]["name"]))
    write_timing(out, elapsed)
    print(f"{len(tasks)} runs -> {os.path.join(out, 'aggregate.csv')}")
    return 0


def _cmd_eta(args) -> int:
    with open(args.stats) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.stats}: invalid JSON: {exc}") from None
    try:
        mean = np.asarray(payload["mean"], dtype=np.float64)
        cov = np.asarray(payload["covariance"], dtype=np.float64)
    except KeyError as exc:
        raise ValidationError(
            f"{args.stats}: missing field {exc.args[0]!r}") from None
    stats = stats_from_moments(mean, cov)
    eta = eta_of_alpha(stats, args.alpha, sample_size=args.samples,
                       seed=args.seed)
    print(f"{eta!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adclust",
        description="Grid-density clustering with defensive walls and "
                    "wall-sizing games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a CSV and write a report")
    p.add_argument("--input", required=True, help="feature CSV")
    p.add_argument("--label-column", default="label")
    p.add_argument("--label-fraction", type=float, default=None,
                   help="keep labels on this fraction of labeled rows")
    p.add_argument("--truth", default=None,
                   help="CSV with ground-truth labels for metrics")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--wall", choices=("euclidean", "manhattan"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--coef-rt", dest="coef_rt", type=float, default=None)
    p.add_argument("--coef-dt", dest="coef_dt", type=float, default=None)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--target-fraction", dest="target_fraction", type=float,
                   default=None)
    p.add_argument("--min-wall-size", dest="min_wall_size", type=int,
                   default=None)
    p.add_argument("--config", default=None, help="INI file, [cluster] section")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("simulate", help="write a bundled layout to CSV")
    p.add_argument("--preset", required=True, choices=simulation_names())
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("game", help="solve a wall-sizing game preset")
    p.add_argument("--preset", required=True, choices=game_names())
    p.add_argument("--orientation", required=True,
                   choices=("leader", "follower"))
    p.add_argument("--wall", choices=("euclidean", "manhattan"),
                   default="euclidean")
    p.add_argument("--seed", type=int, default=54)
    p.add_argument("--samples", type=int, default=None,
                   help="Monte-Carlo sample size per population")
    p.add_argument("--config", default=None, help="INI file, [game] section")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_game)

    p = sub.add_parser("sweep", help="weight or wall-level grid of runs")
    p.add_argument("--kind", required=True, choices=("weight", "wall"))
    p.add_argument("--preset", choices=simulation_names(), default=None)
    p.add_argument("--input", default=None, help="feature CSV")
    p.add_argument("--label-column", default="label")
    p.add_argument("--label-fraction", type=float, default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--alpha", type=float, default=0.6,
                   help="wall level for weight sweeps")
    p.add_argument("--wall", choices=("euclidean", "manhattan"),
                   default="euclidean")
    p.add_argument("--runs", type=int, default=1,
                   help="seeded repetitions of the grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="INI file, [cluster] section")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("eta", help="Manhattan radius for given moments")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--stats", required=True,
                   help="JSON file with mean and covariance")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eta)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateGeometryError, DegenerateRegionError,
            GridBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
