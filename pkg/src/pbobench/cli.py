"""``pbobench`` command line: run experiments, analyze datasets, list, targets.

Exit status: 0 success, 1 configuration or input error, 2 some cells failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from pbobench import analyzer as an
from pbobench.algorithms import ALGORITHM_NAMES, ALGORITHM_SLUGS, canonical_name, parameter_channels
from pbobench.experimenter import ExperimentConfig, run_experiment
from pbobench.problems.functions import FUNCTION_NAMES
from pbobench.problems.targets import target_table

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def parse_int_list(text: str) -> list[int]:
    """``"1-6,11-13,15"`` -> ``[1, ..., 6, 11, 12, 13, 15]``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(v) for v in part.split("-", 1))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _int_list(text: str) -> list[int]:
    try:
        return parse_int_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _name_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _default_out() -> str:
    return os.environ.get("BENCH_OUT", "bench-out")


def _default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# --------------------------------------------------------------------- run

def _build_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config).to_json()
    else:
        cfg = ExperimentConfig(out_dir=_default_out()).to_json()
    overrides = {
        "algorithms": args.algo,
        "fids": args.fid,
        "dims": args.dim,
        "iids": args.iid,
        "master_seed": args.seed,
        "repetitions": args.reps,
        "extra_iid1_runs": args.extra_iid1,
        "budget": args.budget,
        "log_mode": args.log_mode,
        "out_dir": args.out,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if args.config and args.out is None and "BENCH_OUT" in os.environ:
        cfg["out_dir"] = os.environ["BENCH_OUT"]
    return ExperimentConfig.from_json(cfg)


def cmd_run(args) -> int:
    try:
        config = _build_config(args)
    except (ValueError, TypeError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG

    def progress(cell):
        if cell["status"] == "ok":
            print(f"ok    {cell['alg']} F{cell['fid']} D{cell['dim']}: {cell['runs']} runs", flush=True)
        else:
            print(f"FAIL  {cell['alg']} F{cell['fid']} D{cell['dim']}: {cell['error']}", flush=True)

    try:
        out = run_experiment(config, jobs=args.jobs, progress=None if args.quiet else progress)
    except OSError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    runs = sum(c["runs"] for c in manifest["cells"])
    failed = manifest["failed_cells"]
    print(f"{runs} runs in {len(manifest['cells'])} cells written to {out} ({failed} failed cells)")
    return EXIT_PARTIAL if failed else EXIT_OK


# ----------------------------------------------------------------- analyze

def _load(args):
    path = Path(args.data)
    if not path.is_dir():
        raise ValueError(f"dataset directory {path} does not exist")
    ds = an.load_dataset(path)
    for w in ds.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return ds


def _cells(ds, fids, dims):
    cells = [c for c in ds.cells if (fids is None or c[0] in fids) and (dims is None or c[1] in dims)]
    if not cells:
        raise ValueError("no matching (fid, dim) cells in the dataset")
    return cells


def _algs(ds, algo):
    if algo is None:
        return ds.algorithms
    return [canonical_name(a) for a in algo]


def _budget_grid(ds, cells, points: int = 60) -> list[int]:
    top = max(r.budget for r in ds.runs if r.cell in set(cells))
    grid = np.unique(np.round(np.geomspace(1, top, points)).astype(np.int64))
    return [int(t) for t in grid]


def _targets(ds, fid, dim, spec):
    if spec is None or spec == ["best-found"]:
        return [ds.best_found(fid, dim)]
    values = []
    for item in spec:
        values.append(ds.best_found(fid, dim) if item == "best-found" else float(item))
    return sorted(values)


def analyze_ert(args, ds):
    rows = []
    for fid, dim in _cells(ds, args.fid, args.dim):
        tg = _targets(ds, fid, dim, args.target)
        for alg in _algs(ds, args.algo):
            runs = ds.select(alg=alg, fid=fid, dim=dim)
            if runs:
                rows.extend((alg, fid, dim, e) for e in an.fixed_target_curve(runs, tg))
    return an.write_ert_csv(args.output or "ert.csv", rows)


def analyze_ecdf(args, ds):
    cells = _cells(ds, args.fid, args.dim)
    budgets = args.budgets or _budget_grid(ds, cells)
    curves = an.compute_ecdf(ds, cells, budgets, _algs(ds, args.algo))
    return an.write_ecdf_csv(args.output or "ecdf.csv", curves)


def analyze_fixed_budget(args, ds):
    rows = []
    for fid, dim in _cells(ds, args.fid, args.dim):
        budgets = args.budgets or _budget_grid(ds, [(fid, dim)])
        for alg in _algs(ds, args.algo):
            runs = ds.select(alg=alg, fid=fid, dim=dim)
            if runs:
                rows.extend((alg, fid, dim, t, len(runs), m) for t, m in an.fixed_budget_curve(runs, budgets))
    return an.write_fixed_budget_csv(args.output or "fixed_budget.csv", rows)


def analyze_rank(args, ds):
    dims = args.dim or sorted({r.dim for r in ds.runs})
    rows = [row for d in dims for row in an.hitting_rank(ds, d)]
    return an.write_rank_csv(args.output or "hitting_rank.csv", rows)


def _parse_groups(text):
    if text is None:
        return None
    groups = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        name, _, ids = part.partition("=")
        if not ids:
            name, ids = name, name
        groups[name.strip()] = parse_int_list(ids)
    return groups


def analyze_groups(args, ds):
    groups = _parse_groups(args.groups)
    rows = []
    for fid, dim in _cells(ds, args.fid, args.dim):
        for alg in _algs(ds, args.algo):
            if ds.select(alg=alg, fid=fid, dim=dim):
                rows.extend(an.instance_group_summary(ds, alg, fid, dim, groups))
    return an.write_groups_csv(args.output or "instance_groups.csv", rows)


_ANALYSES = {
    "ert": analyze_ert,
    "ecdf": analyze_ecdf,
    "fixed-budget": analyze_fixed_budget,
    "rank": analyze_rank,
    "groups": analyze_groups,
}


def cmd_analyze(args) -> int:
    try:
        ds = _load(args)
        path = _ANALYSES[args.analysis](args, ds)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print(f"wrote {path}")
    return EXIT_OK


# ------------------------------------------------------------ list/targets

def cmd_list(args) -> int:
    if args.what in ("algorithms", "all"):
        print("name,slug,channels")
        for name in ALGORITHM_NAMES:
            print(f"{name},{ALGORITHM_SLUGS[name]},{' '.join(parameter_channels(name))}")
    if args.what == "all":
        print()
    if args.what in ("functions", "all"):
        print("fid,name")
        for fid, name in FUNCTION_NAMES.items():
            print(f"{fid},{name}")
    return EXIT_OK


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and v.is_integer() and not math.isinf(v):
        return str(int(v))
    return repr(v)


def cmd_targets(args) -> int:
    rows = target_table(args.dim)
    published = any(r["published"] is not None for r in rows)
    print("fid,name,optimum" + (",table_target" if published else ""))
    for r in rows:
        line = f"{r['fid']},{FUNCTION_NAMES[r['fid']]},{_cell(r['optimum'])}"
        if published:
            line += f",{_cell(r['published'])}"
        print(line)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pbobench", description="Pseudo-Boolean benchmark runner and analyzer.")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run an experiment grid")
    r.add_argument("--config", help="JSON config file (format 1)")
    r.add_argument("--algo", type=_name_list, help="comma-separated algorithm names")
    r.add_argument("--fid", type=_int_list, help="function ids, e.g. 1-6,11")
    r.add_argument("--dim", type=_int_list, help="dimensions")
    r.add_argument("--iid", type=_int_list, help="instance ids")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--reps", type=int, help="repetitions per instance")
    r.add_argument("--extra-iid1", type=int, dest="extra_iid1", help="additional runs on instance 1")
    r.add_argument("--budget", type=int, help="evaluation budget for every dimension")
    r.add_argument("--log-mode", choices=("delta", "full"), dest="log_mode")
    r.add_argument("--out", help="output directory (default: $BENCH_OUT or bench-out)")
    r.add_argument("--jobs", type=int, default=_default_jobs(), help="parallel worker processes")
    r.add_argument("--quiet", action="store_true", help="only print the final summary")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="compute statistics from a dataset")
    a.add_argument("analysis", choices=sorted(_ANALYSES))
    a.add_argument("--data", required=True, help="dataset directory")
    a.add_argument("--fid", "--fids", type=_int_list, dest="fid")
    a.add_argument("--dim", "--dims", type=_int_list, dest="dim")
    a.add_argument("--algo", type=_name_list)
    a.add_argument("--target", type=_name_list, help="target values or best-found")
    a.add_argument("--budgets", type=_int_list, help="evaluation counts for ecdf/fixed-budget")
    a.add_argument("--groups", help="instance groups, e.g. '1=1;xor=2-6;perm=51-55'")
    a.add_argument("--output", "-o", help="CSV path (default: <analysis>.csv)")
    a.add_argument("--format", choices=("csv",), default="csv")
    a.set_defaults(func=cmd_analyze)

    ls = sub.add_parser("list", help="list algorithms and functions")
    ls.add_argument("what", nargs="?", choices=("algorithms", "functions", "all"), default="all")
    ls.set_defaults(func=cmd_list)

    t = sub.add_parser("targets", help="analytic optima and published targets per function")
    t.add_argument("--dim", type=int, required=True)
    t.add_argument("--format", choices=("csv",), default="csv")
    t.set_defaults(func=cmd_targets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for partial failures
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
