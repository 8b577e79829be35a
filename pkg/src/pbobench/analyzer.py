"""Dataset loading and performance statistics.

Everything is computed in raw (untransformed) function-value space from the
``raw_y_best`` column of the dat files. Because the logs are best-so-far
traces, a run reaches target ``v`` at the first logged evaluation whose
``raw_y_best >= v``, and its best value after ``t`` evaluations is the last
logged ``raw_y_best`` at an evaluation count ``<= t``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from pbobench.algorithms import ALGORITHM_NAMES
from pbobench.records import LOG_COLUMNS

QUANTILE_METHOD = "linear"  # type 7: numpy's default interpolation
DEFAULT_GROUPS = {"1": (1,), "2-6": (2, 3, 4, 5, 6), "51-55": (51, 52, 53, 54, 55)}

_INFO_KEYS = (
    "alg", "fid", "dim", "iid", "rep", "seed", "budget", "evals_used",
    "final_best_raw", "final_best_transformed", "hit", "hitting_time", "dat_path",
)


@dataclass
class Run:
    alg: str
    fid: int
    dim: int
    iid: int
    rep: int
    budget: int
    evals_used: int
    final_best_raw: float
    hit: bool
    hitting_time: int | None
    evals: np.ndarray
    best: np.ndarray
    info: dict = field(repr=False, default_factory=dict)

    @property
    def cell(self) -> tuple[int, int]:
        return self.fid, self.dim

    @property
    def initial_best(self) -> float:
        return float(self.best[0])

    def first_hit(self, target: float) -> int | None:
        """First evaluation count at which ``raw_y_best >= target``, else ``None``."""
        idx = int(np.searchsorted(self.best, target, side="left"))
        return None if idx >= self.best.size else int(self.evals[idx])

    def best_at(self, t: int) -> float:
        idx = int(np.searchsorted(self.evals, t, side="right")) - 1
        return math.nan if idx < 0 else float(self.best[idx])


class DataSet:
    """Validated, immutable collection of runs."""

    def __init__(self, runs: list[Run], warnings: list[str] | None = None, root=None):
        self.runs = tuple(runs)
        self.warnings = tuple(warnings or ())
        self.root = root

    def __len__(self) -> int:
        return len(self.runs)

    def select(self, alg=None, fid=None, dim=None, iids=None) -> list[Run]:
        return [
            r
            for r in self.runs
            if (alg is None or r.alg == alg)
            and (fid is None or r.fid == fid)
            and (dim is None or r.dim == dim)
            and (iids is None or r.iid in iids)
        ]

    @property
    def algorithms(self) -> list[str]:
        # registry order for the reference heuristics, first appearance for anything else
        seen = list(dict.fromkeys(r.alg for r in self.runs))
        rank = {a: i for i, a in enumerate(ALGORITHM_NAMES)}
        return sorted(seen, key=lambda a: (rank.get(a, len(rank)), seen.index(a)))

    @property
    def cells(self) -> list[tuple[int, int]]:
        return sorted({r.cell for r in self.runs})

    def best_found(self, fid: int, dim: int) -> float:
        runs = self.select(fid=fid, dim=dim)
        if not runs:
            raise ValueError(f"no runs for F{fid} at n={dim}")
        return max(r.final_best_raw for r in runs)


# ------------------------------------------------------------------ loading

def _parse_dat(path: Path, warn) -> tuple[np.ndarray, np.ndarray] | None:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        warn(f"{path}: cannot open dat file ({exc.strerror})")
        return None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:5]) != LOG_COLUMNS:
            warn(f"{path}:1: unexpected header {header!r}")
            return None
        evals, best = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                warn(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                return None
            try:
                e = int(row[0])
                b = float(row[2])
            except ValueError:
                warn(f"{path}:{lineno}: non-numeric field")
                return None
            if evals and e <= evals[-1]:
                warn(f"{path}:{lineno}: evaluation count not increasing")
                return None
            if best and b < best[-1]:
                warn(f"{path}:{lineno}: raw_y_best decreased")
                return None
            evals.append(e)
            best.append(b)
    if not evals:
        warn(f"{path}: no data rows")
        return None
    return np.array(evals, dtype=np.int64), np.array(best)


def load_dataset(directory) -> DataSet:
    """Load every ``*.info.jsonl`` below ``directory``.

    Malformed lines and dat files produce warnings naming file and line and
    the affected run is skipped; a dataset without any valid run is an error.
    """
    root = Path(directory)
    warnings: list[str] = []
    runs: list[Run] = []
    for info_path in sorted(root.rglob("*.info.jsonl")):
        with open(info_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            where = f"{info_path}:{lineno}"
            try:
                info = json.loads(line)
            except json.JSONDecodeError as exc:
                warnings.append(f"{where}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(info, dict) or any(k not in info for k in _INFO_KEYS):
                warnings.append(f"{where}: missing info fields")
                continue
            parsed = _parse_dat(info_path.parent / info["dat_path"], warnings.append)
            if parsed is None:
                continue
            evals, best = parsed
            if best[-1] != float(info["final_best_raw"]):
                warnings.append(f"{where}: last raw_y_best differs from final_best_raw")
                continue
            runs.append(
                Run(
                    alg=info["alg"],
                    fid=int(info["fid"]),
                    dim=int(info["dim"]),
                    iid=int(info["iid"]),
                    rep=int(info["rep"]),
                    budget=int(info["budget"]),
                    evals_used=int(info["evals_used"]),
                    final_best_raw=float(info["final_best_raw"]),
                    hit=bool(info["hit"]),
                    hitting_time=info["hitting_time"],
                    evals=evals,
                    best=best,
                    info=info,
                )
            )
    if not runs:
        raise ValueError(f"no records found in {root}")
    return DataSet(runs, warnings, root)


# --------------------------------------------------------------- statistics

@dataclass(frozen=True)
class ErtResult:
    target: float
    runs: int
    successes: int
    aht: float
    budget: int
    ert: float


def ert_value(runs: int, successes: int, aht: float, budget: int) -> float:
    """``AHT + (r - s) / s * B``; infinite without successes."""
    if successes == 0:
        return math.inf
    return aht + (runs - successes) / successes * budget


def compute_ert(runs: Sequence[Run], target: float, budget: int | None = None) -> ErtResult:
    if not runs:
        raise ValueError("cannot compute ERT of an empty run group")
    if len({r.cell for r in runs}) != 1:
        raise ValueError("ERT runs must come from a single (fid, dim) cell")
    if budget is None:
        budget = max(r.budget for r in runs)
    hits = [h for h in (r.first_hit(target) for r in runs) if h is not None]
    s = len(hits)
    aht = float(np.mean(hits)) if s else math.nan
    return ErtResult(float(target), len(runs), s, aht, int(budget), ert_value(len(runs), s, aht, budget))


def fixed_target_curve(runs: Sequence[Run], targets: Sequence[float], budget: int | None = None) -> list[ErtResult]:
    if list(targets) != sorted(targets):
        raise ValueError("targets must be sorted ascending")
    return [compute_ert(runs, v, budget) for v in targets]


def fixed_budget_curve(runs: Sequence[Run], budgets: Sequence[int]) -> list[tuple[int, float]]:
    """Mean best-so-far raw value after each budget in ``budgets``."""
    if not runs:
        raise ValueError("empty run group")
    if len(budgets) == 0:
        raise ValueError("budgets must be nonempty")
    if any(t < 1 for t in budgets):
        raise ValueError("budgets must be >= 1")
    return [(int(t), float(np.mean([r.best_at(t) for r in runs]))) for t in budgets]


def default_targets(dataset: DataSet, fid: int, dim: int, count: int = 10) -> np.ndarray:
    """``count`` equally spaced targets from the lowest initial best to the best found."""
    runs = dataset.select(fid=fid, dim=dim)
    if not runs:
        raise ValueError(f"cell F{fid} D{dim} is not in the dataset")
    lo = min(r.initial_best for r in runs)
    hi = max(r.final_best_raw for r in runs)
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class EcdfCurve:
    alg: str
    budgets: np.ndarray
    values: np.ndarray
    pairs: int
    cells: tuple

    def value_at(self, t: int) -> float:
        idx = int(np.searchsorted(self.budgets, t, side="right")) - 1
        return 0.0 if idx < 0 else float(self.values[idx])


def _pair_hits(runs: Iterable[Run], targets: Sequence[float]) -> tuple[list[int], int]:
    hits, total = [], 0
    for r in runs:
        for v in targets:
            total += 1
            h = r.first_hit(v)
            if h is not None:
                hits.append(h)
    return hits, total


def compute_ecdf(
    dataset: DataSet,
    cells,
    budgets: Sequence[int],
    algorithms: Sequence[str] | None = None,
) -> dict[str, EcdfCurve]:
    """Fraction of (run, target) pairs hit within each budget, per algorithm.

    ``cells`` is a list of ``(fid, dim)`` (default target grids) or a mapping
    ``(fid, dim) -> targets``.
    """
    if not isinstance(cells, Mapping):
        cells = {tuple(c): None for c in cells}
    if not cells:
        raise ValueError("no cells given")
    grid = np.asarray(sorted(set(int(t) for t in budgets)), dtype=np.int64)
    if grid.size == 0:
        raise ValueError("budget grid must be nonempty")
    targets = {}
    for (fid, dim), tg in cells.items():
        if not dataset.select(fid=fid, dim=dim):
            raise ValueError(f"cell F{fid} D{dim} is not in the dataset")
        targets[(fid, dim)] = default_targets(dataset, fid, dim) if tg is None else np.asarray(tg, float)
    curves = {}
    for alg in algorithms or dataset.algorithms:
        hits, total = [], 0
        for (fid, dim), tg in targets.items():
            h, t = _pair_hits(dataset.select(alg=alg, fid=fid, dim=dim), tg)
            hits.extend(h)
            total += t
        if total == 0:
            continue
        sorted_hits = np.sort(np.asarray(hits, dtype=np.int64))
        counts = np.searchsorted(sorted_hits, grid, side="right")
        curves[alg] = EcdfCurve(alg, grid, counts / total, total, tuple(sorted(targets)))
    return curves


@dataclass(frozen=True)
class RankRow:
    alg: str
    dim: int
    hitting_number: int
    runs: int
    rank: int


def hitting_rank(dataset: DataSet, dim: int) -> list[RankRow]:
    """Runs reaching their cell's best recorded value, summed over fids; 1-2-2-4 ranking."""
    runs = dataset.select(dim=dim)
    if not runs:
        raise ValueError(f"no runs at n={dim}")
    best = {fid: dataset.best_found(fid, dim) for fid in {r.fid for r in runs}}
    counts: dict[str, list[int]] = {a: [0, 0] for a in dataset.algorithms if any(r.alg == a for r in runs)}
    for r in runs:
        counts[r.alg][1] += 1
        if r.final_best_raw >= best[r.fid]:
            counts[r.alg][0] += 1
    ordered = sorted(counts.items(), key=lambda kv: -kv[1][0])
    rows = []
    for alg, (hn, nr) in ordered:
        rank = 1 + sum(1 for _, (other, _) in ordered if other > hn)
        rows.append(RankRow(alg, dim, hn, nr, rank))
    return rows


@dataclass(frozen=True)
class GroupSummary:
    alg: str
    fid: int
    dim: int
    group: str
    iids: tuple
    runs: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    quantile_method: str = QUANTILE_METHOD


def five_numbers(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    arr = np.asarray(values, dtype=float)
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0], method=QUANTILE_METHOD)
    return tuple(float(v) for v in q)


def instance_group_summary(
    dataset: DataSet, alg: str, fid: int, dim: int, groups: Mapping[str, Sequence[int]] | None = None
) -> list[GroupSummary]:
    """Box-plot statistics of ``final_best_raw`` per group of instance ids."""
    groups = DEFAULT_GROUPS if groups is None else groups
    present = {r.iid for r in dataset.select(alg=alg, fid=fid, dim=dim)}
    if not present:
        raise ValueError(f"no runs of {alg} on F{fid} D{dim}")
    covered = set().union(*(set(g) for g in groups.values()))
    if not present <= covered:
        raise ValueError(f"groups do not cover instance ids {sorted(present - covered)}")
    out = []
    for name, iids in groups.items():
        runs = dataset.select(alg=alg, fid=fid, dim=dim, iids=set(iids))
        if not runs:
            raise ValueError(f"instance group {name!r} has no runs")
        out.append(GroupSummary(alg, fid, dim, name, tuple(iids), len(runs), *five_numbers([r.final_best_raw for r in runs])))
    return out


# ------------------------------------------------------------------ writers

def _num(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")
    return path


def write_ert_csv(path, rows: Iterable[tuple[str, int, int, ErtResult]]) -> Path:
    return _write(
        path,
        ("alg", "fid", "dim", "target", "runs", "successes", "aht", "ert"),
        ((a, f, d, e.target, e.runs, e.successes, e.aht, e.ert) for a, f, d, e in rows),
    )


def write_ecdf_csv(path, curves: Mapping[str, EcdfCurve]) -> Path:
    return _write(
        path,
        ("alg", "budget", "fraction"),
        ((c.alg, int(t), float(v)) for c in curves.values() for t, v in zip(c.budgets, c.values)),
    )


def write_fixed_budget_csv(path, rows: Iterable[tuple[str, int, int, int, int, float]]) -> Path:
    return _write(path, ("alg", "fid", "dim", "budget", "runs", "mean_best_raw"), rows)


def write_rank_csv(path, rows: Iterable[RankRow]) -> Path:
    return _write(
        path,
        ("alg", "dim", "hitting_number", "runs", "rank"),
        ((r.alg, r.dim, r.hitting_number, r.runs, r.rank) for r in rows),
    )


def write_groups_csv(path, rows: Iterable[GroupSummary]) -> Path:
    return _write(
        path,
        ("alg", "fid", "dim", "group", "iids", "runs", "min", "q1", "median", "q3", "max", "quantile_method"),
        (
            (g.alg, g.fid, g.dim, g.group, " ".join(map(str, g.iids)), g.runs, g.min, g.q1, g.median, g.q3, g.max, g.quantile_method)
            for g in rows
        ),
    )
