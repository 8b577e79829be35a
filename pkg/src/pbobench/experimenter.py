"""Experiment grid runner and on-disk dataset writer.

Layout under the output directory::

    manifest.json
    <alg_slug>/F<fid>_D<dim>.info.jsonl          one JSON line per run
    <alg_slug>/data_F<fid>_D<dim>/run_i<iid>_r<rep>.csv

Each ``(algorithm, fid, dim)`` cell is an independent task that writes only
its own files, so cells can run in any order or in parallel and the dataset
bytes depend on the configuration alone.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from pbobench import __version__
from pbobench.algorithms import ALGORITHM_NAMES, algorithm_slug, canonical_name, make_algorithm, parameter_channels
from pbobench.problems.functions import FUNCTION_NAMES
from pbobench.problems.instances import VALID_IIDS, ProblemInstance
from pbobench.records import LOG_COLUMNS, LogEvent, RunRecord
from pbobench.rng import MODULUS, Rng

log = logging.getLogger(__name__)

CONFIG_FORMAT = 1
DATA_FORMAT = 1
DEFAULT_DIMS = (16, 64, 100, 625)


def default_budget(n: int) -> int:
    """100 n^2 evaluations up to n = 100, 5 n^2 above."""
    return 100 * n * n if n <= 100 else 5 * n * n


def run_seed(master_seed: int, alg_index: int, fid: int, dim: int, iid: int, rep: int) -> int:
    """Fold the run identifiers into one generator seed through LCG mixing."""
    rng = Rng(0x5BD1E995)
    for v in (int(master_seed) % MODULUS, alg_index, fid, dim, iid, rep):
        rng = Rng((rng.state * 1000003 + v + 1) % MODULUS)
        rng.next()
        rng.next()
    return rng.state


@dataclass
class ExperimentConfig:
    algorithms: list = field(default_factory=lambda: list(ALGORITHM_NAMES))
    fids: list = field(default_factory=lambda: list(range(1, 24)))
    dims: list = field(default_factory=lambda: list(DEFAULT_DIMS))
    iids: list = field(default_factory=lambda: list(VALID_IIDS))
    repetitions: int = 1
    # additional runs on instance 1 (10 gives 11 runs there in total)
    extra_iid1_runs: int = 0
    budget: int | None = None
    master_seed: int = 0
    out_dir: str = "bench-out"
    log_mode: str = "delta"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.algorithms:
            raise ValueError("config: algorithms must be nonempty")
        self.algorithms = [canonical_name(a) for a in self.algorithms]
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("config: duplicate algorithm")
        if not self.fids:
            raise ValueError("config: fids must be nonempty")
        for f in self.fids:
            if not isinstance(f, int) or not 1 <= f <= 23:
                raise ValueError(f"config: unknown function id {f!r} (valid: 1..23)")
        if not self.dims or any(not isinstance(d, int) or d < 1 for d in self.dims):
            raise ValueError(f"config: dims must be nonempty positive integers, got {self.dims}")
        if not self.iids or any(i not in VALID_IIDS for i in self.iids):
            raise ValueError(f"config: iids must be a nonempty subset of {VALID_IIDS}, got {self.iids}")
        for name in ("fids", "dims", "iids"):
            values = getattr(self, name)
            if len(set(values)) != len(values):
                raise ValueError(f"config: duplicate entries in {name}")
        if not isinstance(self.repetitions, int) or self.repetitions < 1:
            raise ValueError("config: repetitions must be a positive integer")
        if not isinstance(self.extra_iid1_runs, int) or self.extra_iid1_runs < 0:
            raise ValueError("config: extra_iid1_runs must be a non-negative integer")
        if self.budget is not None and (not isinstance(self.budget, int) or self.budget < 1):
            raise ValueError("config: budget must be a positive integer or null")
        if not isinstance(self.master_seed, int):
            raise ValueError("config: master_seed must be an integer")
        if self.log_mode not in ("delta", "full"):
            raise ValueError("config: log_mode must be 'delta' or 'full'")

    def budget_for(self, n: int) -> int:
        return self.budget if self.budget is not None else default_budget(n)

    def runs_per_cell(self) -> list[tuple[int, int]]:
        """``(iid, rep)`` pairs executed in every cell, in execution order."""
        pairs = []
        for iid in self.iids:
            pairs.extend((iid, rep) for rep in range(self.repetitions))
            if iid == 1:
                pairs.extend((1, self.repetitions + k) for k in range(self.extra_iid1_runs))
        return pairs

    def to_json(self) -> dict:
        return {"format": CONFIG_FORMAT, **asdict(self)}

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        fmt = data.pop("format", CONFIG_FORMAT)
        if fmt != CONFIG_FORMAT:
            raise ValueError(f"config: unsupported format {fmt!r}")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"config: unknown field(s) {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"config: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ValueError("config: top level must be an object")
        return cls.from_json(data)


# ------------------------------------------------------------------ logging

def _fmt(v) -> str:
    return repr(float(v))


class RunLogger:
    """Collects the events of one run and writes its dat file and info line.

    In ``delta`` mode an event is kept when ``raw_y_best`` strictly improves
    (the first event always does); the last event is added at flush time if
    it was dropped. ``full`` keeps every event.
    """

    def __init__(
        self,
        dat_path=None,
        info_path=None,
        channels: tuple[str, ...] = (),
        mode: str = "delta",
        instance: ProblemInstance | None = None,
    ):
        if mode not in ("delta", "full"):
            raise ValueError(f"unknown log mode {mode!r}")
        self.dat_path = None if dat_path is None else Path(dat_path)
        self.info_path = None if info_path is None else Path(info_path)
        self.channels = tuple(channels)
        self.mode = mode
        self.instance = instance
        self.rows: list[str] = []
        self.events: list[LogEvent] = []
        self._last_eval = 0
        self._best = None
        self._pending: LogEvent | None = None

    @property
    def header(self) -> str:
        return ",".join(LOG_COLUMNS + self.channels)

    def _keep(self, event: LogEvent) -> None:
        cells = [str(int(event.evaluations))] + [_fmt(v) for v in event[1:5]] + [_fmt(v) for v in event.params]
        self.rows.append(",".join(cells))
        self.events.append(event)

    def record_evaluation(self, event: LogEvent) -> None:
        if event.evaluations <= self._last_eval:
            raise ValueError(
                f"evaluation count {event.evaluations} does not follow {self._last_eval}"
            )
        if len(event.params) != len(self.channels):
            raise ValueError(f"expected {len(self.channels)} parameter values, got {len(event.params)}")
        self._last_eval = event.evaluations
        improved = self._best is None or event.raw_y_best > self._best
        self._best = event.raw_y_best
        if self.mode == "full" or improved:
            self._keep(event)
            self._pending = None
        else:
            self._pending = event

    def flush_run(self, record: RunRecord) -> dict:
        """Write the dat file and append the info line; returns the info dict."""
        if self._pending is not None:
            self._keep(self._pending)
            self._pending = None
        info = info_line(record, self.instance)
        if self.dat_path is not None:
            self.dat_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.dat_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.header + "\n")
                for row in self.rows:
                    fh.write(row + "\n")
        if self.info_path is not None:
            self.info_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.info_path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(info, ensure_ascii=False) + "\n")
        return info


def record_evaluation(logger: RunLogger, event: LogEvent) -> None:
    logger.record_evaluation(event)


def flush_run(logger: RunLogger, record: RunRecord) -> dict:
    return logger.flush_run(record)


def info_line(record: RunRecord, instance: ProblemInstance | None) -> dict:
    return {
        "format": DATA_FORMAT,
        "suite_version": __version__,
        "alg": record.alg,
        "fid": record.fid,
        "fname": FUNCTION_NAMES[record.fid],
        "dim": record.dim,
        "iid": record.iid,
        "rep": record.rep,
        "seed": record.seed,
        "budget": record.budget,
        "evals_used": record.evals_used,
        "final_best_raw": record.final_best_raw,
        "final_best_transformed": record.final_best_transformed,
        "hit": record.hit,
        "hitting_time": record.hitting_time,
        "dat_path": record.dat_path,
        "instance": None if instance is None else instance.to_json(),
    }


# ------------------------------------------------------------------- runner

def cell_paths(out_dir, alg: str, fid: int, dim: int) -> tuple[Path, Path]:
    base = Path(out_dir) / algorithm_slug(alg)
    return base / f"F{fid}_D{dim}.info.jsonl", base / f"data_F{fid}_D{dim}"


def _run_cell(task) -> dict:
    config, alg, fid, dim = task
    info_path, data_dir = cell_paths(config.out_dir, alg, fid, dim)
    summary = {
        "alg": alg,
        "fid": fid,
        "dim": dim,
        "info_path": info_path.relative_to(config.out_dir).as_posix(),
        "runs": 0,
        "status": "ok",
        "error": None,
    }
    try:
        algorithm = make_algorithm(alg, dim)
        instances = {iid: ProblemInstance.build(fid, dim, iid, config.master_seed) for iid in config.iids}
    except ValueError as exc:
        summary.update(status="error", error=str(exc))
        return summary
    if info_path.exists():
        info_path.unlink()
    channels = parameter_channels(alg)
    alg_index = ALGORITHM_NAMES.index(alg)
    budget = config.budget_for(dim)
    for iid, rep in config.runs_per_cell():
        inst = instances[iid]
        seed = run_seed(config.master_seed, alg_index, fid, dim, iid, rep)
        dat_rel = f"{data_dir.name}/run_i{iid}_r{rep}.csv"
        logger = RunLogger(data_dir / f"run_i{iid}_r{rep}.csv", info_path, channels, config.log_mode, inst)
        record, _ = algorithm.run(inst, budget, Rng(seed), logger)
        record.rep = rep
        record.dat_path = dat_rel
        logger.flush_run(record)
        summary["runs"] += 1
    return summary


def run_experiment(config: ExperimentConfig, jobs: int = 1, progress=None) -> Path:
    """Run every cell of ``config``; returns the dataset directory.

    Invalid ``(fid, dim)`` or ``(algorithm, dim)`` combinations are recorded
    as failed cells in ``manifest.json`` and do not stop the experiment.
    """
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    tasks = [(config, alg, fid, dim) for alg in config.algorithms for fid in config.fids for dim in config.dims]
    if jobs <= 1:
        results = []
        for task in tasks:
            results.append(_run_cell(task))
            if progress:
                progress(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = []
            for res in pool.map(_run_cell, tasks):
                results.append(res)
                if progress:
                    progress(res)
    failed = [r for r in results if r["status"] != "ok"]
    for r in failed:
        log.warning("cell %s F%d D%d failed: %s", r["alg"], r["fid"], r["dim"], r["error"])
    order = {a: i for i, a in enumerate(ALGORITHM_NAMES)}
    results.sort(key=lambda r: (order[r["alg"]], r["fid"], r["dim"]))
    manifest = {
        "format": DATA_FORMAT,
        "suite_version": __version__,
        # the output location is not part of the dataset's content
        "config": {k: v for k, v in config.to_json().items() if k != "out_dir"},
        "cells": results,
        "failed_cells": len(failed),
    }
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, ensure_ascii=False)
        fh.write("\n")
    return out
