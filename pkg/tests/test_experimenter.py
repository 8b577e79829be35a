import json
from pathlib import Path

import numpy as np
import pytest

from pbobench.algorithms import ALGORITHM_NAMES
from pbobench.analyzer import load_dataset
from pbobench.experimenter import (
    ExperimentConfig,
    RunLogger,
    default_budget,
    flush_run,
    record_evaluation,
    run_experiment,
    run_seed,
)
from pbobench.problems import VALID_IIDS
from pbobench.records import LogEvent, RunRecord


def tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def record(evals=3, best=2.0, hit=False):
    return RunRecord("RLS", 1, 4, 1, 7, 10, evals, best, best, hit, evals if hit else None)


def test_default_budget():
    assert default_budget(16) == 25_600
    assert default_budget(100) == 1_000_000
    assert default_budget(625) == 5 * 625**2


def test_grid_size():
    cfg = ExperimentConfig()
    cells = len(cfg.algorithms) * len(cfg.fids) * len(cfg.dims)
    assert cells * len(cfg.runs_per_cell()) == 12_144


def test_extra_iid1_runs():
    cfg = ExperimentConfig(extra_iid1_runs=10)
    pairs = cfg.runs_per_cell()
    assert sum(1 for iid, _ in pairs if iid == 1) == 11
    assert len(pairs) == 21


def test_seed_collisions_default_grid():
    cfg = ExperimentConfig(extra_iid1_runs=10)
    seeds = set()
    count = 0
    for a in range(12):
        for fid in cfg.fids:
            for dim in cfg.dims:
                for iid, rep in cfg.runs_per_cell():
                    seeds.add(run_seed(0, a, fid, dim, iid, rep))
                    count += 1
    assert len(seeds) == count


def test_seed_depends_on_master():
    assert run_seed(0, 1, 1, 16, 1, 0) != run_seed(1, 1, 1, 16, 1, 0)


@pytest.mark.parametrize(
    "change",
    [
        {"fids": [99]},
        {"algorithms": ["bogus"]},
        {"dims": []},
        {"iids": [7]},
        {"repetitions": 0},
        {"budget": 0},
        {"log_mode": "verbose"},
    ],
)
def test_config_validation(change):
    with pytest.raises(ValueError):
        ExperimentConfig(**change)


def test_config_fid_message():
    with pytest.raises(ValueError, match="unknown function id 99"):
        ExperimentConfig(fids=[99])


def test_config_json_roundtrip(tmp_path):
    cfg = ExperimentConfig(algorithms=["RLS", "ollga"], fids=[1, 2], dims=[16], budget=50)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_json()))
    again = ExperimentConfig.load(path)
    assert again == cfg
    assert cfg.to_json()["format"] == 1
    with pytest.raises(ValueError):
        ExperimentConfig.from_json({"format": 2})
    with pytest.raises(ValueError):
        ExperimentConfig.from_json({"colour": "red"})


def test_logger_full_mode():
    lg = RunLogger(mode="full")
    for e in range(1, 6):
        record_evaluation(lg, LogEvent(e, 1.0, 1.0, 1.0, 1.0))
    flush_run(lg, record(evals=5, best=1.0))
    assert len(lg.rows) == 5


def test_logger_delta_mode():
    lg = RunLogger(mode="delta")
    best = [1, 1, 2, 2, 2, 3, 3]
    for e, b in enumerate(best, start=1):
        record_evaluation(lg, LogEvent(e, float(b), float(b), float(b), float(b)))
    flush_run(lg, record(evals=7, best=3.0))
    # first event, improvements at 3 and 6, then the final evaluation
    assert [ev.evaluations for ev in lg.events] == [1, 3, 6, 7]


def test_logger_delta_final_not_duplicated():
    lg = RunLogger(mode="delta")
    for e, b in enumerate([1, 2, 3], start=1):
        record_evaluation(lg, LogEvent(e, float(b), float(b), 0.0, 0.0))
    flush_run(lg, record(evals=3, best=3.0, hit=True))
    assert [ev.evaluations for ev in lg.events] == [1, 2, 3]


def test_logger_errors():
    lg = RunLogger(mode="delta", channels=("p",))
    record_evaluation(lg, LogEvent(2, 1.0, 1.0, 1.0, 1.0, (0.5,)))
    with pytest.raises(ValueError):
        record_evaluation(lg, LogEvent(2, 1.0, 1.0, 1.0, 1.0, (0.5,)))
    with pytest.raises(ValueError):
        record_evaluation(lg, LogEvent(3, 1.0, 1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        RunLogger(mode="sparse")


def small_config(out, **kw):
    base = dict(
        algorithms=["gHC", "RLS", "(1+(λ,λ))GA", "UMDA"],
        fids=[1, 10, 18, 22],
        dims=[16],
        iids=[1, 2, 51],
        budget=2000,
        out_dir=str(out),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_single_run_layout(tmp_path):
    cfg = ExperimentConfig(algorithms=["RLS"], fids=[1], dims=[16], iids=[1], out_dir=str(tmp_path))
    run_experiment(cfg)
    info = list(tmp_path.rglob("*.info.jsonl"))
    dats = list(tmp_path.rglob("*.csv"))
    assert len(info) == 1 and len(dats) == 1
    line = json.loads(info[0].read_text().strip())
    for key in ("format", "suite_version", "alg", "fid", "fname", "dim", "iid", "rep", "seed", "budget",
                "evals_used", "final_best_raw", "final_best_transformed", "hit", "hitting_time",
                "dat_path", "instance"):
        assert key in line
    assert (info[0].parent / line["dat_path"]).resolve() == dats[0].resolve()
    header = dats[0].read_text().splitlines()[0]
    assert header == "evaluations,raw_y,raw_y_best,trans_y,trans_y_best"


def test_info_matches_dat_and_budget(tmp_path):
    run_experiment(small_config(tmp_path))
    ds = load_dataset(tmp_path)
    assert not ds.warnings
    assert len(ds) == 4 * 4 * 3
    for r in ds.runs:
        assert r.best[-1] == r.final_best_raw
        assert r.evals[-1] == r.evals_used <= r.budget
        if not r.hit:
            assert r.evals_used == r.budget


def test_channels_in_header(tmp_path):
    cfg = ExperimentConfig(algorithms=["(1+10)EA_norm"], fids=[1], dims=[16], iids=[1], budget=100,
                           out_dir=str(tmp_path))
    run_experiment(cfg)
    dat = next(tmp_path.rglob("*.csv"))
    assert dat.read_text().splitlines()[0].endswith(",rate_r,counter_c")


def test_deterministic_and_order_free(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run_experiment(small_config(a))
    run_experiment(small_config(b))
    run_experiment(small_config(c), jobs=2)
    assert tree_bytes(a) == tree_bytes(b) == tree_bytes(c)


def test_rerun_overwrites(tmp_path):
    run_experiment(small_config(tmp_path))
    first = tree_bytes(tmp_path)
    run_experiment(small_config(tmp_path))
    assert tree_bytes(tmp_path) == first


def test_invalid_cell_recorded(tmp_path):
    cfg = ExperimentConfig(algorithms=["RLS"], fids=[1, 20], dims=[10], iids=[1], budget=50, out_dir=str(tmp_path))
    run_experiment(cfg)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["failed_cells"] == 1
    bad = [c for c in manifest["cells"] if c["status"] != "ok"]
    assert bad[0]["fid"] == 20 and "N*N" in bad[0]["error"]
    assert load_dataset(tmp_path).select(fid=1)


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_experiment(small_config(blocker / "sub"))


def test_full_mode_rows(tmp_path):
    cfg = ExperimentConfig(algorithms=["UMDA"], fids=[18], dims=[16], iids=[1], budget=321,
                           log_mode="full", out_dir=str(tmp_path))
    run_experiment(cfg)
    dat = next(tmp_path.rglob("*.csv"))
    assert len(dat.read_text().splitlines()) == 322
