import csv
import json

import pytest

from pbobench.cli import main, parse_int_list


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_int_list():
    assert parse_int_list("1-6,11-13,15,16") == [1, 2, 3, 4, 5, 6, 11, 12, 13, 15, 16]
    assert parse_int_list("7") == [7]


@pytest.fixture
def small_data(tmp_path):
    out = tmp_path / "d"
    code = main(["run", "--algo", "RLS,(1+1)EA", "--fid", "1,2", "--dim", "16", "--iid", "1,2",
                 "--budget", "3000", "--out", str(out), "--quiet", "--jobs", "1"])
    assert code == 0
    return out


def test_run_single(tmp_path, capsys):
    out = tmp_path / "d"
    code = main(["run", "--algo", "RLS", "--fid", "1", "--dim", "16", "--iid", "1", "--seed", "7",
                 "--out", str(out), "--jobs", "1"])
    assert code == 0
    text = capsys.readouterr().out
    assert "ok    RLS F1 D16: 1 runs" in text
    assert len(list(out.rglob("*.csv"))) == 1


def test_run_bad_fid(capsys):
    assert main(["run", "--fid", "99"]) == 1
    assert "unknown function id" in capsys.readouterr().err


def test_run_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"format": 1, "dims": [16], "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 1
    assert "unknown field" in capsys.readouterr().err


def test_run_partial_failure(tmp_path):
    code = main(["run", "--algo", "RLS", "--fid", "1,20", "--dim", "10", "--iid", "1", "--budget", "20",
                 "--out", str(tmp_path / "d"), "--quiet", "--jobs", "1"])
    assert code == 2


def test_run_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"format": 1, "algorithms": ["gHC"], "fids": [1], "dims": [16],
                               "iids": [1, 2], "out_dir": str(tmp_path / "o")}))
    assert main(["run", "--config", str(cfg), "--quiet", "--jobs", "1"]) == 0
    assert len(list((tmp_path / "o").rglob("*.csv"))) == 2


def test_bench_out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BENCH_OUT", str(tmp_path / "env"))
    assert main(["run", "--algo", "gHC", "--fid", "1", "--dim", "16", "--iid", "1", "--quiet", "--jobs", "1"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_default_config_grid():
    import pathlib

    from pbobench.experimenter import ExperimentConfig

    cfg = ExperimentConfig.load(pathlib.Path(__file__).parent.parent / "configs" / "default.json")
    cells = len(cfg.algorithms) * len(cfg.fids) * len(cfg.dims)
    assert cells * len(cfg.iids) * cfg.repetitions == 12_144


def test_analyze_ert(small_data, tmp_path):
    out = tmp_path / "ert.csv"
    assert main(["analyze", "ert", "--data", str(small_data), "--fid", "1", "--dim", "16", "--target", "16",
                 "-o", str(out)]) == 0
    rows = read_csv(out)
    assert [r["alg"] for r in rows] == ["RLS", "(1+1)EA"]
    assert all(r["successes"] == "2" for r in rows)


def test_analyze_ert_best_found(small_data, tmp_path):
    out = tmp_path / "ert.csv"
    assert main(["analyze", "ert", "--data", str(small_data), "--target", "best-found", "-o", str(out)]) == 0
    assert len(read_csv(out)) == 4


def test_analyze_ecdf(small_data, tmp_path):
    out = tmp_path / "ecdf.csv"
    assert main(["analyze", "ecdf", "--data", str(small_data), "--fids", "1-2", "--dims", "16",
                 "--budgets", "1,10,100,1000,3000", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["alg", "budget", "fraction"]
    assert len(rows) == 10


def test_analyze_other(small_data, tmp_path):
    for name, fname in [("fixed-budget", "fb.csv"), ("rank", "rank.csv"), ("groups", "g.csv")]:
        out = tmp_path / fname
        extra = ["--groups", "pure=1;xor=2"] if name == "groups" else []
        assert main(["analyze", name, "--data", str(small_data), "-o", str(out)] + extra) == 0
        assert read_csv(out)


def test_analyze_missing_dataset(tmp_path, capsys):
    assert main(["analyze", "ert", "--data", str(tmp_path / "none")]) == 1
    assert "error" in capsys.readouterr().err


def test_targets_64(capsys):
    assert main(["targets", "--dim", "64"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    by = {int(r["fid"]): r for r in rows}
    for fid, v in {1: "64", 3: "2080", 6: "21", 8: "33", 19: "128", 21: "384", 23: "8"}.items():
        assert by[fid]["optimum"] == v and by[fid]["table_target"] == v


def test_targets_625(capsys):
    assert main(["targets", "--dim", "625"]) == 0
    by = {int(r["fid"]): r for r in csv.DictReader(capsys.readouterr().out.splitlines())}
    assert by[4]["table_target"] == "312" and by[6]["table_target"] == "208" and by[13]["table_target"] == "208"


def test_targets_16(capsys):
    assert main(["targets", "--dim", "16"]) == 0
    text = capsys.readouterr().out.splitlines()
    assert text[0] == "fid,name,optimum"
    by = {int(r["fid"]): r for r in csv.DictReader(text)}
    assert by[1]["optimum"] == "16" and by[3]["optimum"] == "136"


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "UMDA" in out and "NQueens" in out


def test_usage_error():
    assert main([]) == 1
    assert main(["--help"]) == 0
