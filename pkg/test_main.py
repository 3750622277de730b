#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""命令行测试：直接调用 main(argv)"""

import json
import logging
from logging.handlers import RotatingFileHandler

import pytest

from database import ReportStore, RunHistory
from main import EXIT_ERROR, EXIT_EXPECT_FAILED, EXIT_OK, main


def read(path) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def construct_window(tmp_path, name="h0.alist"):
    out = tmp_path / name
    code = main(["construct", "--family", "tv", "--p", "5", "--mu", "3", "--s", "3", "--out", str(out)])
    assert code == EXIT_OK
    return out


def test_construct_writes_alist_and_sidecar(tmp_path):
    out = construct_window(tmp_path)
    sidecar = json.loads(read(str(out) + ".json"))
    assert sidecar["matrix"]["n_rows"] == 35 and sidecar["matrix"]["n_cols"] == 40
    assert sidecar["matrix"]["T"] == 4
    assert sidecar["manifest"]["subcommand"] == "construct"
    assert "h0.alist" in sidecar["manifest"]["outputs"]
    assert read(out).splitlines()[0] == "40 35"


def test_construct_is_byte_identical_across_runs(tmp_path):
    first = construct_window(tmp_path, "a.alist")
    second = construct_window(tmp_path, "b.alist")
    assert read(first) == read(second)


def test_construct_block_code(tmp_path):
    out = tmp_path / "block.alist"
    code = main(["construct", "--family", "block", "--m", "1", "--stage", "step2", "--out", str(out)])
    assert code == EXIT_OK
    sidecar = json.loads(read(str(out) + ".json"))
    assert (sidecar["matrix"]["n_rows"], sidecar["matrix"]["n_cols"]) == (45, 45)
    assert sidecar["matrix"]["stage"] == "STEP2"


def test_construct_reports_missing_or_bad_parameters(tmp_path, capsys):
    assert main(["construct", "--family", "tv", "--p", "5", "--mu", "3"]) == EXIT_ERROR
    assert main(["construct", "--family", "tv", "--p", "6", "--mu", "1", "--s", "2",
                 "--out", str(tmp_path / "x.alist")]) == EXIT_ERROR
    assert main(["construct", "--family", "block", "--m", "0"]) == EXIT_ERROR
    assert "❌" in capsys.readouterr().err


def test_analyze_expectations(tmp_path):
    base = ["analyze", "--spec", "tv:p=5,mu=3", "--s", "3", "--girth"]
    assert main(base + ["--expect", "girth==6"]) == EXIT_OK
    assert main(base + ["--expect", "girth>=8"]) == EXIT_EXPECT_FAILED
    assert main(base + ["--expect", "cycles6>=1"]) == EXIT_EXPECT_FAILED


def test_analyze_rejects_bad_requests():
    assert main(["analyze", "--spec", "tv:p=5,mu=3", "--s", "3", "--count-cycles", "5"]) == EXIT_ERROR
    assert main(["analyze", "--spec", "tv:p=5,mu=3", "--s", "3"]) == EXIT_ERROR
    assert main(["analyze", "--spec", "tv:p=5,mu=3", "--distances", "--d-cap", "99"]) == EXIT_ERROR
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--spec", "tv:p=5,mu=3", "--girth", "--expect", "girth is big"])
    assert info.value.code == 2


def test_analyze_from_file_matches_spec(tmp_path):
    out = construct_window(tmp_path)
    from_file = tmp_path / "file.json"
    from_spec = tmp_path / "spec.json"
    args = ["--girth", "--count-cycles", "4", "6", "--first-period"]
    assert main(["analyze", "--in", str(out), "--out", str(from_file)] + args) == EXIT_OK
    assert main(["analyze", "--spec", "tv:p=5,mu=3", "--s", "3", "--out", str(from_spec)] + args) == EXIT_OK
    file_report = json.loads(read(from_file))
    spec_report = json.loads(read(from_spec))
    assert file_report["girth"] == spec_report["girth"] == 6
    assert file_report["census"] == spec_report["census"]
    assert file_report["census"]["4"] == 0
    assert file_report["witness"] == spec_report["witness"]
    assert len(spec_report["witness"]) == 6
    assert spec_report["window_s"] == 3 and spec_report["first_period"] is True
    assert spec_report["girth_bound"] == 6 and file_report["girth_bound"] is None
    assert {"spec", "window_s", "girth", "stabilized", "census", "witness"} <= set(spec_report)
    assert "h0.alist" in file_report["manifest"]["inputs"]


def test_analyze_density_and_distances(tmp_path):
    assert main(["analyze", "--spec", "tv:p=3,mu=1", "--s", "5", "--density",
                 "--expect", "density_match==1"]) == EXIT_OK
    out = tmp_path / "distances.json"
    assert main(["analyze", "--spec", "tv:p=5,mu=2", "--distances", "--d-cap", "5",
                 "--expect", "d_free_lo==4", "--expect", "d_free_hi==4", "--expect", "d0==2",
                 "--out", str(out)]) == EXIT_OK
    report = json.loads(read(out))
    assert report["distances"] == {"0": 2, "1": 3, "2": 4, "3": 4}
    assert report["d_free"]["gap"] is False


def test_analyze_cache_hits(tmp_path):
    args = ["analyze", "--spec", "tv:p=5,mu=2", "--s", "2", "--girth", "--cache"]
    assert main(args) == EXIT_OK
    assert main(args) == EXIT_OK
    stats = ReportStore.get_stats()
    assert stats["total"] == 1
    assert stats["total_hits"] == 1


def test_simulate_writes_reproducible_csv(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        code = main(["simulate", "--spec", "tv:p=5,mu=2", "--s", "4", "--grid", "0.0", "0.05",
                     "--frames", "3", "--seed", "9", "--out", str(out)])
        assert code == EXIT_OK
    assert read(first) == read(second)
    lines = read(first).splitlines()
    assert lines[0] == "crossover,frames,bit_errors,frame_errors,avg_iters"
    assert lines[1] == "0.0,3,0,0,1.000000"
    sidecar = json.loads(read(str(first) + ".json"))
    assert sidecar["rows"] == 2
    assert sidecar["manifest"]["parameters"]["seed"] == 9


def test_simulate_rejects_zero_frames(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--spec", "tv:p=5,mu=2", "--s", "4", "--frames", "0", "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2


def test_simulate_requires_window_for_spec(tmp_path):
    assert main(["simulate", "--spec", "tv:p=5,mu=2", "--out", str(tmp_path / "x.csv")]) == EXIT_ERROR


def test_history_records_runs(tmp_path, capsys):
    construct_window(tmp_path)
    main(["analyze", "--spec", "tv:p=5,mu=3", "--s", "3", "--girth", "--expect", "girth>=8"])
    assert main(["history", "--limit", "5"]) == EXIT_OK
    runs = RunHistory.get_recent(10)
    assert [run["subcommand"] for run in runs] == ["analyze", "construct"]
    assert runs[0]["exit_code"] == EXIT_EXPECT_FAILED
    assert runs[1]["manifest_digest"]
    assert runs[0]["parameters"]["expect"] == ["girth>=8"]
    assert "construct" in capsys.readouterr().out
    assert len(RunHistory.get_recent(10, "construct")) == 1


def test_quiet_flag_raises_console_level(capsys):
    assert main(["--quiet", "history"]) == EXIT_OK
    console = [h for h in logging.getLogger("LatinLDPC").handlers
               if not isinstance(h, RotatingFileHandler)]
    assert console and all(h.level == logging.WARNING for h in console)
    assert main(["history"]) == EXIT_OK
    assert all(h.level < logging.WARNING for h in console)


def test_history_never_records_itself(tmp_path, capsys):
    assert main(["history"]) == EXIT_OK
    assert RunHistory.get_recent(10) == []
    construct_window(tmp_path)
    assert main(["history", "--subcommand", "analyze"]) == EXIT_OK
    assert main(["history", "--subcommand", "construct", "--limit", "1"]) == EXIT_OK
    runs = RunHistory.get_recent(10)
    assert [run["subcommand"] for run in runs] == ["construct"]
    assert "#1 " in capsys.readouterr().out
