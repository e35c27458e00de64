import json
import subprocess
import sys

import numpy as np
import pytest

from nonstat import MultivariateSeries, write_csv
from nonstat.cases import five_bus_case
from nonstat.cli import run


def write_break_series(path, seed=0, t=300, l=1):
    g = np.random.default_rng(seed)
    vals = np.vstack([g.standard_normal((t // 2, l)), 2.0 * g.standard_normal((t - t // 2, l))])
    write_csv(MultivariateSeries(vals), path)


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert run(["detect", "--help"]) == 0
    capsys.readouterr()


def test_unknown_flag_exits_one(capsys):
    assert run(["detect", "--nope"]) == 1
    assert "nonstat" in capsys.readouterr().err


def test_missing_subcommand_exits_one(capsys):
    assert run([]) == 1
    capsys.readouterr()


def test_detect_writes_sorted_json(tmp_path, capsys):
    src = tmp_path / "r.csv"
    out = tmp_path / "cps.json"
    write_break_series(src, seed=3)
    code = run(
        ["detect", "--input", str(src), "--alpha", "0.05", "--window", "40",
         "--seed", "7", "--n-boot", "100", "--output", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["change_points"] == sorted(doc["change_points"])
    assert doc["alpha"] == 0.05
    assert doc["window"] == 40
    assert doc["seed"] == 7


def test_detect_emit_plot_writes_svgs(tmp_path, capsys):
    src = tmp_path / "r.csv"
    out = tmp_path / "cps.json"
    write_break_series(src, seed=4)
    code = run(
        ["detect", "--input", str(src), "--window", "40", "--n-boot", "100",
         "--seed", "1", "--output", str(out), "--emit-plot", "svg"]
    )
    assert code == 0
    series_svg = tmp_path / "cps_series.svg"
    profile_svg = tmp_path / "cps_profile.svg"
    assert series_svg.exists() and profile_svg.exists()
    assert series_svg.read_text().startswith("<svg")


def test_detect_missing_input_exits_two(tmp_path, capsys):
    code = run(["detect", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.json")])
    assert code == 2
    assert capsys.readouterr().err.strip()


def test_detect_bad_data_exits_two(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("a,b\n1,x\n")
    code = run(["detect", "--input", str(src), "--output", str(tmp_path / "o.json")])
    assert code == 2
    capsys.readouterr()


def test_simulate_writes_bundle(tmp_path, capsys):
    src = tmp_path / "w.csv"
    write_break_series(src, seed=5)
    out = tmp_path / "sims"
    code = run(
        ["simulate", "--input", str(src), "--alpha", "0.05", "--n", "3", "--seed", "42",
         "--window", "40", "--n-boot", "100", "--out", str(out)]
    )
    assert code == 0
    files = sorted(p.name for p in out.iterdir())
    assert "manifest.json" in files
    assert [f"sim_{i:04d}.csv" for i in (1, 2, 3)] == [f for f in files if f.startswith("sim_")]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["master_seed"] == 42


def test_decompose_writes_components(tmp_path, capsys):
    src = tmp_path / "w.csv"
    t = np.arange(120.0)
    write_csv(MultivariateSeries((5.0 + 0.1 * t + np.sin(2 * np.pi * t / 12))[:, None]), src)
    out = tmp_path / "parts"
    code = run(["decompose", "--input", str(src), "--output", str(out), "--period", "12"])
    assert code == 0
    for name in ("trend.csv", "seasonal.csv", "residual.csv"):
        assert (out / name).exists()


def test_dispatch_writes_trace_and_plots(tmp_path, capsys):
    case_path = tmp_path / "case.json"
    case_path.write_text(five_bus_case().to_json())
    wind = tmp_path / "wind.csv"
    g = np.random.default_rng(9)
    write_csv(MultivariateSeries(8.0 + 0.5 * g.standard_normal((24, 1))), wind)
    out = tmp_path / "trace.csv"
    code = run(
        ["dispatch", "--case", str(case_path), "--wind", str(wind), "--out", str(out),
         "--rated-power", "60.0", "--emit-plot", "svg"]
    )
    assert code == 0
    header = out.read_text().split("\n")[0].split(",")
    assert header[0] == "t" and header[-1] == "total_conventional"
    assert (tmp_path / "trace_generation.svg").exists()
    assert (tmp_path / "trace_lmp_bus1.svg").exists()


def test_seeded_outputs_byte_identical_across_threads(tmp_path, capsys, monkeypatch):
    src = tmp_path / "w.csv"
    write_break_series(src, seed=11)
    outputs = []
    for threads in ("1", "8", "1"):
        monkeypatch.setenv("NONSTAT_THREADS", threads)
        out = tmp_path / f"sims_{len(outputs)}"
        code = run(
            ["simulate", "--input", str(src), "--n", "2", "--seed", "5",
             "--window", "40", "--n-boot", "100", "--out", str(out)]
        )
        assert code == 0
        outputs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outputs[0] == outputs[1] == outputs[2]


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "nonstat.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "decompose" in proc.stdout
