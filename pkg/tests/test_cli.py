import csv

import numpy as np
import pytest

from fujita.cli import main

FAST_CONFIG = """\
seed = 0
output = "{out}"

[model]
N = 1
L = 20.0
n = 128
d = 0.5
p = 3.0
alpha = 0.0

[model.forcing]
kind = "power"
sigma = -0.5

[model.w]
preset = "gaussian"
amplitude = 0.001

[model.u0]
preset = "gaussian"
amplitude = 0.001

[run]
horizon = 0.5

[scan]
p = [1.5, 2.5]
sigma = [-0.5]
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text(FAST_CONFIG.format(out=tmp_path / "out"))
    return path


def test_exponents_prints_table_and_csv_row(capsys):
    assert main(["exponents", "--N", "3", "--d", "1", "--sigma", "-0.5", "--p", "2"]) == 0
    out = capsys.readouterr().out
    assert "p_c = 1.5" in out and "p_F_sigma = 2" in out
    rows = [line for line in out.splitlines() if "," in line]
    assert len(rows) == 2  # header row + value row


def test_kernel_csv(tmp_path, capsys):
    out = tmp_path / "kernel.csv"
    assert main(["kernel", "--d", "1", "--grid", "1,40,1024", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x_1", "value"]
    assert len(rows) == 1 + 1024
    values = {float(r[0]): float(r[1]) for r in rows[1:]}
    assert abs(values[0.0] - 1.0 / np.sqrt(4 * np.pi)) < 1e-6


def test_solve_writes_traces_and_trajectory(config_path, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    traj = tmp_path / "traj.fld"
    code = main(
        ["solve", "--config", str(config_path), "--csv", str(trace),
         "--traj", str(traj), "--frames", "9"]
    )
    assert code == 0
    assert "classification = GlobalCandidate" in capsys.readouterr().out
    with open(trace, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "time" and len(rows) > 2
    from fujita.fieldio import read_trajectory

    times, fields, meta = read_trajectory(traj)
    assert len(fields) <= 9 and times[0] == 0.0 and meta.d == 0.5


def test_scan_and_report(config_path, tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", str(config_path), "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3  # header + 2 p values
    assert rows[1][0] == "1.5" and rows[2][0] == "2.5"
    capsys.readouterr()
    assert main(["report", "--csv", str(out)]) == 0
    text = capsys.readouterr().out
    assert "sigma" in text and "-0.5" in text
    plot = out.with_name("scan_plot.csv")
    with open(plot, newline="") as fh:
        assert next(csv.reader(fh)) == ["p", "sigma", "classification_code"]


def test_empty_scan_is_header_only(config_path, tmp_path):
    text = config_path.read_text().replace("p = [1.5, 2.5]", "p = []")
    config_path.write_text(text)
    out = tmp_path / "empty.csv"
    assert main(["scan", "--config", str(config_path), "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1


def test_report_no_rows(config_path, tmp_path, capsys):
    out = tmp_path / "empty.csv"
    text = config_path.read_text().replace("p = [1.5, 2.5]", "p = []")
    config_path.write_text(text)
    main(["scan", "--config", str(config_path), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", "--csv", str(out)]) == 0
    assert "no rows" in capsys.readouterr().out


def test_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("[model]\nd = -1.0\n")
    assert main(["solve", "--config", str(path)]) == 2
    assert "model.d" in capsys.readouterr().err


def test_malformed_csv_exits_1(tmp_path, capsys):
    path = tmp_path / "junk.csv"
    path.write_text("not,a,scan\n1,2,3\n")
    assert main(["report", "--csv", str(path)]) == 1


def test_missing_trajectory_exits_1(config_path, capsys):
    assert main(
        ["certify", "--traj", "/nonexistent.fld", "--T", "4", "--config", str(config_path)]
    ) == 1
