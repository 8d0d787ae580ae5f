import csv
import json
import os

import numpy as np
import pytest

from nhssh.cli import main, parse_grid, ConfigError


def _read_csv(path):
    comments, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                rows.append(line)
    parsed = list(csv.reader(rows))
    return comments, parsed[0], parsed[1:]


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("0:1:5"), [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(parse_grid("2:2:1"), [2.0])
    with pytest.raises(ConfigError):
        parse_grid("0:1")
    with pytest.raises(ConfigError):
        parse_grid("1:0:5")
    with pytest.raises(ConfigError):
        parse_grid("0:1:0")


def test_spectrum_csv_schema(tmp_path):
    out = tmp_path / "spec.csv"
    rc = main(["spectrum", "--t1", "1.1", "--delta", "0.8", "--L", "10",
               "--out", str(out), "--no-plot"])
    assert rc == 0
    comments, header, rows = _read_csv(out)
    assert len(comments) == 2
    assert comments[0].startswith("# nhssh spectrum v")
    assert header == ["t1", "t2", "delta", "length", "source", "index", "re_e", "im_e"]
    assert len(rows) == 40  # 20 open modes + 20 bulk reference modes
    for row in rows:
        assert float(row[0]) == pytest.approx(1.1)
        assert float(row[2]) == pytest.approx(0.8)
        assert int(row[3]) == 10
    sources = {row[4] for row in rows}
    assert sources == {"open", "bulk"}


def test_sidecar_structure(tmp_path):
    out = tmp_path / "spec.csv"
    main(["spectrum", "--t1", "1.1", "--delta", "0.2", "--L", "8",
          "--out", str(out), "--no-plot"])
    side = json.loads((tmp_path / "spec.csv.json").read_text())
    assert side["task"] == "spectrum"
    assert side["config"]["t1"] == pytest.approx(1.1)
    assert side["config"]["L"] == 8
    assert "wall_time_s" in side
    assert side["results"]["max_band_distance"] < 1e-6


def test_round_trip_byte_identical(tmp_path):
    first = tmp_path / "a.csv"
    rc = main(["thermo", "--t1", "1.1", "--delta", "0.8", "--L", "16",
               "--T-range", "0.05:0.5:6", "--out", str(first), "--no-plot"])
    assert rc == 0
    second = tmp_path / "b.csv"
    rc = main(["thermo", "--config", str(first) + ".json",
               "--out", str(second), "--no-plot"])
    assert rc == 0
    assert first.read_bytes() == second.read_bytes()


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t1=1.1\ndelta=0.8\nL=8\n")
    out = tmp_path / "o.csv"
    rc = main(["spectrum", "--config", str(cfg), "--delta", "0.2",
               "--out", str(out), "--no-plot"])
    assert rc == 0
    _, _, rows = _read_csv(out)
    assert float(rows[0][2]) == pytest.approx(0.2)


def test_jobs_do_not_change_output(tmp_path):
    args = ["ee", "--t1", "1.1", "--L", "8", "--delta-range", "0.1:1.3:4",
            "--no-plot"]
    one = tmp_path / "one.csv"
    two = tmp_path / "two.csv"
    assert main(args + ["--jobs", "1", "--out", str(one)]) == 0
    assert main(args + ["--jobs", "2", "--out", str(two)]) == 0
    assert one.read_bytes() == two.read_bytes()


def test_config_error_exit_codes(tmp_path):
    assert main(["thermo", "--T-range", "0.1:0.5", "--out",
                 str(tmp_path / "x.csv")]) == 2
    assert main(["thermo", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["ee-scaling", "--out", str(tmp_path / "x.csv")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key=3\n")
    assert main(["spectrum", "--config", str(bad)]) == 2
    assert main(["spectrum", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_task_mismatch_rejected(tmp_path):
    out = tmp_path / "s.csv"
    main(["spectrum", "--t1", "1.1", "--L", "6", "--out", str(out), "--no-plot"])
    assert main(["ee", "--config", str(out) + ".json",
                 "--out", str(tmp_path / "e.csv")]) == 2


def test_numeric_failure_names_point(tmp_path, capsys):
    # A stencil straddling the nbbc boundary at delta = 1.1 must abort with
    # exit 3 and say where.
    rc = main(["derivatives", "--t1", "1.1", "--L", "8",
               "--delta-range", "1.09:1.11:3", "--step", "0.01",
               "--out", str(tmp_path / "d.csv"), "--no-plot"])
    assert rc == 3
    err = capsys.readouterr().err
    assert "numeric failure" in err
    assert "t1=1.1" in err


def test_figure_rendering_toggle(tmp_path):
    out = tmp_path / "fig.csv"
    main(["spectrum", "--t1", "1.1", "--delta", "0.5", "--L", "6", "--out", str(out)])
    assert (tmp_path / "fig.png").exists()
    out2 = tmp_path / "nofig.csv"
    main(["spectrum", "--t1", "1.1", "--delta", "0.5", "--L", "6",
          "--out", str(out2), "--no-plot"])
    assert not (tmp_path / "nofig.png").exists()


def test_itc_report_line(tmp_path, capsys):
    out = tmp_path / "itc.csv"
    rc = main(["itc", "--t1", "1.1", "--delta", "1.6", "--L", "40",
               "--beta-max", "60", "--beta-points", "600",
               "--out", str(out), "--no-plot"])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "measured_period=" in stdout
    assert "predicted=" in stdout


def test_itc_no_peaks_still_writes_data(tmp_path, capsys):
    out = tmp_path / "quiet.csv"
    rc = main(["itc", "--t1", "1.1", "--delta", "0.5", "--L", "40",
               "--beta-range", "1:20:50", "--out", str(out), "--no-plot"])
    assert rc == 0
    assert "no_peaks_detected" in capsys.readouterr().out
    _, _, rows = _read_csv(out)
    assert len(rows) == 50


def test_ee_scaling_reports_fit(tmp_path, capsys):
    out = tmp_path / "sc.csv"
    rc = main(["ee-scaling", "--t1", "1.0", "--L-list", "8,12,16,20,24",
               "--cut", "half", "--out", str(out), "--no-plot"])
    assert rc == 0
    assert "central_charge=" in capsys.readouterr().out
    side = json.loads((tmp_path / "sc.csv.json").read_text())
    assert "slope" in side["results"]


def test_phase_diagram_counts(tmp_path):
    out = tmp_path / "pd.csv"
    rc = main(["phase-diagram", "--t1-range", "0.6:1.4:5",
               "--delta-range", "0.1:1.9:5", "--out", str(out), "--no-plot"])
    assert rc == 0
    _, header, rows = _read_csv(out)
    assert header == ["t1", "t2", "delta", "winding", "label", "protected"]
    assert len(rows) == 25
    labels = {row[4] for row in rows}
    assert "TopoProtected" in labels
