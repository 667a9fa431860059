import json
import subprocess
import sys

import numpy as np
import pytest

from tbswap import cli

IDEAL_INI = """
[source]
statistics = fixed

[channel.alice]
transmission = 1.0

[channel.bob]
transmission = 1.0

[detector.bsa_e]
efficiency = 1.0
dark_prob_per_gate = 0.0

[detector.bsa_f]
efficiency = 1.0
dark_prob_per_gate = 0.0

[detector.alice]
efficiency = 1.0
dark_prob_per_gate = 0.0

[detector.bob]
efficiency = 1.0
dark_prob_per_gate = 0.0
"""


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), np.array([[float(x) for x in l.split(",")] for l in lines[1:]])


def test_analytic_outputs(tmp_path):
    cfg = tmp_path / "ideal.ini"
    cfg.write_text(IDEAL_INI)
    out = tmp_path / "out"
    assert cli.main(["--config", str(cfg), "--out", str(out), "--scan-points", "8"]) == 0
    header, rows = read_csv(out / "scan.csv")
    assert tuple(header) == cli.CSV_HEADER
    assert rows.shape == (8, 9)
    a = rows[:, 1].max() / 2
    assert rows[:, 1] == pytest.approx(a * (1 + np.cos(0.0 - rows[:, 0])), abs=1e-9)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["V"] == pytest.approx(1.0)
    assert summary["classification"] == "bell_violating"
    assert summary["seed"] == 0
    assert summary["config"]["analyzers"]["scan_points"] == "8"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mode"] == "analytic" and manifest["seed"] == 0
    assert set(manifest["outputs"]) == {"csv", "summary"}


def test_lab_preset_is_bell_violating(tmp_path):
    assert cli.main(["--config", "lab", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["V"] > 0.7071
    assert summary["classification"] == "bell_violating"


def test_same_seed_same_bytes(tmp_path):
    args = ["--config", "lab", "--mode", "mc", "--pulses", "20000", "--seed", "5", "--scan-points", "6"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("scan.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["seed"] == 5 and summary["config"]["run"]["seed"] == "5"


def test_event_log(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nmode = mc\nn_pulses = 1000\nevent_log = 4\n")
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path), "--scan-points", "5"]) == 0
    lines = (tmp_path / "events.log").read_text().splitlines()
    assert sum(not l.startswith("#") for l in lines) == 20


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[source]\nmu = -1\n")
    assert cli.main(["--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "source.mu" in capsys.readouterr().err
    assert cli.main(["--config", str(tmp_path / "missing.ini")]) == 2
    assert cli.main(["--pulses", "0"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["--out", str(blocker / "sub")]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["--mode", "quantum"])
    assert exc.value.code == 2


def test_console_script_runs(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "tbswap.cli", "--config", "lab", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0
    assert "bell_violating" in r.stdout


@pytest.mark.slow
def test_selftest():
    assert cli.main(["--selftest"]) == 0
