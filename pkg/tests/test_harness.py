import csv
import json
import math
import subprocess
import sys

import pytest

from gkdv.container import load_trajectory
from gkdv.harness.cli import main
from gkdv.harness.config import (
    KINDS,
    ConfigError,
    default_config,
    load_config,
    parse_config_text,
    resolve_axis,
)
from gkdv.harness.experiments import METRICS

TINY = """\
[experiment]
kind = conservation
id = tiny
seed = 3

[grid]
box_length = 64
n_points = 256

[solver]
dt = 0.001
t_final = 0.1
record_stride = 25

[datum]
family = gaussian
amplitude = 0.5

[params]
mass_tol = 1e-6
energy_tol = 1e-4

[output]
trajectory = true
"""


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("kind", KINDS)
def test_defaults_parse_and_cover_metrics(kind):
    cfg = default_config(kind)
    assert cfg.kind == kind and cfg.id == kind
    again = parse_config_text(f"[experiment]\nkind = {kind}\n")
    assert again.as_dict()["params"] == cfg.as_dict()["params"]
    assert kind in METRICS


def test_parse_full_file(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    cfg = load_config(path)
    assert (cfg.id, cfg.seed) == ("tiny", 3)
    assert cfg.grid == {"box_length": 64.0, "n_points": 256}
    assert cfg.datum["amplitude"] == 0.5 and cfg.datum["width"] == 1.0
    assert cfg.output["trajectory"] is True


@pytest.mark.parametrize(
    "text, needle",
    [
        ("[experiment]\nkind = conservation\n\n[solver]\nbogus = 1\n", "<string>:5: unknown key 'bogus'"),
        ("[experiment]\nkind = conservation\n[extra]\na = 1\n", "unknown section"),
        ("[experiment]\nkind = nope\n", "<string>:2: unknown experiment kind"),
        ("[grid]\nn_points = 64\n", "kind is required"),
        ("[experiment]\nkind = scaling\n[grid]\nn_points = 100\n", "power of two"),
        ("[experiment]\nkind = scaling\n[solver]\ndt = fast\n", "<string>:4: bad value"),
        ("[experiment]\nkind = scaling\nseed = -1\n", "bad value"),
        ("[experiment]\nkind = scaling\n[datum]\nfamily = square\n", "unknown datum family"),
        ("[experiment]\nkind = scaling\n[datum]\nxi_cut = 2\n", "unknown key 'xi_cut'"),
        ("not an ini file", "<string>"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=None) as info:
        parse_config_text(text)
    assert needle in str(info.value)


def test_family_switch_drops_old_keys():
    cfg = parse_config_text("[experiment]\nkind = scaling\n[datum]\nfamily = random\nxi_cut = 2\n")
    assert cfg.datum == {"family": "random", "xi_cut": 2.0}


def test_with_value_and_axes():
    cfg = default_config("morawetz_truncated")
    assert resolve_axis(cfg, "R") == ("params", "R")
    assert cfg.with_value("params.R", 16).params["R"] == [16.0]
    assert cfg.with_value("dt", "0.001").solver["dt"] == 0.001
    assert cfg.params["R"] == [8.0, 16.0, 32.0, 64.0]  # original untouched
    with pytest.raises(ConfigError):
        resolve_axis(cfg, "nope")
    with pytest.raises(ConfigError, match="power of two"):
        cfg.with_value("n_points", 100)


def test_run_writes_artifacts(tmp_path, capsys):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    assert "PASS tiny" in capsys.readouterr().out
    rows = _rows(out / "results.csv")
    assert list(rows[0]) == ["experiment_id", "kind", "seed", *METRICS["conservation"], "passed"]
    assert rows[0]["seed"] == "3" and rows[0]["passed"] == "true"
    assert float(rows[0]["mass_drift"]) < 1e-6
    summary = json.loads((out / "summary.json").read_text())
    assert "timestamp" in summary and "drift.svg" in summary["artifacts"]
    assert (out / "drift.svg").read_text().startswith("<?xml")
    traj = load_trajectory(out / "trajectory.gkdvtrj")
    assert len(traj) == 5 and traj.grid.n_points == 256


def test_run_csv_is_byte_identical(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    for d in ("a", "b"):
        assert main(["run", str(path), "--out", str(tmp_path / d), "--seed", "99"]) == 0
    a, b = ((tmp_path / d / "results.csv").read_bytes() for d in ("a", "b"))
    assert a == b
    assert b",99," in a
    sa, sb = ((tmp_path / d / "drift.svg").read_bytes() for d in ("a", "b"))
    assert sa == sb


@pytest.mark.parametrize("kind", ["admissible", "envelope", "positivity"])
def test_run_by_kind_name(kind, tmp_path):
    assert main(["run", kind, "--out", str(tmp_path)]) == 0
    assert _rows(tmp_path / "results.csv")[0]["kind"] == kind


def test_sweep_rows_and_aggregate(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    assert main(["sweep", str(path), "--axis", "amplitude", "--values", "0.25,0.5", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "results.csv")
    assert [r["amplitude"] for r in rows] == ["0.25", "0.5"]
    assert rows[0]["experiment_id"] == "tiny[amplitude=0.25]"
    assert rows[0]["sweep_slope"] == rows[1]["sweep_slope"] != "nan"


def test_sweep_records_member_failure(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    # dt = 1 violates the step-size bound for this grid
    assert main(["sweep", str(path), "--axis", "dt", "--values", "0.001,1.0", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "results.csv")
    assert rows[0]["passed"] == "true" and rows[0]["error"] == ""
    assert rows[1]["passed"] == "false" and rows[1]["error"] and rows[1]["mass_drift"] == "nan"


def test_empty_sweep(tmp_path):
    assert main(["sweep", "admissible", "--axis", "seed", "--values", "", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "results.csv").read_text()
    assert text.count("\n") == 1 and text.startswith("seed,experiment_id")


def test_malformed_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nkind = scaling\nbogus = 1\n")
    assert main(["run", str(bad)]) == 2
    assert f"{bad}:3: unknown key 'bogus'" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    with pytest.raises(SystemExit):
        main(["run", "admissible", "--seed", str(2**64)])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gkdv", "run", "admissible", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("PASS admissible")


def test_seed_accepts_full_u64(tmp_path):
    assert main(["run", "admissible", "--out", str(tmp_path), "--seed", str(2**64 - 1)]) == 0
    assert _rows(tmp_path / "results.csv")[0]["seed"] == str(2**64 - 1)
    assert math.isfinite(float(_rows(tmp_path / "results.csv")[0]["accepted"]))
