import csv
import json
import math
import subprocess
import sys

import pytest

from dirac_embed.cli import RunConfig, log_grid, main


def _run(tmp_path, cfg, command="verify", extra=(), name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out_{command}_{name}"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


SUPER = {"mode": "supercritical", "lambda": 1, "A": 2, "theta": 0.4}
BUMP = {"mode": "bump", "lambda": 1, "theta": 0.2, "x0": 300, "x1": 900,
        "targets": [[-1, 0.5], [3.5, 1.0]]}


def test_construct_supercritical_row_at_nine(tmp_path):
    code, out = _run(tmp_path, SUPER, "construct")
    assert code == 0
    text = (out / "potential.csv").read_text()
    assert text.splitlines()[0] == "x,V,phi,p,q,envelope"
    row = next(r for r in _rows(out / "potential.csv") if float(r["x"]) == 9.0)
    assert float(row["envelope"]) == pytest.approx(0.2, abs=1e-15)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema_version"] == 1 and manifest["config"]["A"] == 2.0


def test_log_grid_density():
    x = log_grid(0.0, 999.0, 64)
    assert len(x) == 3 * 64 + 1 and x[64] == 9.0 and x[-1] == 999.0


def test_construct_bump_zero_outside(tmp_path):
    code, out = _run(tmp_path, BUMP, "construct")
    assert code == 0
    rows = _rows(out / "potential.csv")
    outside = [r for r in rows if not 300.0 < float(r["x"]) < 900.0]
    assert outside and all(r["envelope"] == "0" for r in outside)
    assert any(float(r["envelope"]) > 0 for r in rows)


def test_construct_multi_manifest(tmp_path):
    cfg = {"mode": "multi", "targets": [[1, 0.2], [-1, 1.1]], "n_blocks": 2}
    code, out = _run(tmp_path, cfg, "construct")
    assert code == 0
    con = json.loads((out / "manifest.json").read_text())["construction"]
    assert len(con["targets"]) == 2
    assert [p["target"] for p in con["schedule"]["pieces"]] == [0, 1, 0, 1]
    assert "K_gaps" in con and con["C_amp"] == 110.0


def test_verify_supercritical(tmp_path):
    code, out = _run(tmp_path, SUPER)
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["alpha"] == pytest.approx(2.0, abs=1e-6)
    assert cert["l2_verdict"] == "converging"
    assert set(cert) >= {"alpha", "residual", "l2_verdict", "bump_certificates",
                         "oscillatory_fit", "schema_version"}
    assert (out / "trajectory_0.csv").read_text().startswith("x,lnR,theta\n")


def test_verify_no_eigenvalue(tmp_path):
    cfg = {"mode": "supercritical", "lambda": 1, "A": 0.4, "theta": 0.3,
           "expect": "no-eigenvalue"}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["checks"]["lower_bound"]["passed"]
    assert cert["l2_verdict"] == "diverging"


def test_verify_bump_negative_control(tmp_path, capsys):
    code, out = _run(tmp_path, dict(BUMP, C_amp=50))
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["failed"] == ["bump_decay_exponent"]


def test_verify_bump_passes(tmp_path):
    code, out = _run(tmp_path, BUMP)
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["bump_certificates"][0]["passed"]
    assert set(cert["oscillatory_fit"]) == {"-1.0", "3.5"}
    assert (out / "trajectory_2.csv").exists()


def test_verify_critical(tmp_path):
    code, out = _run(tmp_path, {"mode": "critical", "lambda": 1, "theta": 0.2, "n_max": 2})
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert all(c["passed"] for c in cert["checks"].values())


def test_sweep_threshold_flip(tmp_path):
    grid = {"A": [0.3, 0.4, 0.5, 0.6, 0.7], "lambda": [-1, 1]}
    code, out = _run(tmp_path, {"grid": grid, "theta": 0.4}, "sweep")
    assert code == 0
    rows = _rows(out / "summary.csv")
    assert len(rows) == 10
    for r in rows:
        A = float(r["A"])
        if A <= 0.4:
            assert r["l2_verdict"] == "diverging"
        elif A >= 0.6:
            assert r["l2_verdict"] == "converging"


def test_sweep_empty_grid(tmp_path):
    code, out = _run(tmp_path, {"grid": {"A": []}}, "sweep")
    assert code == 0
    assert (out / "summary.csv").read_text() == "A,lambda,alpha,l2_verdict\n"


def test_sweep_repeated_rows_and_jobs(tmp_path):
    grid = {"grid": {"A": [0.6, 0.6, 0.3], "lambda": [2.0]}}
    _, serial = _run(tmp_path, grid, "sweep", name="a.json")
    _, parallel = _run(tmp_path, grid, "sweep", extra=("--jobs", "3"), name="b.json")
    text = (serial / "summary.csv").read_text()
    lines = text.splitlines()
    assert lines[1] == lines[2]
    assert (parallel / "summary.csv").read_text() == text


def test_sweep_partial_failure_recorded(tmp_path):
    code, out = _run(tmp_path, {"grid": {"A": [-1.0, 0.6], "lambda": [1.0]}}, "sweep")
    assert code == 0
    rows = _rows(out / "summary.csv")
    assert rows[0]["l2_verdict"].startswith("error") and rows[0]["alpha"] == "nan"
    assert rows[1]["l2_verdict"] == "converging"


def test_determinism_byte_identical(tmp_path):
    _, a = _run(tmp_path, BUMP, name="a.json", extra=("--seed", "7"))
    _, b = _run(tmp_path, BUMP, name="b.json", extra=("--seed", "7"))
    for name in ("certificate.json", "trajectory_0.csv", "trajectory_1.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_manifest_round_trip(tmp_path):
    code, built = _run(tmp_path, BUMP, "construct")
    assert code == 0
    code, direct = _run(tmp_path, BUMP, name="direct.json")
    manifest = json.loads((built / "manifest.json").read_text())
    code2, again = _run(tmp_path, manifest, name="manifest.json")
    assert code == code2 == 0
    assert (direct / "certificate.json").read_bytes() == (again / "certificate.json").read_bytes()


def test_no_temp_files_left(tmp_path):
    _, out = _run(tmp_path, SUPER, "construct")
    assert sorted(p.name for p in out.iterdir()) == ["manifest.json", "potential.csv"]


def test_angles_in_degrees():
    cfg = RunConfig.from_dict({"mode": "supercritical", "lambda": 1, "A": 1,
                               "theta": 200.0, "angle_unit": "deg"})
    assert cfg.theta == pytest.approx(math.radians(20.0))
    cfg = RunConfig.from_dict({"mode": "multi", "angle_unit": "deg",
                               "targets": [{"lambda": 1, "theta": 90}, [2, -45]]})
    assert cfg.targets[0][1] == pytest.approx(math.pi / 2)
    assert cfg.targets[1][1] == pytest.approx(3 * math.pi / 4)


@pytest.mark.parametrize("cfg", [
    {"mode": "nope"},
    {"mode": "supercritical", "lambda": 1},
    {"mode": "supercritical", "lambda": 1, "A": 2, "tol": -1},
    {"mode": "multi", "targets": [[1, 0], [1, 0.5]]},
    {"mode": "multi", "targets": [[1, 0]], "h": "cubic"},
    {"mode": "supercritical", "lambda": 1, "A": 2, "colour": "red"},
    {"mode": "bump", "lambda": 1, "x0": 100, "x1": 200, "targets": [[-1, 0]]},
])
def test_config_errors_exit_one(tmp_path, capsys, cfg):
    code, _ = _run(tmp_path, cfg)
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["status"] == "error" and err["message"]


def test_wrong_expectation_fails_checks(tmp_path, capsys):
    # an eigenvalue is claimed but the amplitude is below one half
    cfg = {"mode": "supercritical", "lambda": 1, "A": 0.3, "expect": "eigenvalue"}
    code, _ = _run(tmp_path, cfg)
    assert code == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["status"] == "fail"


def test_missing_config_file(tmp_path, capsys):
    assert main(["verify", "--config", str(tmp_path / "none.json")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_usage_error():
    assert main(["frobnicate"]) == 1


def test_tol_override(tmp_path):
    _, out = _run(tmp_path, SUPER, extra=("--tol", "1e-7"))
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["config"]["tol"] == 1e-7


def test_module_entry_point(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"mode": "nope"}))
    proc = subprocess.run([sys.executable, "-m", "dirac_embed", "verify", "--config", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "ConfigError"
