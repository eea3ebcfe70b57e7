import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from multifrac import cli, io

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(command, cfg, out, *extra):
    return cli.main([command, "--config", cfg, "--out", str(out), *extra])


def gates(out):
    hdr, rows = io.read_csv(os.path.join(out, "gates.csv"))
    return {r[0]: dict(zip(hdr, r)) for r in rows}


def test_derivative_closed_form(tmp_path):
    out = tmp_path / "d"
    assert run("operator", os.path.join(CONFIGS, "operator_derivative.json"), out) == 0
    hdr, rows = io.read_csv(out / "operator.csv")
    t = np.array([float(r[0]) for r in rows])
    y = np.array([float(r[2]) for r in rows])
    m = t >= 0.1
    exact = t[m] ** 0.6 / math.gamma(1.6)
    assert np.max(np.abs(y[m] - exact) / exact) < 1e-3


def test_inverse_check_passes(tmp_path):
    out = tmp_path / "inv"
    assert run("operator", os.path.join(CONFIGS, "operator_inverse.json"), out) == 0
    assert float(gates(out)["inverse_l2_rel"]["estimate"]) < 1e-2


def test_malformed_config_writes_nothing(tmp_path):
    out = tmp_path / "bad"
    assert run("operator", os.path.join(CONFIGS, "bad.json"), out) == 2
    assert not out.exists()


@pytest.mark.parametrize("cfg", [
    {"schema_version": 1, "h": {"family": "constant", "params": [0.3]}, "seed": "seven"},
    {"schema_version": 2, "h": {"family": "constant", "params": [0.3]}},
    {"h": {"family": "constant", "params": [0.3]}},
    {"schema_version": 1, "h": {"family": "constant", "params": [1.3]}},
])
def test_mbm_config_errors(tmp_path, cfg):
    out = tmp_path / "o"
    assert run("mbm", write_cfg(tmp_path, cfg), out) == 2
    assert not out.exists()


def test_usage_errors(tmp_path):
    cfg = os.path.join(CONFIGS, "mbm.json")
    assert cli.main(["nonsense", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert cli.main(["mbm", "--out", str(tmp_path / "x")]) == 2
    assert run("mbm", cfg, tmp_path / "x", "--threads", "0") == 2
    assert run("mbm", str(tmp_path / "missing.json"), tmp_path / "x") == 2
    assert not (tmp_path / "x").exists()


def test_brownian_mbm_passes(tmp_path):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "h": {"family": "constant", "params": [0.5]},
                               "n": 8, "npaths": 20000, "method": "both", "seed": 3})
    out = tmp_path / "bm"
    assert run("mbm", cfg, out) == 0
    g = gates(out)
    assert g["cholesky_vs_kernel_max_z"]["pass"] == "true"
    hdr, rows = io.read_csv(out / "covariance.csv")
    diag = [r for r in rows if r[0] == r[1]]
    # oracle variance of Brownian motion is t
    assert all(abs(float(r[4]) - float(r[2])) < 1e-12 for r in diag)


def test_girsanov_zero_drift_weights(tmp_path):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "h": {"family": "affine", "params": [0.2, 0.1]},
                               "n": 16, "npaths": 500, "drifts": [{"kind": "constant", "params": [0.0]}],
                               "law_drift": {"kind": "constant", "params": [0.0]},
                               "lattice": None})
    out = tmp_path / "g"
    assert run("girsanov", cfg, out) == 0
    hdr, rows = io.read_csv(out / "weights.csv")
    assert hdr == ["path", "EZ_constant_0"]
    assert all(float(r[1]) == 1.0 for r in rows)


@pytest.mark.parametrize("h", [{"family": "constant", "params": [0.5]},
                               {"family": "affine", "params": [0.3, 0.3]}])
def test_girsanov_rough_h_rejected(tmp_path, h):
    out = tmp_path / "g"
    assert run("girsanov", write_cfg(tmp_path, {"schema_version": 1, "h": h}), out) == 2
    assert not out.exists()


def test_girsanov_bad_rho_rejected(tmp_path):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "h": {"family": "constant", "params": [0.3]},
                               "krylov_rho": 1.2})
    assert run("girsanov", cfg, tmp_path / "g") == 2
    assert not (tmp_path / "g").exists()


def test_operator_nonzero_start_rejected(tmp_path):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "task": "derivative",
                               "alpha": {"family": "constant", "params": [0.4]}, "function": {"name": "cos"}})
    assert run("operator", cfg, tmp_path / "o") == 2


def test_report_empty_and_missing(tmp_path):
    assert run("report", write_cfg(tmp_path, {"schema_version": 1, "inputs": []}), tmp_path / "r") == 2
    cfg = write_cfg(tmp_path, {"schema_version": 1, "inputs": [str(tmp_path / "nowhere")]}, "c2.json")
    assert run("report", cfg, tmp_path / "r") == 2
    assert not (tmp_path / "r").exists()


@pytest.fixture(scope="module")
def mbm_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("mbm")
    cfg = base / "cfg.json"
    cfg.write_text(json.dumps({"schema_version": 1, "h": {"family": "affine", "params": [0.2, 0.6]},
                               "n": 8, "npaths": 2000, "method": "both", "seed": 1}))
    outs = {}
    for th in (1, 3):
        outs[th] = base / f"t{th}"
        assert cli.main(["mbm", "--config", str(cfg), "--out", str(outs[th]), "--threads", str(th)]) == 0
    return outs


def test_threads_bit_identical(mbm_run):
    for name in ("paths.csv", "covariance.csv", "gates.csv"):
        assert (mbm_run[1] / name).read_bytes() == (mbm_run[3] / name).read_bytes()


def test_config_and_manifest(mbm_run):
    out = mbm_run[1]
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["seed"] == 1 and cfg["fine_factor"] == 4 and "threads" not in cfg
    man = json.loads((out / "manifest.json").read_text())
    files = {e["file"] for e in man["files"]}
    assert {"paths.csv", "covariance.csv", "gates.csv", "summary.json"} <= files
    for e in man["files"]:
        assert e["sha256"] == io.sha256(os.path.join(out, e["file"]))


def test_seed_override(tmp_path):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "h": {"family": "constant", "params": [0.3]},
                               "n": 4, "npaths": 200, "seed": 1})
    run("mbm", cfg, tmp_path / "a", "--seed", "9")
    run("mbm", cfg, tmp_path / "b", "--seed", "1")
    assert json.loads((tmp_path / "a" / "config.json").read_text())["seed"] == 9
    assert (tmp_path / "a" / "paths.csv").read_bytes() != (tmp_path / "b" / "paths.csv").read_bytes()


def test_report_from_one_mbm_run(tmp_path, mbm_run):
    cfg = write_cfg(tmp_path, {"schema_version": 1, "inputs": [str(mbm_run[1])]})
    out = tmp_path / "rep"
    assert run("report", cfg, out) == 0
    svgs = sorted(p.name for p in out.glob("*.svg"))
    assert svgs == ["t1_covariance_diagonal.svg", "t1_gates.svg", "t1_paths.svg"]
    _, rows = io.read_csv(out / "summary.csv")
    assert len(rows) == len(gates(mbm_run[1]))


def test_gate_failure_exit_code(tmp_path):
    # an impossible tolerance makes the inverse gate fail
    cfg = write_cfg(tmp_path, {"schema_version": 1, "task": "inverse_check", "n": 64, "tolerance": 1e-15,
                               "alpha": {"family": "constant", "params": [0.4]}, "function": {"name": "cos"}})
    out = tmp_path / "f"
    assert run("operator", cfg, out) == 1
    s = json.loads((out / "summary.json").read_text())
    assert s["all_gates_pass"] is False


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "multifrac.cli", "operator", "--config",
                        os.path.join(CONFIGS, "bad.json"), "--out", str(tmp_path / "o")],
                       capture_output=True, text=True)
    assert r.returncode == 2 and "bogus" in r.stderr
