import json
import subprocess
import sys

import numpy as np
import pytest

from dyadicpara import ContractError, Signal, generate_signal, normalize, rectangle
from dyadicpara.harness import (
    SUITES,
    ExperimentConfig,
    report_json,
    run_suite,
    run_sweep,
)


def _cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "dyadicpara.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


# -- generators --------------------------------------------------------------


def test_generate_constant_and_indicator():
    one = generate_signal("constant", 1, 4, params={"c": 1.0})
    assert np.allclose(one.values, 1.0)
    ind = generate_signal("indicator", 1, 4, params={"rect": [[1, 0]]})
    assert np.array_equal(ind.values, Signal.indicator(rectangle((1, 0)), 4).values)


def test_generate_determinism():
    a = generate_signal("random-haar", 2, 4, seed=7)
    b = generate_signal("random-haar", 2, 4, seed=7)
    assert np.array_equal(a.values, b.values)
    c = generate_signal("random-haar", 2, 4, seed=8)
    assert not np.array_equal(a.values, c.values)


def test_generate_bump_unit_norm():
    f = generate_signal("bump", 1, 6, params={"rect": [[2, 1]]})
    assert np.sum(f.values**2) * f.cell_measure == pytest.approx(1.0, rel=1e-12)


def test_generate_unknown_kind():
    with pytest.raises(ContractError):
        generate_signal("perlin", 1, 4)


def test_normalize():
    f = normalize(Signal.constant(1, 3, 5.0), 2.0)
    assert np.allclose(f.values, 1.0)
    with pytest.raises(ContractError):
        normalize(Signal.zeros(1, 3), 2.0)


# -- configs and reports ------------------------------------------------------


def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig(suite="domination", d=2, L=4, L_list=(3, 4), seed=9)
    data = cfg.to_json()
    clone = ExperimentConfig.from_json(data)
    assert clone == cfg
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    assert ExperimentConfig.from_file(path) == cfg


def test_report_determinism():
    cfg = ExperimentConfig(suite="norms", d=1, L=5, trials=10, seed=3)
    rep1 = SUITES["norms"](cfg)
    rep2 = SUITES["norms"](cfg)
    body1 = {k: v for k, v in rep1.items() if k != "meta"}
    body2 = {k: v for k, v in rep2.items() if k != "meta"}
    assert report_json({"x": body1}) == report_json({"x": body2})


def test_run_suite_writes_report(tmp_path):
    out = tmp_path / "rep.json"
    cfg = ExperimentConfig(
        suite="norms", d=1, L=5, trials=5, seed=1, out=str(out), format="csv"
    )
    report, code = run_suite(cfg)
    assert code == 0 and report["passed"]
    data = json.loads(out.read_text())
    assert data["suite"] == "norms"
    assert {c["id"] for c in data["checks"]} >= {"holder-pairing", "weak-below-strong"}
    assert out.with_suffix(".csv").exists()


def test_run_suite_unknown():
    with pytest.raises(KeyError):
        run_suite(ExperimentConfig(suite="bogus"))


def test_sweep_rows_and_stability(tmp_path):
    cfg = ExperimentConfig(
        suite="sweep",
        d=2,
        L_list=(3, 4, 5),
        trials=20,
        seed=0,
        p1=4.0,
        p2=4.0,
        r=2.0,
        out=str(tmp_path / "sweep.json"),
        format="csv",
    )
    rep = run_sweep(cfg)
    assert [row["L"] for row in rep["rows"]] == [3, 4, 5]
    assert all(row["max_ratio"] > 0 for row in rep["rows"])
    assert (tmp_path / "sweep.csv").exists()
    with pytest.raises(ContractError):
        run_sweep(ExperimentConfig(suite="sweep", L_list=(4,)))


# -- CLI ----------------------------------------------------------------------


def test_cli_gen_norm_round_trip(tmp_path):
    sig = tmp_path / "f.csv"
    r = _cli("gen", "--kind", "random-haar", "--d", "1", "--L", "5",
             "--seed", "7", "--out", str(sig))
    assert r.returncode == 0
    r2 = _cli("norm", "--in", str(sig), "--d", "1", "--L", "5",
              "--norm", "lp", "--p", "2")
    assert r2.returncode == 0
    payload = json.loads(r2.stdout)
    assert payload["parameters"]["kind"] == "lp"
    assert payload["norm"] > 0


def test_cli_gen_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _cli("gen", "--kind", "random-cells", "--d", "1", "--L", "4", "--seed", "3",
         "--out", str(a))
    _cli("gen", "--kind", "random-cells", "--d", "1", "--L", "4", "--seed", "3",
         "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_cli_transform_inverse(tmp_path):
    sig = tmp_path / "f.csv"
    coef = tmp_path / "c.json"
    back = tmp_path / "g.csv"
    _cli("gen", "--kind", "random-haar", "--d", "1", "--L", "4", "--seed", "2",
         "--out", str(sig))
    assert _cli("transform", "--in", str(sig), "--d", "1", "--L", "4",
                "--out", str(coef)).returncode == 0
    assert _cli("transform", "--inverse", "--in", str(coef),
                "--out", str(back)).returncode == 0
    f = np.loadtxt(sig)
    g = np.loadtxt(back)
    assert np.abs(f - g).max() < 1e-12


def test_cli_verify_pass():
    r = _cli("verify", "norms", "--d", "1", "--L", "5", "--trials", "5", "--seed", "1")
    assert r.returncode == 0
    assert "[pass]" in r.stdout


def test_cli_verify_contract_error_exit_2():
    r = _cli("verify", "domination", "--d", "1", "--L", "4", "--trials", "2",
             "--family", "abs-haar")
    assert r.returncode == 2
    assert "contract error" in r.stderr


def test_cli_unknown_suite_exit_64():
    r = _cli("verify", "not-a-suite", "--d", "1", "--L", "4")
    assert r.returncode == 64


def test_cli_usage_error_exit_64():
    r = _cli("norm")  # missing required --in
    assert r.returncode == 64


def test_cli_paraproduct(tmp_path):
    f1, f2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
    _cli("gen", "--kind", "random-haar", "--d", "1", "--L", "4", "--seed", "1",
         "--out", str(f1))
    _cli("gen", "--kind", "random-haar", "--d", "1", "--L", "4", "--seed", "2",
         "--out", str(f2))
    r = _cli("paraproduct", "--f1", str(f1), "--f2", str(f2), "--d", "1", "--L", "4")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["l1"] > 0 and payload["l2"] > 0


def test_cli_config_file(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps({"suite": "norms", "d": 1, "L": 5, "trials": 4, "seed": 11})
    )
    r = _cli("verify", "norms", "--config", str(cfg_path))
    assert r.returncode == 0
