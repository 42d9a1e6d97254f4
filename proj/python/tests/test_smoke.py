import math

import pytest

import noonsim


def small(N=3, **protocol):
    return {"protocol": {"N": N, "model": "effective", **protocol}, "output": {"samples": 21}}


def test_params_follow_the_device():
    p = noonsim.params(small(4))
    assert p["N"] == 4
    assert p["alpha0"] == pytest.approx(2.0)
    assert p["eps_n0"] == pytest.approx(0.4420, abs=1e-4)
    assert p["tau2"] > p["tau1"]


def test_effective_run_is_exact():
    r = noonsim.run(small(3))
    assert r["F"].shape == (21, 3)
    assert min(r["F_final"]) > 1 - 1e-6
    assert r["populations"].sum(axis=1) == pytest.approx(1.0, abs=1e-8)


def test_config_errors_are_typed():
    with pytest.raises(noonsim.ConfigError, match="protocol.N"):
        noonsim.params({"protocol": {}})
    with pytest.raises(noonsim.ConfigError):
        noonsim.params({"protocol": {"N": 2, "bogus": 1}})


def test_resolved_config_fills_defaults():
    c = noonsim.resolved_config(small(2))
    assert c["integrator"]["rtol"] == pytest.approx(1e-9)
    assert c["system"]["lambda_mhz"] == pytest.approx(141.42)


def test_pulse_bench():
    assert noonsim.sensitivity_q(1.0) == 0.0
    assert noonsim.two_level_transfer("pi", 0.2) == pytest.approx(math.cos(0.1 * math.pi), abs=1e-6)
    assert noonsim.two_level_transfer("optimized", 0.1) > 0.999


def test_sweep_rows_in_order():
    rows = noonsim.sweep(small(2), "delta", -0.1, 0.1, 3)
    assert [r["value"] for r in rows] == pytest.approx([-0.1, 0.0, 0.1])
    assert all(r["ok"] for r in rows)


def test_validate_clean_config():
    checks = noonsim.validate({"protocol": {"N": 2}})
    assert {c["name"] for c in checks} >= {"truncation_adequacy", "step3_resonance"}
    assert all(c["ok"] for c in checks)
