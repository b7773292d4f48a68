"""Experiment runners at reduced scale; the acceptance predicates are the production ones."""
import json
import os

import pandas as pd
import pytest

from bbm_lab.config import Settings, load_config
from bbm_lab.experiments import RUNNERS, data_norms
from bbm_lab.experiments.common import ResultRow, run_node
from bbm_lab.graph import build_graph, run_sweep

COARSE = {"grid": {"delta_xi": 0.25}}


def _failed(result):
    return [f"{c.name}: {c.detail}" for c in result.checks if not c.passed]


def _settings(workdir):
    return Settings(workers=2, outputs_dir=str(workdir / "outputs"), log_level="INFO")


def test_theta_scan(workdir):
    cfg = load_config("theta_scan", overrides={"theta": {"extent": 2.0, "step": 0.5, "samples": 4096}})
    result = RUNNERS["theta_scan"](cfg)
    assert not _failed(result)
    assert {c.name for c in result.checks} == {
        "identity", "spot_value", "near_resonant_decay", "kernel_bounds", "kernel_switch"}
    frame = pd.read_csv(os.path.join(cfg.output_dir, "theta_scan.csv"))
    assert list(frame.columns) == ["xi", "xi1", "theta"]
    assert len(frame) == 81
    assert frame["theta"].abs().max() < 1.5


def test_data_norms_sharp(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [8, 16, 32], "s_list": [-0.5, -1.0]})
    result = RUNNERS["data_norms"](cfg, workers=2)
    assert not _failed(result)
    assert len(result.rows) == 6
    assert result.diagnostics["slopes"]["-0.5"] == pytest.approx(-0.5, abs=0.05)


def test_data_norms_flat_slope_at_l2(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [8, 16, 32], "s_list": [0.0]})
    result = RUNNERS["data_norms"](cfg)
    assert not _failed(result)
    assert abs(result.diagnostics["slopes"]["0"]) <= 0.02
    assert "hs_slope[s=0]" in {c.name for c in result.checks}


def test_data_norms_flat_slope_tolerance_is_tight(workdir, monkeypatch):
    cfg = load_config("data_norms", overrides={"N_list": [8, 16], "s_list": [0.0]})
    for slope, ok in [(0.015, True), (0.03, False)]:
        monkeypatch.setattr(data_norms, "loglog_slope", lambda xs, ys, value=slope: value)
        passed = {c.name: c.passed for c in data_norms.run_data_norms(cfg).checks}
        assert passed["hs_slope[s=0]"] is ok


def test_data_norms_periodic(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [8, 16, 32], "grid": {"mode": "periodic"}})
    result = RUNNERS["data_norms"](cfg)
    assert not _failed(result)
    assert "zero_mode" in {c.name for c in result.checks}
    assert all(r.norm_data_l2 == pytest.approx(6.0 ** 0.5) for r in result.rows)


def test_data_norms_scaled_family_is_normalized(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [16, 64], "family": "bt_scaled", "s_list": [-0.5]})
    result = RUNNERS["data_norms"](cfg)
    assert not _failed(result)
    assert all(c.name.startswith("hs_slope") for c in result.checks)


def test_i2_inflation_on_the_line(workdir):
    cfg = load_config("i2_inflation", overrides={"N_list": [8, 16], "quadrature": {"Q": 64}, **COARSE})
    result = RUNNERS["i2_inflation"](cfg, workers=2)
    assert not _failed(result)
    names = {c.name for c in result.checks}
    assert {"inflation[s=-0.5]", "low_band_mass[s=-0.5]", "data_decay[s=-0.5]",
            "time_doubling[s=-0.5]", "a_xi_measure"} <= names
    assert max(r.method_discrepancy for r in result.rows) <= 1e-6
    assert all(0 < r.extras["low_share"] < 1 for r in result.rows)


def test_i2_inflation_periodic(workdir):
    cfg = load_config("i2_inflation", overrides={
        "N_list": [8, 16], "quadrature": {"Q": 64}, "grid": {"mode": "periodic"}})
    result = RUNNERS["i2_inflation"](cfg)
    assert not _failed(result)
    assert result.diagnostics["low_band"] == 2.0
    assert "zero_mode" in {c.name for c in result.checks}


def test_series_approx(workdir):
    cfg = load_config("series_approx", overrides={
        "N_list": [8], "quadrature": {"Q": 64}, "solver": {"dt": 0.01}, **COARSE})
    result = RUNNERS["series_approx"](cfg)
    assert not _failed(result)
    assert sorted({r.eps for r in result.rows}) == [0.025, 0.05]
    row = result.rows[0]
    assert set(row.extras) == {"tail_norm"} | {f"norm_I{k}_hs" for k in range(1, 7)}
    # the reported iterate uses the -i normalization, twice the series coefficient
    assert row.norm_I2_hs == pytest.approx(2.0 * row.extras["norm_I2_hs"])
    assert all(7.0 <= ratio <= 9.0 for ratio in result.diagnostics["residual_halving"].values())
    assert any(c.name.startswith("tail_halving") for c in result.checks)


def test_series_approx_zero_data(workdir):
    cfg = load_config("series_approx", overrides={
        "N_list": [8], "eps": 0.0, "K": 3, "quadrature": {"Q": 16}, "solver": {"dt": 0.05}, **COARSE})
    result = RUNNERS["series_approx"](cfg)
    assert [c.name for c in result.checks] == ["zero_data"]
    assert not _failed(result)


def test_discontinuity(workdir):
    cfg = load_config("discontinuity", overrides={"N_list": [8, 16], "solver": {"dt": 0.01}, **COARSE})
    result = RUNNERS["discontinuity"](cfg, workers=2)
    assert not _failed(result)
    names = {c.name for c in result.checks}
    assert {"lower_bound[s=-0.5]", "low_band_spread[s=-0.5]", "data_vanishes[s=-0.5]",
            "low_band_growth[s=-0.5]", "ratio_monotone[s=-0.5]"} <= names
    for row in result.rows:
        # what remains after the first two iterates is cubic in eps
        assert row.norm_residual_hs < 0.1 * row.eps**2 * row.norm_I2_hs


def test_solver_validate(workdir):
    cfg = load_config("solver_validate", overrides={"solver": {"dt": 0.01}})
    result = RUNNERS["solver_validate"](cfg)
    assert not _failed(result)
    assert result.diagnostics["order"] >= 3.8
    assert result.rows == []


def test_solver_validate_rejects_large_steps(workdir):
    cfg = load_config("solver_validate", overrides={"solver": {"dt": 0.2}})
    result = RUNNERS["solver_validate"](cfg)
    assert [(c.name, c.passed) for c in result.checks] == [("order", False)]


def test_solver_validate_zero_amplitude(workdir):
    cfg = load_config("solver_validate", overrides={"amplitude": 0.0, "solver": {"dt": 0.05}})
    result = RUNNERS["solver_validate"](cfg)
    assert not _failed(result)


def test_bilinear_estimate(workdir):
    cfg = load_config("bilinear_estimate", overrides={"N_list": [16, 64]})
    result = RUNNERS["bilinear_estimate"](cfg, workers=2)
    assert not _failed(result)
    assert [c.name for c in result.checks] == ["ratio_growth[s=-0.5]"]
    assert result.diagnostics["growth"]["-0.5"] >= 2.0


def test_result_rows_reject_bad_norms():
    with pytest.raises(ValueError):
        ResultRow(N=8, s=-0.5, norm_u_hs=float("nan"))
    with pytest.raises(ValueError):
        ResultRow(N=8, s=-0.5, norm_I2_hs=-1.0)
    assert ResultRow(N=8, s=-0.5).csv_values()[4:] == [0.0] * 7


def test_run_node_writes_json_and_reports(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [8, 16]})
    state = {"configs": {"data_norms": cfg}, "settings": _settings(workdir)}
    update = run_node("data_norms", RUNNERS["data_norms"], state)
    assert set(update) == {"results", "checks", "diagnostics"}
    with open(workdir / "outputs" / "json" / "data_norms.json", encoding="utf-8") as f:
        payload = json.load(f)
    assert payload["experiment"] == "data_norms"
    assert len(payload["rows"]) == 2


def test_run_node_turns_exceptions_into_errors(workdir):
    cfg = load_config("data_norms", overrides={"N_list": [16.03]})
    state = {"configs": {"data_norms": cfg}, "settings": _settings(workdir)}
    update = run_node("data_norms", RUNNERS["data_norms"], state)
    assert list(update) == ["errors"]
    assert update["errors"][0].startswith("data_norms: ")


def test_unknown_experiment_is_rejected():
    with pytest.raises(KeyError):
        build_graph(["no_such_experiment"])


def test_sweep_exit_codes(workdir):
    settings = _settings(workdir)
    good = run_sweep({"data_norms": load_config("data_norms", overrides={"N_list": [8, 16]})}, settings)
    assert good["compiled"]["exit_code"] == 0
    assert os.path.exists(good["compiled"]["report_path"])
    assert os.path.exists(good["compiled"]["files"]["data_norms"]["csv"])

    failing = run_sweep({"solver_validate": load_config("solver_validate", overrides={"solver": {"dt": 0.2}})},
                        settings)
    assert failing["compiled"]["exit_code"] == 1
    assert failing["compiled"]["failed_checks"] == ["solver_validate/order"]

    broken = run_sweep({
        "data_norms": load_config("data_norms", overrides={"N_list": [16.03]}),
        "solver_validate": load_config("solver_validate", overrides={"amplitude": 0.0, "solver": {"dt": 0.05}}),
    }, settings)
    assert broken["compiled"]["exit_code"] == 2
    assert broken["compiled"]["experiments_completed"] == ["solver_validate"]


def test_empty_sweep_still_compiles(workdir):
    state = run_sweep({}, _settings(workdir))
    assert state["compiled"]["exit_code"] == 0
    assert state["compiled"]["checks_total"] == 0
