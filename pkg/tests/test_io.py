import json
import logging
import os
import shutil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MINI_CFG, TOY_CFG
from medea.domain import EL, HT
from medea.engine import run_scenario, sweep_wind_cap
from medea.io import (
    CAPACITY_HEADER,
    COST_HEADER,
    DISPATCH_HEADER,
    SWEEP_HEADER,
    ConfigError,
    estimate_inflows,
    load_scenario,
    month_anchor_hours,
    read_series_file,
    resample_monthly_prices,
    scale_profile,
    solver_settings,
    write_outcome,
    write_series_file,
    write_sweep,
)


# profile scaling ------------------------------------------------------------------

def test_scale_profile_identity():
    assert scale_profile(np.full(10, 0.5), 5.0, 1.0) == pytest.approx(np.full(10, 0.5))


def test_scale_profile_halves():
    assert scale_profile(np.full(10, 0.5), 2.5, 1.0) == pytest.approx(np.full(10, 0.25))


def test_scale_profile_peak_above_one():
    with pytest.raises(ValueError, match="peaks at 1.2"):
        scale_profile(np.full(10, 0.5), 12.0, 1.0)


def test_scale_profile_hour_weight():
    out = scale_profile(np.full(4, 0.5), 2.0 * 100, 1.0, hour_weight=100)
    assert out.sum() * 100 == pytest.approx(200)


# inflows -------------------------------------------------------------------------

def test_inflows_constant_fill_no_flows():
    z = np.zeros(168)
    assert estimate_inflows([50.0, 50.0], z, z) == pytest.approx(z)


def test_inflows_rising_fill():
    z = np.zeros(168)
    out = estimate_inflows([100.0, 268.0], z, z)
    assert out == pytest.approx(np.ones(168))


def test_inflows_generation_balance():
    z = np.zeros(168)
    gen = np.full(168, 100.0 / 168)
    out = estimate_inflows([80.0, 80.0], gen, z, eff_out=1.0)
    assert out.sum() == pytest.approx(100.0)


def test_inflows_pumping_and_losses():
    gen = np.zeros(336)
    gen[:168] = 1.0
    pump = np.zeros(336)
    pump[168:] = 0.5
    out = estimate_inflows([10.0, 10.0, 60.0], gen, pump, eff_in=0.8, eff_out=0.9)
    # week 1: 168/0.9; week 2: 50 + 0.8*84 stored from pumping is subtracted
    assert out[:168].sum() == pytest.approx(168 / 0.9)
    assert out[168:].sum() == pytest.approx(max(50.0 - 0.8 * 84.0, 0.0))


def test_inflows_negative_week_clamped(caplog):
    z = np.zeros(168)
    with caplog.at_level(logging.WARNING, logger="medea.io"):
        out = estimate_inflows([100.0, 50.0], z, z)
    assert out.sum() == 0.0
    assert "clamping" in caplog.text


def test_inflows_span_mismatch():
    with pytest.raises(ValueError, match="span mismatch"):
        estimate_inflows([1.0, 2.0], np.zeros(100), np.zeros(168))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 500), min_size=2, max_size=5))
def test_inflows_weekly_totals_conserved(fill):
    W = len(fill) - 1
    z = np.zeros(W * 168)
    out = estimate_inflows(fill, z, z)
    weekly = out.reshape(W, 168).sum(axis=1)
    assert weekly == pytest.approx(np.clip(np.diff(fill), 0, None), abs=1e-9)
    assert (out >= 0).all()


# monthly prices --------------------------------------------------------------------

def test_monthly_constant():
    out = resample_monthly_prices([1.50] * 12)
    assert len(out) == 8760
    assert out == pytest.approx(np.full(8760, 1.50))


def test_monthly_hits_anchors():
    vals = [13.0, 12.5, 12.0, 11.0, 10.5, 10.5, 11.0, 11.5, 12.0, 12.5, 13.0, 13.5]
    out = resample_monthly_prices(vals)
    mids, total = month_anchor_hours(12)
    assert total == 8760
    assert out[mids.astype(int)] == pytest.approx(vals)


def test_monthly_monotone_segment():
    vals = list(range(1, 13))
    out = resample_monthly_prices(vals)
    mids, _ = month_anchor_hours(12)
    seg = out[int(mids[0]):int(mids[-1]) + 1]
    assert (np.diff(seg) >= -1e-12).all()


@given(st.floats(0, 100), st.floats(0, 100))
def test_monthly_two_anchors_no_overshoot(a, b):
    out = resample_monthly_prices([a, b], hours=24 * 59)
    assert out.min() >= min(a, b) - 1e-9
    assert out.max() <= max(a, b) + 1e-9


# series files and config loading -------------------------------------------------------

def test_series_round_trip(tmp_path):
    path = tmp_path / "s.csv"
    write_series_file(str(path), "MW", {"a": [1.0, 2.5, 3.0]})
    unit, frame = read_series_file(str(path))
    assert unit == "MW"
    assert list(frame["a"]) == [1.0, 2.5, 3.0]
    assert frame["timestamp"][0] == "2030-01-01T00:00Z"


def test_series_bad_unit(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("# unit: furlong\ntimestamp,a\n2030-01-01T00:00Z,1\n")
    with pytest.raises(ConfigError, match="unknown unit"):
        read_series_file(str(path))


def test_series_gap_detected(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("# unit: GW\ntimestamp,a\n2030-01-01T00:00Z,1\n2030-01-01T01:00Z,1\n2030-01-01T03:00Z,1\n")
    with pytest.raises(ConfigError, match="gap"):
        read_series_file(str(path))


def test_toy_config_loads(toy_scenario):
    s = toy_scenario
    assert s.horizon == 168 and s.zone_ids == ["AT", "DE"]
    caps = {(t.zone, t.id): t.initial_capacity for t in s.intermittents}
    assert caps[("AT", "wind_on")] == 2.6
    assert caps[("AT", "pv")] == 1.1
    assert caps[("DE", "wind_on")] == 90.8
    assert s.price("lignite") == pytest.approx(np.full(168, 1.50))
    assert s.demand_series("AT", HT).shape == (168,)
    assert solver_settings(TOY_CFG) == {"method": "simplex"}


def test_mw_series_converted(tmp_path):
    shutil.copytree(os.path.dirname(MINI_CFG), tmp_path / "mini")
    cfg = tmp_path / "mini" / "mini.cfg"
    write_series_file(str(tmp_path / "mini" / "load.csv"), "MW", {"z": np.full(24, 15000.0)}, start="2030-06-01")
    cfg.write_text(cfg.read_text().replace("Z.el = 20", "Z.el = load.csv:z"))
    assert load_scenario(str(cfg)).demand_series("Z", EL) == pytest.approx(np.full(24, 15.0))


def edited_mini(tmp_path, old, new):
    shutil.copytree(os.path.dirname(MINI_CFG), tmp_path / "mini")
    cfg = tmp_path / "mini" / "mini.cfg"
    text = cfg.read_text()
    assert old in text
    cfg.write_text(text.replace(old, new))
    return str(cfg)


def test_dangling_fuel_names_technology(tmp_path):
    cfg = edited_mini(tmp_path, "fuels = gas", "fuels = hydrogen")
    with pytest.raises(ConfigError) as err:
        load_scenario(cfg)
    msg = str(err.value)
    assert "hydrogen" in msg and "ccgt" in msg
    assert "mini.cfg:" in msg


def test_unit_mismatch_reported(tmp_path):
    cfg = edited_mini(tmp_path, "Z.el = 20", "Z.el = profiles.csv:wind")
    with pytest.raises(ConfigError, match="unit mismatch"):
        load_scenario(cfg)


def test_missing_column_reported(tmp_path):
    cfg = edited_mini(tmp_path, "profiles.csv:wind", "profiles.csv:nowhere")
    with pytest.raises(ConfigError, match="nowhere"):
        load_scenario(cfg)


def test_overnight_cost_annuitised():
    s = load_scenario(MINI_CFG)
    pv = next(t for t in s.intermittents if t.id == "pv")
    assert pv.capital_cost == pytest.approx(1_000_000 * 0.05 / (1 - 1.05 ** -40))
    assert pv.lifetime == 40 and pv.wacc == 0.05


# writers -----------------------------------------------------------------------

def header(path):
    with open(path) as fh:
        return fh.readline().rstrip("\n")


def test_outcome_files_and_headers(toy_outcome, tmp_path):
    paths = write_outcome(toy_outcome, str(tmp_path), start="2030-01-07T00:00", hour_weight=52.142857142857146,
                          zone="AT")
    names = [os.path.basename(p) for p in paths]
    assert names == ["cost_components.csv", "capacities.csv", "dispatch_monthly.csv", "sweep.csv", "summary.json"]
    assert header(paths[0]) == (
        "zone,fuel_co2,investment,om,nse,zonal_cost,air_pollution,trade_balance,net_cost,"
        "emissions_tco2,renewable_mwh,curtailment_mwh")
    assert header(paths[1]) == "zone,tech,kind,initial_gw,added_gw,decommissioned_gw,final_gw"
    assert header(paths[2]) == "zone,tech,month,energy_gwh"
    assert header(paths[3]) == ("wind_cap_gw,status,c_net,total_cost,wind_gw,pv_gw,emissions_tco2,"
                                "oc_midpoint_gw,oc_net,oc_total")
    assert [COST_HEADER, CAPACITY_HEADER, DISPATCH_HEADER, SWEEP_HEADER]  # schema constants exported
    summary = json.loads(open(paths[4]).read())
    assert summary["status"] == "Optimal" and summary["zones"] == ["AT", "DE"]


def test_outcome_rerun_identical(toy_outcome, tmp_path):
    a = write_outcome(toy_outcome, str(tmp_path / "a"), zone="AT")
    b = write_outcome(toy_outcome, str(tmp_path / "b"), zone="AT")
    for x, y in zip(a, b):
        assert open(x, "rb").read() == open(y, "rb").read()


def test_sweep_file_rows_and_oc(tmp_path):
    from builders import renewables_zone

    sw = sweep_wind_cap(renewables_zone(T=24).with_changes(wind_cap={"Z": 1.0}), step=0.5)
    assert [p.wind_cap for p in sw.points] == [1.0, 0.5, 0.0]
    lines = open(write_sweep(sw, str(tmp_path))).read().splitlines()
    assert len(lines) == 4
    oc_cells = [ln.split(",")[-1] for ln in lines[1:]]
    assert oc_cells[0] == "" and all(oc_cells[1:])


def test_infeasible_outcome_writes_empty_tables(tmp_path):
    from builders import single_gas, zone

    # a renewable target in a zone without renewables cannot be met
    s = single_gas(T=2).with_changes(zones=(zone(renewable_target=1000.0),))
    out = run_scenario(s)
    assert out.status == "Infeasible"
    assert "res_target" in out.message
    paths = write_outcome(out, str(tmp_path))
    assert open(paths[0]).read().splitlines() == [",".join(COST_HEADER)]
    assert json.loads(open(paths[4]).read())["objective"] is None
