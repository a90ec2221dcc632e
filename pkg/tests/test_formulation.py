from collections import Counter

import numpy as np
import pytest

from builders import gas_plant, single_gas, two_zone, zone
from medea.domain import (
    DEFAULT_VOLL,
    EL,
    HT,
    DispatchableTech,
    Fuel,
    IntermittentTech,
    Scenario,
    StorageTech,
    build_feasible_operating_region,
)
from medea.engine import run_scenario
from medea.formulation import ScenarioError, build_lp, scenario_fingerprint
from medea.solver import solve


def families(problem):
    return Counter(problem.index.row_key(i)[0] for i in range(problem.n_rows))


def col_names(problem):
    return Counter(problem.index.col_key(j)[0] for j in range(problem.n_cols))


def coef(problem, row, col):
    A = problem.matrix().tocsr()
    return A[problem.index.row(*row), problem.index.col(*col)]


def solved(s):
    p = build_lp(s)
    sol = solve(p)
    assert sol.optimal, sol.message
    return p, sol


def val(p, sol, *key):
    return sol.primal[p.index.col(*key)]


# structure ------------------------------------------------------------------

def test_single_plant_hour_structure():
    s = single_gas(expandable=True, capital_cost=1000.0)
    p = build_lp(s)
    assert col_names(p) == Counter({"b": 1, "g": 1, "g_add": 1, "g_dec": 1, "q_cur": 1, "q_nse": 1})
    # by hand: clearing, capacity, fuel conversion, reserve, curtailment, decommissioning
    assert families(p) == Counter(
        {"clear_el": 1, "cap_g": 1, "fuel_link": 1, "reserve": 1, "curtail": 1, "deco_g": 1}
    )


def test_zero_horizon_is_empty():
    s = single_gas(T=0)
    p = build_lp(s)
    assert not any(k[0] in ("b", "g", "q_nse", "q_cur") for k in (p.index.col_key(j) for j in range(p.n_cols)))
    sol = solve(p)
    assert sol.optimal and sol.objective == 0.0


def test_doubling_horizon_doubles_hourly_rows(toy_scenario):
    from medea.engine import apply_overrides

    a = build_lp(apply_overrides(toy_scenario, {"horizon": 12}))
    b = build_lp(apply_overrides(toy_scenario, {"horizon": 24}))
    fa, fb = families(a), families(b)
    hourly = {"clear_el", "clear_ht", "cap_g", "fuel_link", "cap_chp", "chp_out", "chp_fuel", "gen_r", "sto_out",
              "sto_in", "sto_v", "sto_bal", "x_up", "x_lo", "x_anti", "reserve", "curtail"}
    for fam in hourly:
        assert fb[fam] == 2 * fa[fam], fam
    for fam in set(fa) - hourly:
        assert fb[fam] == fa[fam], fam


def test_build_is_deterministic(toy_scenario):
    assert build_lp(toy_scenario).fingerprint() == build_lp(toy_scenario).fingerprint()
    assert scenario_fingerprint(toy_scenario) == scenario_fingerprint(toy_scenario)


def test_invalid_scenario_rejected():
    s = single_gas(T=2).with_changes(demand={("Z", EL): np.ones(3)})
    with pytest.raises(ScenarioError):
        build_lp(s)


# market clearing --------------------------------------------------------------

def test_clearing_forces_generation_or_lost_load():
    p, sol = solved(single_gas())
    assert val(p, sol, "g", "Z", 0, "gas_pp", EL, "gas") + val(p, sol, "q_nse", "Z", 0, EL) == pytest.approx(1.0)
    assert val(p, sol, "g", "Z", 0, "gas_pp", EL, "gas") == pytest.approx(1.0)


def test_link_enters_both_rows():
    p = build_lp(two_zone(T=1))
    # export withdraws from the exporter's balance ...
    assert coef(p, ("clear_el", "A", 0), ("x", "A", "B", 0)) == -1.0
    assert coef(p, ("clear_el", "B", 0), ("x", "B", "A", 0)) == -1.0
    # ... and the identity row makes it supply on the other side
    assert coef(p, ("x_anti", "A", "B", 0), ("x", "A", "B", 0)) == 1.0
    assert coef(p, ("x_anti", "A", "B", 0), ("x", "B", "A", 0)) == 1.0


def chp_zone(T=1, el=0.0, ht=0.5, corners=None):
    reg = build_feasible_operating_region(0.4, 0.15, 0.5, 1.0)
    chp = DispatchableTech("chp", "Z", ("gas",), {EL: 0.4}, initial_capacity=1.0, chp_region=reg)
    return Scenario(
        horizon=T,
        zones=(zone(),),
        fuels=(Fuel("gas"),),
        dispatchables=(chp,),
        storages=(StorageTech("sto", "Z", power_out=1, power_in=1, energy=1),),
        links=(),
        demand={("Z", EL): np.full(T, el), ("Z", HT): np.full(T, ht)},
        fuel_price={"gas": np.full(T, 20.0)},
    )


def test_heat_row_has_no_storage_or_trade():
    p = build_lp(chp_zone())
    A = p.matrix().tocsr()
    row = A[p.index.row("clear_ht", "Z", 0)]
    names = {p.index.col_key(j)[0] for j in row.indices}
    assert names == {"g", "q_nse"}


# generation -------------------------------------------------------------------

def test_condensing_fuel_conversion():
    p, sol = solved(single_gas(eta=0.5))
    assert val(p, sol, "b", "Z", 0, "gas_pp", "gas") == pytest.approx(2.0)


def test_chp_single_corner():
    # backpressure corner (0.5, 1.0) is the only way to make 1 GW heat at 0.5 GW power
    s = chp_zone(el=0.5, ht=1.0)
    p, sol = solved(s)
    assert val(p, sol, "g", "Z", 0, "chp", EL, "gas") == pytest.approx(0.5)
    assert val(p, sol, "g", "Z", 0, "chp", HT, "gas") == pytest.approx(1.0)
    assert val(p, sol, "w", "Z", 0, "chp", "l3", "gas") == pytest.approx(1.0)
    assert val(p, sol, "b", "Z", 0, "chp", "gas") == pytest.approx((0.5 + 0.15) / 0.4)


def test_full_decommissioning_stops_output():
    # zero demand and a fixed O&M charge: retire everything
    s = single_gas(T=3, demand=0.0, om_qfix=1000.0)
    p, sol = solved(s)
    assert val(p, sol, "g_dec", "Z", "gas_pp") == pytest.approx(1.0)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    s = single_gas(T=3, demand=0.5, om_qfix=1000.0)
    p = build_lp(s)
    lb, ub = p.lb.copy(), p.ub.copy()
    j = p.index.col("g_dec", "Z", "gas_pp")
    p.lb[j] = p.ub[j] = 1.0
    sol = solve(p)
    for t in range(3):
        assert val(p, sol, "g", "Z", t, "gas_pp", EL, "gas") == pytest.approx(0.0, abs=1e-9)
        assert val(p, sol, "q_nse", "Z", t, EL) == pytest.approx(0.5)


# storage ----------------------------------------------------------------------

def storage_only(demand, price, sto):
    T = len(demand)
    return Scenario(
        horizon=T,
        zones=(zone(),),
        fuels=(Fuel("gas"),),
        dispatchables=(gas_plant(cap=5.0, eta=1.0),),
        storages=(sto,),
        demand={("Z", EL): np.asarray(demand, float)},
        fuel_price={"gas": np.asarray(price, float)},
    )


def test_storage_idle_keeps_level():
    sto = StorageTech("sto", "Z", power_out=1, power_in=1, energy=4.0)
    p, sol = solved(storage_only([1, 1, 1], [10, 10, 10], sto))
    levels = [val(p, sol, "v", "Z", t, "sto") for t in range(3)]
    assert levels == pytest.approx([2.0, 2.0, 2.0])


def test_storage_round_trip_losses():
    # floor 0, one charge hour then one discharge hour
    sto = StorageTech("sto", "Z", power_out=5, power_in=1, energy=5.0, eff_in=0.9, eff_out=0.9, boundary_level=0.0)
    p, sol = solved(storage_only([0.0, 3.0], [1.0, 100.0], sto))
    assert val(p, sol, "s_in", "Z", 0, "sto") == pytest.approx(1.0)
    assert val(p, sol, "s_out", "Z", 1, "sto") == pytest.approx(0.81)


def test_storage_cycles_but_ends_above_floor():
    sto = StorageTech("sto", "Z", power_out=1, power_in=1, energy=4.0)
    p, sol = solved(storage_only([1, 1, 1, 1], [10, 50, 10, 50], sto))
    levels = [val(p, sol, "v", "Z", t, "sto") for t in range(4)]
    assert sum(val(p, sol, "s_out", "Z", t, "sto") for t in range(4)) > 0.5
    assert levels[-1] >= 2.0 - 1e-9


# transmission -----------------------------------------------------------------

def test_ntc_limits_flow():
    s = two_zone(T=3, ntc=4.9)
    s = s.with_changes(demand={("A", EL): np.zeros(3), ("B", EL): np.full(3, 8.0)},
                       dispatchables=(
                           DispatchableTech("cheap", "A", ("coal",), {EL: 0.5}, initial_capacity=10.0),
                           DispatchableTech("dear", "B", ("gas",), {EL: 0.5}, initial_capacity=10.0)))
    p, sol = solved(s)
    for t in range(3):
        assert val(p, sol, "x", "A", "B", t) == pytest.approx(4.9)
        assert val(p, sol, "x", "B", "A", t) == pytest.approx(-4.9)


def test_isolated_zone_has_fixed_zero_flows():
    p = build_lp(two_zone(T=2, ntc=0.0))
    for t in range(2):
        j = p.index.col("x", "A", "B", t)
        assert p.lb[j] == p.ub[j] == 0.0


def test_expansion_symmetric():
    # 0.1 per MW km over 100 km, split between the two ends: 10 per GW, saving 60 per GW
    p, sol = solved(two_zone(T=2, ntc=0.5, expandable=True, capital_cost=0.1))
    assert families(p)["x_sym"] == 1
    assert val(p, sol, "x_add", "A", "B") == pytest.approx(val(p, sol, "x_add", "B", "A"))
    assert val(p, sol, "x_add", "A", "B") == pytest.approx(1.5)


# reserves ---------------------------------------------------------------------

def test_reserve_vacuous_without_factors():
    p = build_lp(single_gas(T=2))
    assert p.rhs[p.index.row("reserve", "Z", 0)] == 0.0


def reserve_zone(wind_cap, with_ror=False):
    T = 2
    techs = [IntermittentTech("wind", "Z", "wind_on", [0.5, 0.8], initial_capacity=wind_cap)]
    if with_ror:
        techs.append(IntermittentTech("ror", "Z", "ror", [0.5, 0.5], initial_capacity=1.0, expandable=False))
    return Scenario(
        horizon=T, zones=(zone(reserve_load_factor=0.1, reserve_intermittent_factor=0.2),),
        fuels=(Fuel("gas"),), dispatchables=(gas_plant(cap=2.0),), intermittents=tuple(techs),
        demand={("Z", EL): np.array([1.0, 2.0])}, fuel_price={"gas": np.full(T, 10.0)},
    )


def test_reserve_rhs_grows_with_wind():
    a = build_lp(reserve_zone(1.0))
    b = build_lp(reserve_zone(2.0))
    r = a.index.row("reserve", "Z", 0)
    # 0.1 * peak load + 0.2 * peak profile * capacity
    assert a.rhs[r] == pytest.approx(0.1 * 2.0 + 0.2 * 0.8 * 1.0)
    assert b.rhs[r] - a.rhs[r] == pytest.approx(0.2 * 0.8)
    assert coef(a, ("reserve", "Z", 0), ("r_add", "Z", "wind")) == pytest.approx(-0.2 * 0.8)


def test_reserve_counts_ror_not_wind():
    p = build_lp(reserve_zone(1.0, with_ror=True))
    assert coef(p, ("reserve", "Z", 0), ("r", "Z", 0, "ror")) == 1.0
    assert coef(p, ("reserve", "Z", 0), ("r", "Z", 0, "wind")) == 0.0


# policy -----------------------------------------------------------------------

def test_zero_target_adds_no_row():
    from builders import renewables_zone

    p = build_lp(renewables_zone(T=24, target_share=0.0))
    assert "res_target" not in families(p)


def test_target_above_free_output_binds():
    from builders import renewables_zone

    out = run_scenario(renewables_zone(T=24, target_share=0.05))
    assert out.target_dual["Z"] > 1e-6
    assert out.renewable_generation["Z"] == pytest.approx(0.05 * 20.0 * 1000 * 8760, rel=1e-9)


def test_wind_cap_zero_gives_pv():
    from builders import renewables_zone

    s = renewables_zone(T=24)
    free = run_scenario(s)
    capped = run_scenario(s.with_changes(wind_cap={"Z": 0.0}))
    assert free.wind_capacity("Z") > 1.0
    assert capped.wind_capacity("Z") == pytest.approx(0.0, abs=1e-9)
    assert capped.capacity_of_kind("Z", "pv") > free.capacity_of_kind("Z", "pv") + 1.0


# curtailment and lost load ------------------------------------------------------

def test_no_intermittent_no_curtailment():
    p = build_lp(single_gas(T=2))
    r = p.index.row("curtail", "Z", 0)
    A = p.matrix().tocsr()
    assert list(A[r].indices) == [p.index.col("q_cur", "Z", 0)]
    assert p.senses[r] == "L" and p.rhs[r] == 0.0


def test_shortage_priced_at_voll():
    out = run_scenario(single_gas(demand=1.5, cap=1.0))
    assert out.dispatch[("Z", "lost_load")][0] == pytest.approx(0.5)
    assert out.prices["Z"][0] == pytest.approx(DEFAULT_VOLL)
    assert DEFAULT_VOLL == 12500.0
