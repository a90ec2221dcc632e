"""Scenario -> sparse LP.

``build_lp`` declares every column first (so column ids do not depend on the
order in which constraint families are added) and then calls one ``add_*``
function per constraint family.  Row orientation: market clearing rows keep
supply on the left with demand as rhs, so their duals are read directly as
zonal prices.
"""
from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from typing import Dict, List

import numpy as np

from medea.domain import EL, HT, POWER_FUEL, Scenario, validate_scenario
from medea.lp import EQ, GE, LE, LpBuilder, LpProblem

WIND_CAP_KINDS = ("wind_on",)


class ScenarioError(ValueError):
    pass


def scenario_fingerprint(s: Scenario) -> str:
    """Stable hash of everything that shapes the LP."""
    h = hashlib.sha256()

    def feed(obj) -> None:
        if isinstance(obj, np.ndarray):
            h.update(b"A")
            h.update(np.ascontiguousarray(obj, dtype="<f8").tobytes())
        elif isinstance(obj, dict) or hasattr(obj, "items"):
            h.update(b"D")
            for k in sorted(obj, key=repr):
                h.update(repr(k).encode())
                feed(obj[k])
        elif isinstance(obj, (list, tuple)):
            h.update(b"L")
            for x in obj:
                feed(x)
        elif hasattr(obj, "__dataclass_fields__"):
            h.update(type(obj).__name__.encode())
            for name in obj.__dataclass_fields__:
                h.update(name.encode())
                feed(getattr(obj, name))
        else:
            h.update(json.dumps(obj, default=repr).encode())

    feed(s)
    return h.hexdigest()


def has_heat(s: Scenario, zone: str) -> bool:
    if s.demand_series(zone, HT).any():
        return True
    return any(t.zone == zone and HT in t.outputs for t in s.dispatchables)


def _declare_columns(lp: LpBuilder, s: Scenario, offsets: Dict[str, float]) -> None:
    T, h = s.horizon, s.hour_weight
    for z in s.zone_ids:
        co2 = s.co2(z)
        for tech in (t for t in s.dispatchables if t.zone == z):
            i = tech.id
            for t in range(T):
                for f in tech.fuels:
                    fuel = s.fuel(f)
                    price = 0.0 if f == POWER_FUEL else s.price(f)[t]
                    lp.var("b", z, t, i, f, cost=h * (price + co2[t] * fuel.co2_intensity))
                for m in tech.outputs:
                    for f in tech.fuels:
                        lp.var("g", z, t, i, m, f, cost=h * tech.om_var)
                if tech.is_chp:
                    for l, chi in enumerate(tech.chp_region.fuel_input):
                        for f in tech.fuels:
                            j = lp.var("w", z, t, i, f"l{l + 1}", f)
                            if chi == 0:
                                lp.fix(j, 0.0)
            if tech.expandable:
                lp.var("g_add", z, i, cost=tech.capital_cost + tech.om_qfix)
            lp.var("g_dec", z, i, cost=-tech.om_qfix)
            offsets[z] += tech.om_qfix * tech.initial_capacity
        for tech in (t for t in s.intermittents if t.zone == z):
            n = tech.id
            for t in range(T):
                lp.var("r", z, t, n, cost=h * tech.om_var)
            if tech.expandable:
                lp.var("r_add", z, n, cost=tech.capital_cost + tech.om_qfix)
            lp.var("r_dec", z, n, cost=-tech.om_qfix)
            offsets[z] += tech.om_qfix * tech.initial_capacity
        for k in (k for k in s.storages if k.zone == z):
            for t in range(T):
                lp.var("s_in", z, t, k.id)
                lp.var("s_out", z, t, k.id)
                lp.var("v", z, t, k.id)
            if k.expandable:
                lp.var("s_add", z, k.id, cost=k.capital_cost_power)
                lp.var("v_add", z, k.id, cost=k.capital_cost_energy)
        heat = has_heat(s, z)
        voll = s.zone(z).voll
        for t in range(T):
            lp.var("q_cur", z, t)
            lp.var("q_nse", z, t, EL, cost=h * voll)
            if heat:
                lp.var("q_nse", z, t, HT, cost=h * voll)
    for link in s.links:
        for z, zz in (link.pair, link.pair[::-1]):
            dist = s.zone(z).distance_to.get(zz, s.zone(zz).distance_to.get(z, 0.0))
            if link.expandable:
                lp.var("x_add", z, zz, cost=0.5 * link.capital_cost * dist)
            lo = -np.inf if link.expandable else -link.initial_ntc
            hi = np.inf if link.expandable else link.initial_ntc
            for t in range(T):
                lp.var("x", z, zz, t, lb=lo, ub=hi)


def _col(lp: LpBuilder, *key) -> int:
    return lp.index.col(*key)


def _partners(s: Scenario, z: str) -> List[str]:
    out = []
    for link in s.links:
        if link.zone_a == z:
            out.append(link.zone_b)
        elif link.zone_b == z:
            out.append(link.zone_a)
    return out


def add_market_clearing(lp: LpBuilder, s: Scenario, z: str, t: int) -> None:
    """Electricity and heat balance of zone ``z`` in hour ``t``."""
    terms: Dict[int, float] = defaultdict(float)
    for tech in (x for x in s.dispatchables if x.zone == z):
        if EL in tech.outputs:
            for f in tech.fuels:
                terms[_col(lp, "g", z, t, tech.id, EL, f)] += 1.0
        if POWER_FUEL in tech.fuels:
            terms[_col(lp, "b", z, t, tech.id, POWER_FUEL)] -= 1.0
    for tech in (x for x in s.intermittents if x.zone == z):
        terms[_col(lp, "r", z, t, tech.id)] += 1.0
    for k in (k for k in s.storages if k.zone == z):
        terms[_col(lp, "s_out", z, t, k.id)] += 1.0
        terms[_col(lp, "s_in", z, t, k.id)] -= 1.0
    for zz in _partners(s, z):
        terms[_col(lp, "x", z, zz, t)] -= 1.0
    terms[_col(lp, "q_nse", z, t, EL)] += 1.0
    terms[_col(lp, "q_cur", z, t)] -= 1.0
    lp.constraint(("clear_el", z, t), terms, EQ, s.demand_series(z, EL)[t])

    if has_heat(s, z):
        terms = defaultdict(float)
        for tech in (x for x in s.dispatchables if x.zone == z):
            if HT in tech.outputs:
                for f in tech.fuels:
                    terms[_col(lp, "g", z, t, tech.id, HT, f)] += 1.0
        terms[_col(lp, "q_nse", z, t, HT)] += 1.0
        lp.constraint(("clear_ht", z, t), terms, EQ, s.demand_series(z, HT)[t])


def _capacity_terms(lp: LpBuilder, z: str, tech) -> Dict[int, float]:
    terms: Dict[int, float] = {}
    if tech.expandable:
        terms[_col(lp, "g_add", z, tech.id)] = -1.0
    terms[_col(lp, "g_dec", z, tech.id)] = 1.0
    return terms


def add_generation_and_chp(lp: LpBuilder, s: Scenario, z: str, tech_id: str) -> None:
    """Capacity limits, fuel conversion and (for CHP units) the operating-region weights."""
    tech = next(x for x in s.dispatchables if x.zone == z and x.id == tech_id)
    cap = tech.initial_capacity
    for t in range(s.horizon):
        if tech.is_chp:
            reg = tech.chp_region
            terms = _capacity_terms(lp, z, tech)
            for l in range(reg.n_corners):
                for f in tech.fuels:
                    terms[_col(lp, "w", z, t, tech_id, f"l{l + 1}", f)] = 1.0
            lp.constraint(("cap_chp", z, t, tech_id), terms, LE, cap)
            for mi, m in enumerate((EL, HT)):
                for f in tech.fuels:
                    terms = {_col(lp, "g", z, t, tech_id, m, f): 1.0}
                    for l, out in enumerate(reg.outputs):
                        if out[mi] != 0.0:
                            terms[_col(lp, "w", z, t, tech_id, f"l{l + 1}", f)] = -out[mi]
                    lp.constraint(("chp_out", z, t, tech_id, m, f), terms, EQ, 0.0)
            for f in tech.fuels:
                terms = {_col(lp, "b", z, t, tech_id, f): 1.0}
                for l, chi in enumerate(reg.fuel_input):
                    if chi != 0.0:
                        terms[_col(lp, "w", z, t, tech_id, f"l{l + 1}", f)] = -chi
                lp.constraint(("chp_fuel", z, t, tech_id, f), terms, EQ, 0.0)
        else:
            for m in tech.outputs:
                terms = _capacity_terms(lp, z, tech)
                for f in tech.fuels:
                    terms[_col(lp, "g", z, t, tech_id, m, f)] = 1.0
                lp.constraint(("cap_g", z, t, tech_id, m), terms, LE, cap)
                eta = tech.efficiency[m]
                for f in tech.fuels:
                    lp.constraint(
                        ("fuel_link", z, t, tech_id, m, f),
                        {_col(lp, "g", z, t, tech_id, m, f): 1.0, _col(lp, "b", z, t, tech_id, f): -eta},
                        EQ,
                        0.0,
                    )


def add_intermittent(lp: LpBuilder, s: Scenario, z: str, tech_id: str) -> None:
    """Generation follows the profile scaled by net installed capacity."""
    tech = next(x for x in s.intermittents if x.zone == z and x.id == tech_id)
    for t in range(s.horizon):
        phi = float(tech.profile[t])
        terms = {_col(lp, "r", z, t, tech_id): 1.0}
        if phi != 0.0:
            if tech.expandable:
                terms[_col(lp, "r_add", z, tech_id)] = -phi
            terms[_col(lp, "r_dec", z, tech_id)] = phi
        lp.constraint(("gen_r", z, t, tech_id), terms, EQ, phi * tech.initial_capacity)


def add_storage(lp: LpBuilder, s: Scenario, z: str, k_id: str) -> None:
    """Power and energy limits, energy balance and boundary levels of one storage."""
    k = next(x for x in s.storages if x.zone == z and x.id == k_id)
    rho = k.inflows(s.horizon)
    floor = k.level_floor
    for t in range(s.horizon):
        s_in, s_out, v = (_col(lp, nm, z, t, k_id) for nm in ("s_in", "s_out", "v"))
        terms = {s_out: 1.0}
        if k.expandable:
            terms[_col(lp, "s_add", z, k_id)] = -1.0
        lp.constraint(("sto_out", z, t, k_id), terms, LE, k.power_out)
        terms = {s_in: 1.0}
        if k.expandable:
            terms[_col(lp, "s_add", z, k_id)] = -1.0
        lp.constraint(("sto_in", z, t, k_id), terms, LE, k.power_in)
        terms = {v: 1.0}
        if k.expandable:
            terms[_col(lp, "v_add", z, k_id)] = -1.0
        lp.constraint(("sto_v", z, t, k_id), terms, LE, k.energy)
        if k.eff_out > 0:
            terms = {v: 1.0, s_in: -k.eff_in, s_out: 1.0 / k.eff_out}
            rhs = float(rho[t])
            if t > 0:
                terms[_col(lp, "v", z, t - 1, k_id)] = -1.0
            else:
                # the hour before the horizon holds the boundary level
                rhs += floor
            lp.constraint(("sto_bal", z, t, k_id), terms, EQ, rhs)
    if k.expandable:
        lp.constraint(
            ("sto_ep", z, k_id),
            {_col(lp, "v_add", z, k_id): 1.0, _col(lp, "s_add", z, k_id): -1.0},
            GE,
            0.0,
        )
    if s.horizon:
        lp.constraint(("sto_first", z, k_id), {_col(lp, "v", z, 0, k_id): 1.0}, GE, floor)
        lp.constraint(("sto_last", z, k_id), {_col(lp, "v", z, s.horizon - 1, k_id): 1.0}, GE, floor)


def add_transmission(lp: LpBuilder, s: Scenario, z: str, zz: str, t: int) -> None:
    """Transfer limits in both directions plus flow antisymmetry for one hour."""
    link = next(x for x in s.links if set(x.pair) == {z, zz})
    for a, b in ((z, zz), (zz, z)):
        x = _col(lp, "x", a, b, t)
        up = {x: 1.0}
        lo = {x: 1.0}
        if link.expandable:
            up[_col(lp, "x_add", a, b)] = -1.0
            lo[_col(lp, "x_add", a, b)] = 1.0
        lp.constraint(("x_up", a, b, t), up, LE, link.initial_ntc)
        lp.constraint(("x_lo", a, b, t), lo, GE, -link.initial_ntc)
    lp.constraint(
        ("x_anti", z, zz, t),
        {_col(lp, "x", z, zz, t): 1.0, _col(lp, "x", zz, z, t): 1.0},
        EQ,
        0.0,
    )


def add_reserves(lp: LpBuilder, s: Scenario, z: str, t: int) -> None:
    zone = s.zone(z)
    terms: Dict[int, float] = defaultdict(float)
    rhs = zone.reserve_load_factor * s.peak_load(z, EL)
    for tech in (x for x in s.dispatchables if x.zone == z):
        if EL in tech.outputs:
            for f in tech.fuels:
                terms[_col(lp, "g", z, t, tech.id, EL, f)] += 1.0
    for tech in (x for x in s.intermittents if x.zone == z):
        if tech.kind == "ror":
            terms[_col(lp, "r", z, t, tech.id)] += 1.0
        else:
            coef = zone.reserve_intermittent_factor * tech.peak_profile
            rhs += coef * tech.initial_capacity
            if tech.expandable and coef:
                terms[_col(lp, "r_add", z, tech.id)] -= coef
    for k in (k for k in s.storages if k.zone == z):
        terms[_col(lp, "s_out", z, t, k.id)] += 1.0
        terms[_col(lp, "s_in", z, t, k.id)] += 1.0
    lp.constraint(("reserve", z, t), terms, GE, rhs)


def renewable_inflow_energy(s: Scenario, z: str) -> float:
    """Natural inflow energy credited to the renewable target, GWh per year."""
    return s.hour_weight * sum(float(k.inflows(s.horizon).sum()) for k in s.storages if k.zone == z)


def add_policy_and_caps(lp: LpBuilder, s: Scenario, z: str) -> None:
    """Annual renewable-generation target and the optional cap on net wind capacity."""
    zone = s.zone(z)
    h = s.hour_weight
    if zone.renewable_target:
        terms: Dict[int, float] = defaultdict(float)
        for tech in (x for x in s.intermittents if x.zone == z):
            for t in range(s.horizon):
                terms[_col(lp, "r", z, t, tech.id)] += h
        for tech in (x for x in s.dispatchables if x.zone == z):
            if EL not in tech.outputs:
                continue
            for f in tech.fuels:
                if s.fuel(f).renewable:
                    for t in range(s.horizon):
                        terms[_col(lp, "g", z, t, tech.id, EL, f)] += h
        rhs = zone.renewable_target / 1000.0 - renewable_inflow_energy(s, z)
        lp.constraint(("res_target", z), terms, GE, rhs)
    if z in s.wind_cap:
        terms = {}
        rhs = float(s.wind_cap[z])
        for tech in (x for x in s.intermittents if x.zone == z and x.kind in WIND_CAP_KINDS):
            if tech.expandable:
                terms[_col(lp, "r_add", z, tech.id)] = 1.0
            terms[_col(lp, "r_dec", z, tech.id)] = -1.0
            rhs -= tech.initial_capacity
        lp.constraint(("wind_cap", z), terms, LE, rhs)


def add_curtailment_and_nse(lp: LpBuilder, s: Scenario, z: str, t: int) -> None:
    """Curtailment limited to non-hydro intermittent output of the hour."""
    terms = {_col(lp, "q_cur", z, t): 1.0}
    for tech in (x for x in s.intermittents if x.zone == z and x.kind != "ror"):
        terms[_col(lp, "r", z, t, tech.id)] = -1.0
    lp.constraint(("curtail", z, t), terms, LE, 0.0)


def add_decommissioning(lp: LpBuilder, s: Scenario, z: str) -> None:
    for tech in (x for x in s.dispatchables if x.zone == z):
        terms = {_col(lp, "g_dec", z, tech.id): 1.0}
        if tech.expandable:
            terms[_col(lp, "g_add", z, tech.id)] = -1.0
        lp.constraint(("deco_g", z, tech.id), terms, LE, tech.initial_capacity)
    for tech in (x for x in s.intermittents if x.zone == z):
        terms = {_col(lp, "r_dec", z, tech.id): 1.0}
        if tech.expandable:
            terms[_col(lp, "r_add", z, tech.id)] = -1.0
        lp.constraint(("deco_r", z, tech.id), terms, LE, tech.initial_capacity)


def build_lp(s: Scenario, check: bool = True) -> LpProblem:
    """Assemble the cost-minimisation LP for ``s``.

    The objective is total system cost in k-currency; ``metadata["zone_offset"]``
    holds each zone's constant quasi-fixed O&M on initial capacity.
    """
    if check:
        problems = validate_scenario(s)
        if problems:
            raise ScenarioError("; ".join(str(p) for p in problems[:5]))
    lp = LpBuilder()
    offsets: Dict[str, float] = {z: 0.0 for z in s.zone_ids}
    _declare_columns(lp, s, offsets)
    for z in s.zone_ids:
        for t in range(s.horizon):
            add_market_clearing(lp, s, z, t)
        for tech in (x for x in s.dispatchables if x.zone == z):
            add_generation_and_chp(lp, s, z, tech.id)
        for tech in (x for x in s.intermittents if x.zone == z):
            add_intermittent(lp, s, z, tech.id)
        for k in (x for x in s.storages if x.zone == z):
            add_storage(lp, s, z, k.id)
        for t in range(s.horizon):
            add_reserves(lp, s, z, t)
            add_curtailment_and_nse(lp, s, z, t)
        add_decommissioning(lp, s, z)
        add_policy_and_caps(lp, s, z)
    for link in s.links:
        for t in range(s.horizon):
            add_transmission(lp, s, link.zone_a, link.zone_b, t)
        if link.expandable:
            a, b = link.pair
            lp.constraint(
                ("x_sym", a, b),
                {_col(lp, "x_add", a, b): 1.0, _col(lp, "x_add", b, a): -1.0},
                EQ,
                0.0,
            )
    lp.offset = float(sum(offsets.values()))
    return lp.build(
        metadata={
            "scenario_hash": scenario_fingerprint(s),
            "horizon": s.horizon,
            "zone_offset": offsets,
        }
    )


def column_zone(problem: LpProblem) -> np.ndarray:
    """Zone label owning each column (the first subscript of every key)."""
    return np.array([k[1] for k in problem.index.col_keys()], dtype=object)
