"""Run scenarios, derive the economics, and drive wind-cap sweeps and sensitivity grids.

Money is reported in k-currency throughout (the LP's objective unit).  With
capacities in GW this makes an opportunity cost in k-currency per GW
numerically equal to currency per MW.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from medea.domain import EL, HT, POWER_FUEL, Scenario, annuity
from medea.formulation import build_lp, column_zone, has_heat, renewable_inflow_energy
from medea.lp import LpProblem
from medea.solver import OPTIMAL, LpSolution, SolverOptions, solve

logger = logging.getLogger(__name__)

WIND_KIND = "wind_on"
TARGET_DUAL_TOL = 1e-7


@dataclass
class CostBreakdown:
    fuel_co2: float = 0.0
    investment: float = 0.0
    om: float = 0.0
    nse: float = 0.0

    @property
    def total(self) -> float:
        return self.fuel_co2 + self.investment + self.om + self.nse


@dataclass
class CapacityRecord:
    zone: str
    tech: str
    kind: str
    initial: float
    added: float
    decommissioned: float

    @property
    def final(self) -> float:
        return self.initial + self.added - self.decommissioned


@dataclass
class SystemOutcome:
    scenario: str
    scenario_hash: str
    status: str
    objective: float = math.nan
    zones: List[str] = field(default_factory=list)
    costs: Dict[str, CostBreakdown] = field(default_factory=dict)
    lp_zone_cost: Dict[str, float] = field(default_factory=dict)
    emissions: Dict[str, float] = field(default_factory=dict)  # t CO2
    air_pollution: Dict[str, float] = field(default_factory=dict)
    trade_revenue: Dict[str, float] = field(default_factory=dict)
    prices: Dict[str, np.ndarray] = field(default_factory=dict)
    capacities: List[CapacityRecord] = field(default_factory=list)
    renewable_generation: Dict[str, float] = field(default_factory=dict)  # MWh/a
    curtailment: Dict[str, float] = field(default_factory=dict)  # MWh/a
    target_dual: Dict[str, float] = field(default_factory=dict)
    dispatch: Dict[Tuple[str, str], np.ndarray] = field(default_factory=dict)  # GW by hour
    solver_stats: Dict[str, float] = field(default_factory=dict)
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def net_cost(self, zone: str) -> float:
        return net_system_cost(self, zone)

    def wind_capacity(self, zone: str) -> float:
        return sum(c.final for c in self.capacities if c.zone == zone and c.kind == WIND_KIND)

    def capacity_of_kind(self, zone: str, kind: str) -> float:
        return sum(c.final for c in self.capacities if c.zone == zone and c.kind == kind)


class InfeasibleScenario(RuntimeError):
    pass


def _val(problem: LpProblem, x: np.ndarray, *key) -> float:
    idx = problem.index
    return float(x[idx.col(*key)]) if idx.has_col(*key) else 0.0


def _series(problem: LpProblem, x: np.ndarray, T: int, name: str, z: str, after=()) -> np.ndarray:
    # ``name[z, t, *after]`` collected over t
    return np.array([_val(problem, x, name, z, t, *after) for t in range(T)])


def cost_components(problem: LpProblem, x: np.ndarray, s: Scenario) -> Dict[str, CostBreakdown]:
    """Zonal cost components recomputed from the scenario data and a primal vector.

    Independent of the objective vector on purpose, so comparing the sum with
    the zone's objective share checks the assembly.
    """
    T, h = s.horizon, s.hour_weight
    out = {z: CostBreakdown() for z in s.zone_ids}
    for z in s.zone_ids:
        cb = out[z]
        co2 = s.co2(z)
        for tech in (d for d in s.dispatchables if d.zone == z):
            for f in tech.fuels:
                price = np.zeros(T) if f == POWER_FUEL else s.price(f)
                b = _series(problem, x, T, "b", z, after=(tech.id, f))
                cb.fuel_co2 += h * float(b @ price) + h * float(b @ co2) * s.fuel(f).co2_intensity
                for m in tech.outputs:
                    cb.om += h * tech.om_var * float(_series(problem, x, T, "g", z, after=(tech.id, m, f)).sum())
            add, dec = _val(problem, x, "g_add", z, tech.id), _val(problem, x, "g_dec", z, tech.id)
            cb.investment += tech.capital_cost * add
            cb.om += tech.om_qfix * (tech.initial_capacity + add - dec)
        for tech in (n for n in s.intermittents if n.zone == z):
            add, dec = _val(problem, x, "r_add", z, tech.id), _val(problem, x, "r_dec", z, tech.id)
            cb.investment += tech.capital_cost * add
            cb.om += tech.om_qfix * (tech.initial_capacity + add - dec)
            cb.om += h * tech.om_var * float(_series(problem, x, T, "r", z, after=(tech.id,)).sum())
        for k in (k for k in s.storages if k.zone == z):
            cb.investment += k.capital_cost_power * _val(problem, x, "s_add", z, k.id)
            cb.investment += k.capital_cost_energy * _val(problem, x, "v_add", z, k.id)
        for link in s.links:
            if z in link.pair:
                zz = link.zone_b if link.zone_a == z else link.zone_a
                dist = s.zone(z).distance_to.get(zz, s.zone(zz).distance_to.get(z, 0.0))
                cb.investment += 0.5 * link.capital_cost * dist * _val(problem, x, "x_add", z, zz)
        nse = _series(problem, x, T, "q_nse", z, after=(EL,)).sum()
        if has_heat(s, z):
            nse += _series(problem, x, T, "q_nse", z, after=(HT,)).sum()
        cb.nse = h * s.zone(z).voll * float(nse)
    return out


def lp_zone_cost(problem: LpProblem, x: np.ndarray) -> Dict[str, float]:
    """Each zone's share of the objective: its columns' cost plus its constant term."""
    zones = column_zone(problem)
    contrib = problem.c * x
    out = {}
    for z, off in problem.metadata.get("zone_offset", {}).items():
        out[z] = float(contrib[zones == z].sum() + off)
    return out


def emissions_and_air_pollution(problem: LpProblem, x: np.ndarray, s: Scenario) -> Dict[str, Tuple[float, float]]:
    """Per zone ``(tCO2, air-pollution cost in k-currency)``.

    Fixed pollution cost uses post-expansion, post-decommissioning capacity and
    the first fuel of each plant; intermittent plants use their mapped pseudo-fuel.
    """
    T, h = s.horizon, s.hour_weight
    out = {}
    for z in s.zone_ids:
        e = 0.0
        a = 0.0
        for tech in (d for d in s.dispatchables if d.zone == z):
            for f in tech.fuels:
                fuel = s.fuel(f)
                burn_mwh = float(_series(problem, x, T, "b", z, after=(tech.id, f)).sum()) * 1000.0 * h
                e += fuel.co2_intensity * burn_mwh
                a += fuel.air_pollution_var * burn_mwh / 1000.0
            cap = tech.initial_capacity + _val(problem, x, "g_add", z, tech.id) - _val(problem, x, "g_dec", z, tech.id)
            a += s.fuel(tech.fuels[0]).air_pollution_fix * cap
        for tech in (n for n in s.intermittents if n.zone == z):
            if tech.pollution_fuel is None:
                continue
            fuel = s.fuel(tech.pollution_fuel)
            cap = tech.initial_capacity + _val(problem, x, "r_add", z, tech.id) - _val(problem, x, "r_dec", z, tech.id)
            a += fuel.air_pollution_fix * cap
            a += fuel.air_pollution_var * h * float(_series(problem, x, T, "r", z, after=(tech.id,)).sum())
        out[z] = (e, a)
    return out


def zonal_prices(problem: LpProblem, y: np.ndarray, s: Scenario) -> Dict[str, np.ndarray]:
    """Hourly electricity prices (currency/MWh) from the clearing-row duals."""
    out = {}
    for z in s.zone_ids:
        rows = [problem.index.row("clear_el", z, t) for t in range(s.horizon)]
        # duals are per weighted hour; divide the weight back out
        out[z] = np.asarray(y[rows], dtype=float) / s.hour_weight
    return out


def trade_balance(problem: LpProblem, x: np.ndarray, prices: Dict[str, np.ndarray], s: Scenario, zone: str) -> float:
    """Net export revenue of ``zone`` in k-currency, valuing flows at the partner's price."""
    rev = 0.0
    for link in s.links:
        if zone not in link.pair:
            continue
        zz = link.zone_b if link.zone_a == zone else link.zone_a
        flow = np.array([_val(problem, x, "x", zone, zz, t) for t in range(s.horizon)])
        rev += s.hour_weight * float(flow @ prices[zz])
    return rev


def net_system_cost(outcome: SystemOutcome, zone: str) -> float:
    """Zonal objective cost plus air pollution minus trade revenue (k-currency)."""
    return outcome.lp_zone_cost[zone] + outcome.air_pollution[zone] - outcome.trade_revenue[zone]


def _capacities(problem: LpProblem, x: np.ndarray, s: Scenario) -> List[CapacityRecord]:
    recs = []
    for t in s.dispatchables:
        recs.append(CapacityRecord(t.zone, t.id, "chp" if t.is_chp else "dispatchable", t.initial_capacity,
                                   _val(problem, x, "g_add", t.zone, t.id), _val(problem, x, "g_dec", t.zone, t.id)))
    for n in s.intermittents:
        recs.append(CapacityRecord(n.zone, n.id, n.kind, n.initial_capacity,
                                   _val(problem, x, "r_add", n.zone, n.id), _val(problem, x, "r_dec", n.zone, n.id)))
    for k in s.storages:
        recs.append(CapacityRecord(k.zone, k.id, "storage_power", k.power_out, _val(problem, x, "s_add", k.zone, k.id), 0.0))
        recs.append(CapacityRecord(k.zone, k.id, "storage_energy", k.energy, _val(problem, x, "v_add", k.zone, k.id), 0.0))
    for link in s.links:
        a, b = link.pair
        recs.append(CapacityRecord(a, f"link_{b}", "ntc", link.initial_ntc, _val(problem, x, "x_add", a, b), 0.0))
        recs.append(CapacityRecord(b, f"link_{a}", "ntc", link.initial_ntc, _val(problem, x, "x_add", b, a), 0.0))
    return recs


def _dispatch(problem: LpProblem, x: np.ndarray, s: Scenario) -> Dict[Tuple[str, str], np.ndarray]:
    T = s.horizon
    out: Dict[Tuple[str, str], np.ndarray] = {}
    for t in s.dispatchables:
        if EL in t.outputs:
            out[(t.zone, t.id)] = sum(
                (_series(problem, x, T, "g", t.zone, after=(t.id, EL, f)) for f in t.fuels), np.zeros(T)
            )
    for n in s.intermittents:
        out[(n.zone, n.id)] = _series(problem, x, T, "r", n.zone, after=(n.id,))
    for k in s.storages:
        out[(k.zone, k.id)] = _series(problem, x, T, "s_out", k.zone, after=(k.id,)) - _series(
            problem, x, T, "s_in", k.zone, after=(k.id,)
        )
    for z in s.zone_ids:
        out[(z, "curtailment")] = -_series(problem, x, T, "q_cur", z)
        out[(z, "lost_load")] = _series(problem, x, T, "q_nse", z, after=(EL,))
        net = np.zeros(T)
        for link in s.links:
            if z in link.pair:
                zz = link.zone_b if link.zone_a == z else link.zone_a
                net -= np.array([_val(problem, x, "x", z, zz, t) for t in range(T)])
        out[(z, "net_import")] = net
    return out


def run_scenario(s: Scenario, options: Optional[SolverOptions] = None, raise_on_failure: bool = False) -> SystemOutcome:
    """Build, solve and evaluate one scenario."""
    problem = build_lp(s)
    sol = solve(problem, options)
    return evaluate(problem, sol, s, raise_on_failure=raise_on_failure)


def evaluate(problem: LpProblem, sol: LpSolution, s: Scenario, raise_on_failure: bool = False) -> SystemOutcome:
    outcome = SystemOutcome(
        scenario=s.name,
        scenario_hash=problem.metadata["scenario_hash"],
        status=sol.status,
        zones=list(s.zone_ids),
        solver_stats={
            "iterations": sol.iterations,
            "rows": problem.n_rows,
            "cols": problem.n_cols,
            "max_primal_residual": sol.max_primal_residual,
            "max_dual_residual": sol.max_dual_residual,
            "duality_gap": sol.duality_gap,
        },
        message=sol.message,
    )
    if not sol.optimal:
        outcome.message = sol.message or f"solver returned {sol.status}"
        if sol.status == "Infeasible":
            outcome.message += "; " + diagnose_infeasibility(problem, sol)
        logger.warning("%s: %s", s.name, outcome.message)
        if raise_on_failure:
            raise InfeasibleScenario(outcome.message)
        return outcome

    x, y = sol.primal, sol.dual
    outcome.objective = sol.objective
    outcome.costs = cost_components(problem, x, s)
    outcome.lp_zone_cost = lp_zone_cost(problem, x)
    ea = emissions_and_air_pollution(problem, x, s)
    outcome.emissions = {z: ea[z][0] for z in s.zone_ids}
    outcome.air_pollution = {z: ea[z][1] for z in s.zone_ids}
    outcome.prices = zonal_prices(problem, y, s)
    outcome.trade_revenue = {z: trade_balance(problem, x, outcome.prices, s, z) for z in s.zone_ids}
    outcome.capacities = _capacities(problem, x, s)
    outcome.dispatch = _dispatch(problem, x, s)
    for z in s.zone_ids:
        outcome.renewable_generation[z] = 1000.0 * renewable_accounting(problem, x, s, z)
        outcome.curtailment[z] = 1000.0 * s.hour_weight * float(_series(problem, x, s.horizon, "q_cur", z).sum())
        if problem.index.has_row("res_target", z):
            outcome.target_dual[z] = float(y[problem.index.row("res_target", z)])
    return outcome


def renewable_accounting(problem: LpProblem, x: np.ndarray, s: Scenario, z: str) -> float:
    """Energy credited to the renewable target in GWh per year (gross of curtailment)."""
    h = s.hour_weight
    total = 0.0
    for tech in (n for n in s.intermittents if n.zone == z):
        total += h * float(_series(problem, x, s.horizon, "r", z, after=(tech.id,)).sum())
    for tech in (d for d in s.dispatchables if d.zone == z and EL in d.outputs):
        for f in tech.fuels:
            if s.fuel(f).renewable:
                total += h * float(_series(problem, x, s.horizon, "g", z, after=(tech.id, EL, f)).sum())
    return total + renewable_inflow_energy(s, z)


def diagnose_infeasibility(problem: LpProblem, sol: LpSolution, limit: int = 6) -> str:
    """Row families carrying the infeasibility certificate, heaviest first.

    Grouping by family keeps one structural row (say the renewable target) from
    being crowded out by dozens of hourly rows it conflicts with.
    """
    if sol.ray is None or len(sol.ray) != problem.n_rows:
        return "no certificate available"
    w = np.abs(sol.ray)
    if not w.size or w.max() <= 0:
        return "no certificate available"
    groups: Dict[str, List[int]] = {}
    for i in np.argsort(-w, kind="stable"):
        if w[i] <= 1e-9 * w.max():
            break
        fam = problem.index.row_key(int(i))[0] if problem.index is not None else "row"
        groups.setdefault(fam, []).append(int(i))
    parts = []
    for fam, rows in list(groups.items())[:limit]:
        first = problem.row_name(rows[0])
        parts.append(first if len(rows) == 1 else f"{first} and {len(rows) - 1} more {fam} rows")
    return "rows in conflict: " + "; ".join(parts)


# sweeps -------------------------------------------------------------------------

@dataclass
class SweepPoint:
    wind_cap: float
    outcome: SystemOutcome
    c_net: float
    total_cost: float


@dataclass
class OcStep:
    cap_high: float
    cap_low: float
    midpoint: float
    oc_net: float  # currency per MW and year
    oc_total: float


@dataclass
class SweepResult:
    zone: str
    step: float
    points: List[SweepPoint] = field(default_factory=list)

    @property
    def caps(self) -> List[float]:
        return [p.wind_cap for p in self.points]

    @property
    def oc(self) -> List[OcStep]:
        return opportunity_cost(self)


def sweep_zone(s: Scenario) -> str:
    if s.sweep_zone is not None:
        return s.sweep_zone
    for z in s.zones:
        if z.renewable_target:
            return z.id
    for n in s.intermittents:
        if n.kind == WIND_KIND:
            return n.zone
    return s.zone_ids[0]


def cap_grid(w_star: float, step: float) -> List[float]:
    """``w*, w* - step, ...`` down to a final point at zero."""
    if not step > 0:
        raise ValueError("step must be > 0")
    caps = [w_star]
    k = 1
    while True:
        c = w_star - k * step
        # guard against float drift right at zero
        if c <= 1e-9 * max(1.0, w_star):
            break
        caps.append(c)
        k += 1
    if w_star > 0:
        caps.append(0.0)
    return caps


def _run_capped(args) -> SystemOutcome:
    s, zone, cap, options = args
    if cap is not None:
        caps = dict(s.wind_cap)
        caps[zone] = cap
        s = replace(s, wind_cap=caps)
    return run_scenario(s, options)


def _map(fn: Callable, items: Sequence, jobs: int) -> List:
    if jobs <= 1 or len(items) <= 1:
        return [fn(a) for a in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


def _point(cap: float, outcome: SystemOutcome, zone: str) -> SweepPoint:
    if outcome.optimal:
        return SweepPoint(cap, outcome, net_system_cost(outcome, zone), outcome.objective)
    return SweepPoint(cap, outcome, math.nan, math.nan)


def sweep_wind_cap(s: Scenario, step: float = 0.5, options: Optional[SolverOptions] = None,
                   jobs: int = 1, zone: Optional[str] = None) -> SweepResult:
    """Solve unrestricted, then tighten the wind cap of ``zone`` step by step down to zero."""
    if not step > 0:
        raise ValueError("step must be > 0")
    zone = zone or sweep_zone(s)
    base = run_scenario(s, options)
    result = SweepResult(zone=zone, step=step)
    if not base.optimal:
        result.points.append(_point(math.nan, base, zone))
        return result
    w_star = base.wind_capacity(zone)
    caps = cap_grid(w_star, step)
    result.points.append(_point(caps[0], base, zone))
    rest = _map(_run_capped, [(s, zone, c, options) for c in caps[1:]], jobs)
    for c, out in zip(caps[1:], rest):
        result.points.append(_point(c, out, zone))
    return result


def opportunity_cost(sweep: SweepResult) -> List[OcStep]:
    """Finite differences of net (and total) cost along consecutive caps, at the midpoint."""
    pts = sweep.points
    if len(pts) < 2:
        return []
    out = []
    for a, b in zip(pts, pts[1:]):
        dw = a.wind_cap - b.wind_cap
        if dw == 0:
            raise ValueError("zero capacity step")
        out.append(OcStep(a.wind_cap, b.wind_cap, 0.5 * (a.wind_cap + b.wind_cap),
                          (b.c_net - a.c_net) / dw, (b.total_cost - a.total_cost) / dw))
    return out


# overrides and grids -----------------------------------------------------------

SCALAR_OVERRIDES = ("co2_price", "pv_capital_cost", "ntc", "wind_cap", "horizon")


class OverrideError(KeyError):
    pass


def _coerce(old, text):
    if isinstance(old, bool):
        if str(text).lower() in ("1", "true", "yes", "on"):
            return True
        if str(text).lower() in ("0", "false", "no", "off"):
            return False
        raise OverrideError(f"expected a boolean, got {text!r}")
    if isinstance(old, (int, float)) or old is None:
        return float(text)
    if isinstance(old, str):
        return str(text)
    raise OverrideError(f"cannot override a field of type {type(old).__name__}")


def _truncate(s: Scenario, T: int) -> Scenario:
    if T > s.horizon or T < 0:
        raise OverrideError(f"horizon {T} outside 0..{s.horizon}")
    cut = lambda a: np.asarray(a)[:T]  # noqa: E731
    return replace(
        s,
        horizon=T,
        intermittents=tuple(replace(n, profile=cut(n.profile)) for n in s.intermittents),
        storages=tuple(replace(k, inflow=None if k.inflow is None else cut(k.inflow)) for k in s.storages),
        demand={k: cut(v) for k, v in s.demand.items()},
        fuel_price={k: cut(v) for k, v in s.fuel_price.items()},
        co2_price={k: cut(v) for k, v in s.co2_price.items()},
    )


def apply_overrides(s: Scenario, overrides: Dict[str, object]) -> Scenario:
    """Apply scalar (``co2_price``, ``pv_capital_cost``, ``ntc``, ``wind_cap``,
    ``horizon``) and dotted (``tech.<id>.<field>``, ``zone.<id>.<field>``,
    ``fuel.<id>.<field>``) overrides.

    ``pv_capital_cost`` is overnight cost in currency per kW and is annuitised
    with each PV plant's own financing terms.
    """
    for key in sorted(overrides):
        val = overrides[key]
        if key == "co2_price":
            s = replace(s, co2_price={z: np.full(s.horizon, float(val)) for z in s.zone_ids})
        elif key == "pv_capital_cost":
            techs = []
            for n in s.intermittents:
                if n.kind == "pv":
                    if n.lifetime is None:
                        raise OverrideError(f"{n.zone}.{n.id} has no lifetime to annuitise with")
                    n = replace(n, capital_cost=annuity(float(val) * 1000.0, n.wacc, n.lifetime))
                techs.append(n)
            s = replace(s, intermittents=tuple(techs))
        elif key == "ntc":
            s = replace(s, links=tuple(replace(x, initial_ntc=float(val)) for x in s.links))
        elif key == "wind_cap":
            caps = dict(s.wind_cap)
            caps[sweep_zone(s)] = float(val)
            s = replace(s, wind_cap=caps)
        elif key == "horizon":
            s = _truncate(s, int(float(val)))
        elif "." in key:
            s = _dotted(s, key, val)
        else:
            raise OverrideError(f"unknown override {key!r}")
    return s


def _dotted(s: Scenario, key: str, val) -> Scenario:
    kind, _, rest = key.partition(".")
    ident, _, attr = rest.rpartition(".")
    if not ident or not attr:
        raise OverrideError(f"malformed override {key!r}")

    def hit(obj, zone_attr="zone"):
        return ident in (obj.id, f"{getattr(obj, zone_attr, '')}.{obj.id}")

    def patch(items):
        found = False
        new = []
        for obj in items:
            if hit(obj):
                if not hasattr(obj, attr) or attr in ("id", "zone"):
                    raise OverrideError(f"{key}: no field {attr!r}")
                obj = replace(obj, **{attr: _coerce(getattr(obj, attr), val)})
                found = True
            new.append(obj)
        return tuple(new), found

    if kind == "tech":
        changes = {}
        found = False
        for group in ("dispatchables", "intermittents", "storages"):
            items, f = patch(getattr(s, group))
            changes[group] = items
            found |= f
        if not found:
            raise OverrideError(f"{key}: no technology {ident!r}")
        return replace(s, **changes)
    if kind in ("zone", "fuel"):
        group = "zones" if kind == "zone" else "fuels"
        items, found = patch(getattr(s, group))
        if not found:
            raise OverrideError(f"{key}: no {kind} {ident!r}")
        return replace(s, **{group: items})
    raise OverrideError(f"unknown override {key!r}")


@dataclass
class GridCell:
    key: Tuple[Optional[float], Optional[float], Optional[float]]  # (co2, pv, ntc); None keeps the base value
    sweep: Optional[SweepResult]
    target_binding: Optional[bool]
    error: str = ""

    @property
    def label(self) -> str:
        parts = [f"{n}={'base' if v is None else format(v, 'g')}" for n, v in zip(("co2", "pv", "ntc"), self.key)]
        return "_".join(parts)


def _grid_cell(args) -> GridCell:
    base, key, step, options = args
    names = ("co2_price", "pv_capital_cost", "ntc")
    try:
        s = apply_overrides(base, {n: v for n, v in zip(names, key) if v is not None})
        sw = sweep_wind_cap(s, step, options)
        first = sw.points[0].outcome
        binding = None
        if first.optimal and first.target_dual:
            binding = any(abs(v) > TARGET_DUAL_TOL for v in first.target_dual.values())
        return GridCell(key, sw, binding)
    except Exception as exc:  # one bad cell must not sink the grid
        logger.warning("grid cell %s failed: %s", key, exc)
        return GridCell(key, None, None, error=str(exc))


def _axis(values: Optional[Iterable[float]]) -> List[Optional[float]]:
    if values is None:
        return [None]
    out = sorted(set(float(v) for v in values))
    if not out:
        raise ValueError("grid axes must be nonempty")
    return out


def sensitivity_grid(base: Scenario, co2_prices: Optional[Iterable[float]] = None,
                     pv_costs: Optional[Iterable[float]] = None, ntc_values: Optional[Iterable[float]] = None,
                     step: float = 0.5, options: Optional[SolverOptions] = None, jobs: int = 1) -> List[GridCell]:
    """Sweep every (co2, pv, ntc) combination; results sorted by key.

    An axis left as ``None`` keeps the base scenario's value.  Each cell
    records whether the renewable-target row still binds at the unrestricted
    point, which is how the target/CO2-price interplay is read off.
    """
    keys = list(itertools.product(_axis(co2_prices), _axis(pv_costs), _axis(ntc_values)))
    cells = _map(_grid_cell, [(base, k, step, options) for k in keys], jobs)
    return sorted(cells, key=lambda c: tuple(-math.inf if v is None else v for v in c.key))


def target_is_binding(outcome: SystemOutcome, tol: float = None) -> Optional[bool]:
    """Whether any zone's renewable-target row has a nonzero dual (None if no target)."""
    tol = TARGET_DUAL_TOL if tol is None else tol
    if not outcome.optimal or not outcome.target_dual:
        return None
    return any(abs(v) > tol for v in outcome.target_dual.values())
