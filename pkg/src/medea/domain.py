"""Domain types for one model run plus the pure parameter transformations.

Units inside the model: power in GW, energy in GWh, money in k-currency.
Specific costs are kept in currency per MW (or MWh) because
currency/MW x GW = k-currency, which is exactly the objective's unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

EL, HT = "el", "ht"
PRODUCTS = (EL, HT)
POWER_FUEL = "power"
INTERMITTENT_KINDS = ("wind_on", "wind_off", "pv", "ror")
DEFAULT_VOLL = 12500.0


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


class FrozenDict(dict):
    """Read-only dict that still pickles (scenarios travel to worker processes)."""

    def _blocked(self, *args, **kwargs):
        raise TypeError("FrozenDict is read-only")

    __setitem__ = __delitem__ = clear = pop = popitem = setdefault = update = _blocked  # type: ignore[assignment]

    def __reduce__(self):
        return (FrozenDict, (dict(self),))

    def __hash__(self):  # type: ignore[override]
        return hash(tuple(sorted(self.items(), key=repr)))


def _frozen_map(mapping) -> Mapping:
    return FrozenDict(dict(mapping or {}))


def annuity(overnight_cost: float, wacc: float, lifetime: float) -> float:
    """Equivalent annual payment for ``overnight_cost`` at rate ``wacc`` over ``lifetime`` years."""
    for name, v in (("overnight_cost", overnight_cost), ("wacc", wacc), ("lifetime", lifetime)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if overnight_cost < 0 or wacc < 0 or lifetime < 1:
        raise ValueError("need overnight_cost >= 0, wacc >= 0, lifetime >= 1")
    if wacc == 0:
        return overnight_cost / lifetime
    return overnight_cost * wacc / (1.0 - (1.0 + wacc) ** -lifetime)


@dataclass(frozen=True)
class Zone:
    id: str
    reserve_load_factor: float = 0.2
    reserve_intermittent_factor: float = 0.1
    voll: float = DEFAULT_VOLL
    renewable_target: Optional[float] = None  # MWh per year
    distance_to: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "distance_to", _frozen_map(self.distance_to))


@dataclass(frozen=True)
class Fuel:
    id: str
    co2_intensity: float = 0.0  # t CO2 per MWh fuel
    air_pollution_var: float = 0.0  # currency per MWh fuel
    air_pollution_fix: float = 0.0  # currency per MW and year
    renewable: bool = False


@dataclass(frozen=True)
class FeasibleOperatingRegion:
    """Corner points of a co-generation unit's operating region.

    ``outputs[l] = (el, ht)`` per unit of installed electrical capacity and
    ``fuel_input[l]`` is the fuel burnt at that corner.  Operation is a convex
    combination of corners scaled to available capacity.
    """

    outputs: Tuple[Tuple[float, float], ...]
    fuel_input: Tuple[float, ...]

    @property
    def n_corners(self) -> int:
        return len(self.outputs)

    def contains(self, el: float, ht: float, tol: float = 1e-9) -> bool:
        """Whether ``(el, ht)`` lies in the convex hull of the corners (LP feasibility)."""
        from scipy.optimize import linprog

        pts = np.array(self.outputs, dtype=float).T
        k = pts.shape[1]
        A_eq = np.vstack([pts, np.ones((1, k))])
        b_eq = np.array([el, ht, 1.0])
        res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
        if res.status != 0:
            return False
        return bool(np.abs(A_eq @ res.x - b_eq).max() <= tol * 10)


def build_feasible_operating_region(
    eta_el: float, beta: float, sigma_bp: float, max_heat: float = 1.0
) -> FeasibleOperatingRegion:
    """Four-corner extraction-condensing region in normalised (el, ht) space.

    Corners are full condensing ``(1, 0)``, full extraction ``(1 - beta*q, q)``,
    backpressure ``(sigma_bp*q, q)`` and the origin, with ``q = max_heat``.
    Fuel at each corner is ``(el + beta*ht) / eta_el``.  Heat extraction is
    clipped so the extraction corner never drops below the backpressure line.
    """
    if not (0 < eta_el <= 1):
        raise ValueError("eta_el must lie in (0, 1]")
    if beta < 0 or sigma_bp < 0 or max_heat < 0:
        raise ValueError("beta, sigma_bp and max_heat must be nonnegative")
    q = max_heat
    if beta + sigma_bp > 0:
        q = min(q, 1.0 / (beta + sigma_bp))
    if q == 0:
        outputs = ((1.0, 0.0), (0.0, 0.0))
    else:
        outputs = ((1.0, 0.0), (1.0 - beta * q, q), (sigma_bp * q, q), (0.0, 0.0))
    fuel = tuple((el + beta * ht) / eta_el for el, ht in outputs)
    return FeasibleOperatingRegion(outputs=outputs, fuel_input=fuel)


@dataclass(frozen=True)
class DispatchableTech:
    id: str
    zone: str
    fuels: Tuple[str, ...]
    efficiency: Mapping[str, float]  # output product -> efficiency (same for every fuel)
    initial_capacity: float = 0.0  # GW
    capital_cost: float = 0.0  # currency/MW, annuitised
    om_qfix: float = 0.0  # currency/MW a
    om_var: float = 0.0  # currency/MWh
    expandable: bool = False
    chp_region: Optional[FeasibleOperatingRegion] = None
    # financing terms, kept so capital-cost overrides can be re-annuitised
    wacc: float = 0.05
    lifetime: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "fuels", tuple(self.fuels))
        object.__setattr__(self, "efficiency", _frozen_map(self.efficiency))

    @property
    def is_chp(self) -> bool:
        return self.chp_region is not None

    @property
    def outputs(self) -> Tuple[str, ...]:
        if self.is_chp:
            return PRODUCTS
        return tuple(m for m in PRODUCTS if m in self.efficiency)


@dataclass(frozen=True)
class IntermittentTech:
    id: str
    zone: str
    kind: str  # wind_on, wind_off, pv, ror
    profile: np.ndarray
    initial_capacity: float = 0.0
    capital_cost: float = 0.0
    om_qfix: float = 0.0
    om_var: float = 0.0
    expandable: bool = True
    pollution_fuel: Optional[str] = None  # pseudo-fuel carrying air-pollution cost
    wacc: float = 0.05
    lifetime: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "profile", _frozen_array(self.profile))

    @property
    def peak_profile(self) -> float:
        return float(self.profile.max()) if len(self.profile) else 0.0


@dataclass(frozen=True)
class StorageTech:
    id: str
    zone: str
    power_out: float = 0.0  # GW
    power_in: float = 0.0  # GW
    energy: float = 0.0  # GWh
    eff_in: float = 1.0
    eff_out: float = 1.0
    inflow: Optional[np.ndarray] = None  # GW
    capital_cost_power: float = 0.0
    capital_cost_energy: float = 0.0
    expandable: bool = False
    boundary_level: Optional[float] = None  # GWh; None means half the initial energy

    def __post_init__(self) -> None:
        if self.inflow is not None:
            object.__setattr__(self, "inflow", _frozen_array(self.inflow))

    @property
    def level_floor(self) -> float:
        if self.boundary_level is not None:
            return self.boundary_level
        return 0.5 * self.energy

    def inflows(self, horizon: int) -> np.ndarray:
        if self.inflow is None:
            return np.zeros(horizon)
        return np.asarray(self.inflow)


@dataclass(frozen=True)
class TransmissionLink:
    zone_a: str
    zone_b: str
    initial_ntc: float = 0.0  # GW, usable in both directions
    capital_cost: float = 0.0  # currency per MW km, annuitised
    expandable: bool = False

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.zone_a, self.zone_b)


@dataclass(frozen=True)
class Scenario:
    horizon: int
    zones: Tuple[Zone, ...]
    fuels: Tuple[Fuel, ...]
    dispatchables: Tuple[DispatchableTech, ...] = ()
    intermittents: Tuple[IntermittentTech, ...] = ()
    storages: Tuple[StorageTech, ...] = ()
    links: Tuple[TransmissionLink, ...] = ()
    demand: Mapping[Tuple[str, str], np.ndarray] = field(default_factory=dict)
    fuel_price: Mapping[str, np.ndarray] = field(default_factory=dict)
    co2_price: Mapping[str, np.ndarray] = field(default_factory=dict)
    wind_cap: Mapping[str, float] = field(default_factory=dict)
    # number of real hours each modelled hour stands for (8760/T for a sample)
    hour_weight: float = 1.0
    name: str = "scenario"
    start: str = "2030-01-01T00:00"  # timestamp of the first modelled hour (UTC)
    sweep_zone: Optional[str] = None  # zone whose wind deployment is capped in sweeps

    def __post_init__(self) -> None:
        for attr in ("zones", "fuels", "dispatchables", "intermittents", "storages", "links"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "demand", _frozen_map({k: _frozen_array(v) for k, v in self.demand.items()}))
        object.__setattr__(self, "fuel_price", _frozen_map({k: _frozen_array(v) for k, v in self.fuel_price.items()}))
        object.__setattr__(self, "co2_price", _frozen_map({k: _frozen_array(v) for k, v in self.co2_price.items()}))
        object.__setattr__(self, "wind_cap", _frozen_map(self.wind_cap))

    # lookups
    def zone(self, zid: str) -> Zone:
        for z in self.zones:
            if z.id == zid:
                return z
        raise KeyError(zid)

    def fuel(self, fid: str) -> Fuel:
        for f in self.fuels:
            if f.id == fid:
                return f
        raise KeyError(fid)

    @property
    def zone_ids(self) -> List[str]:
        return [z.id for z in self.zones]

    def demand_series(self, zone: str, product: str) -> np.ndarray:
        d = self.demand.get((zone, product))
        return np.zeros(self.horizon) if d is None else np.asarray(d)

    def peak_load(self, zone: str, product: str = EL) -> float:
        d = self.demand_series(zone, product)
        return float(d.max()) if len(d) else 0.0

    def price(self, fuel: str) -> np.ndarray:
        p = self.fuel_price.get(fuel)
        return np.zeros(self.horizon) if p is None else np.asarray(p)

    def co2(self, zone: str) -> np.ndarray:
        p = self.co2_price.get(zone)
        return np.zeros(self.horizon) if p is None else np.asarray(p)

    def with_changes(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: [{self.rule}] {self.message}"


def validate_scenario(s: Scenario) -> List[Violation]:
    """Check type invariants, series lengths and cross references.  Never raises."""
    out: List[Violation] = []

    def bad(path: str, rule: str, msg: str) -> None:
        out.append(Violation(path, rule, msg))

    def check_series(path: str, arr, lo: Optional[float] = None, hi: Optional[float] = None) -> None:
        a = np.asarray(arr, dtype=float)
        if a.ndim != 1 or len(a) != s.horizon:
            bad(path, "length", f"expected {s.horizon} values, got {a.shape[0] if a.ndim else 0}")
            return
        if not np.all(np.isfinite(a)):
            bad(path, "finite", f"non-finite value at index {int(np.flatnonzero(~np.isfinite(a))[0])}")
            return
        if lo is not None and len(a) and a.min() < lo:
            i = int(np.argmin(a))
            bad(path, "lower-bound", f"value {a[i]:g} at index {i} below {lo:g}")
        if hi is not None and len(a) and a.max() > hi:
            i = int(np.argmax(a))
            bad(path, "upper-bound", f"value {a[i]:g} at index {i} above {hi:g}")

    if s.horizon < 0:
        bad("horizon", "nonnegative", "horizon must be >= 0")
    if not (s.hour_weight > 0):
        bad("hour_weight", "positive", "hour weight must be > 0")

    zone_ids = [z.id for z in s.zones]
    fuel_ids = [f.id for f in s.fuels]
    for dup in {x for x in zone_ids if zone_ids.count(x) > 1}:
        bad(f"zones.{dup}", "unique", "duplicate zone id")
    for dup in {x for x in fuel_ids if fuel_ids.count(x) > 1}:
        bad(f"fuels.{dup}", "unique", "duplicate fuel id")

    for z in s.zones:
        p = f"zones.{z.id}"
        if z.reserve_load_factor < 0:
            bad(p, "lambda-nonneg", "reserve_load_factor must be >= 0")
        if z.reserve_intermittent_factor < 0:
            bad(p, "sigma-nonneg", "reserve_intermittent_factor must be >= 0")
        if not z.voll > 0:
            bad(p, "voll-positive", "value of lost load must be > 0")
        if z.renewable_target is not None and z.renewable_target < 0:
            bad(p, "target-nonneg", "renewable target must be >= 0")
        for other, dist in z.distance_to.items():
            if other not in zone_ids:
                bad(f"{p}.distance_to.{other}", "ref-zone", "unknown zone")
                continue
            if dist < 0:
                bad(f"{p}.distance_to.{other}", "distance-nonneg", "negative distance")
            back = s.zone(other).distance_to.get(z.id)
            if back is not None and back != dist:
                bad(f"{p}.distance_to.{other}", "distance-symmetric", f"{dist} vs {back}")

    for f in s.fuels:
        p = f"fuels.{f.id}"
        if f.co2_intensity < 0:
            bad(p, "co2-nonneg", "co2 intensity must be >= 0")
        if f.air_pollution_var < 0 or f.air_pollution_fix < 0:
            bad(p, "airpol-nonneg", "air pollution cost must be >= 0")
        if f.id in ("biomass", POWER_FUEL) and f.co2_intensity != 0:
            bad(p, "co2-zero", f"{f.id} must have zero co2 intensity")

    tech_ids: Dict[Tuple[str, str], str] = {}

    def register(zone: str, tid: str, path: str) -> None:
        if zone not in zone_ids:
            bad(path, "ref-zone", f"unknown zone {zone!r}")
        if (zone, tid) in tech_ids:
            bad(path, "unique", f"id {tid!r} already used by {tech_ids[(zone, tid)]}")
        tech_ids[(zone, tid)] = path

    for t in s.dispatchables:
        p = f"dispatchables.{t.zone}.{t.id}"
        register(t.zone, t.id, p)
        if not t.fuels:
            bad(p, "fuels-nonempty", "fuel set is empty")
        for f in t.fuels:
            if f not in fuel_ids:
                bad(f"{p}.fuels.{f}", "ref-fuel", f"unknown fuel {f!r}")
        if t.initial_capacity < 0:
            bad(p, "capacity-nonneg", "initial capacity must be >= 0")
        if t.capital_cost < 0 or t.om_qfix < 0 or t.om_var < 0:
            bad(p, "cost-nonneg", "costs must be >= 0")
        if t.is_chp:
            reg = t.chp_region
            for l, ((el, ht), chi) in enumerate(zip(reg.outputs, reg.fuel_input)):
                if el < 0 or ht < 0 or el > 1 or ht > 1:
                    bad(f"{p}.chp.l{l + 1}", "psi-range", "corner outputs must lie in [0, 1]")
                if (el > 0 or ht > 0) and chi <= 0:
                    bad(f"{p}.chp.l{l + 1}", "chi-positive", "producing corner needs fuel input")
        else:
            if not t.efficiency:
                bad(p, "efficiency", "no output efficiency given")
            for m, eta in t.efficiency.items():
                if m not in PRODUCTS:
                    bad(f"{p}.efficiency.{m}", "product", f"unknown product {m!r}")
                # heat pumps exceed 1 on heat output; electricity output is bounded
                if not eta > 0 or (m == EL and eta > 1):
                    bad(f"{p}.efficiency.{m}", "efficiency-range", f"efficiency {eta} out of range")

    for t in s.intermittents:
        p = f"intermittents.{t.zone}.{t.id}"
        register(t.zone, t.id, p)
        if t.kind not in INTERMITTENT_KINDS:
            bad(p, "kind", f"unknown intermittent kind {t.kind!r}")
        check_series(f"{p}.profile", t.profile, 0.0, 1.0)
        if t.initial_capacity < 0:
            bad(p, "capacity-nonneg", "initial capacity must be >= 0")
        if t.pollution_fuel is not None and t.pollution_fuel not in fuel_ids:
            bad(f"{p}.pollution_fuel", "ref-fuel", f"unknown fuel {t.pollution_fuel!r}")

    for k in s.storages:
        p = f"storages.{k.zone}.{k.id}"
        register(k.zone, k.id, p)
        if min(k.power_in, k.power_out, k.energy) < 0:
            bad(p, "capacity-nonneg", "storage capacities must be >= 0")
        if not (0 < k.eff_in <= 1) or not (0 < k.eff_out <= 1):
            bad(p, "efficiency-range", "storage efficiencies must lie in (0, 1]")
        if k.eff_in * k.eff_out > 1:
            bad(p, "round-trip", "round-trip efficiency above 1")
        if k.energy + 1e-12 < max(k.power_in, k.power_out) * 1.0:
            bad(p, "energy-vs-power", "energy capacity below one hour of power")
        if k.inflow is not None:
            check_series(f"{p}.inflow", k.inflow, 0.0)
        if k.level_floor > k.energy + 1e-12 and not k.expandable:
            bad(p, "boundary-level", "boundary level exceeds energy capacity")

    seen_pairs = set()
    for x in s.links:
        p = f"links.{x.zone_a}-{x.zone_b}"
        for zid in x.pair:
            if zid not in zone_ids:
                bad(p, "ref-zone", f"unknown zone {zid!r}")
        if x.zone_a == x.zone_b:
            bad(p, "distinct-zones", "link must join two zones")
        key = frozenset(x.pair)
        if key in seen_pairs:
            bad(p, "unique", "duplicate link (links are symmetric)")
        seen_pairs.add(key)
        if x.initial_ntc < 0 or x.capital_cost < 0:
            bad(p, "nonneg", "ntc and cost must be >= 0")
        if x.expandable and x.zone_a in zone_ids and x.zone_b in zone_ids:
            if x.zone_b not in s.zone(x.zone_a).distance_to and x.zone_a not in s.zone(x.zone_b).distance_to:
                bad(p, "distance", "expandable link needs a zone distance")

    for (zid, m), series in s.demand.items():
        p = f"demand.{zid}.{m}"
        if zid not in zone_ids:
            bad(p, "ref-zone", f"unknown zone {zid!r}")
        if m not in PRODUCTS:
            bad(p, "product", f"unknown product {m!r}")
        check_series(p, series, 0.0)
    for fid, series in s.fuel_price.items():
        if fid not in fuel_ids:
            bad(f"fuel_price.{fid}", "ref-fuel", f"unknown fuel {fid!r}")
        check_series(f"fuel_price.{fid}", series, 0.0)
    for zid, series in s.co2_price.items():
        if zid not in zone_ids:
            bad(f"co2_price.{zid}", "ref-zone", f"unknown zone {zid!r}")
        check_series(f"co2_price.{zid}", series, 0.0)
    if s.sweep_zone is not None and s.sweep_zone not in zone_ids:
        bad("sweep_zone", "ref-zone", f"unknown zone {s.sweep_zone!r}")
    for zid, cap in s.wind_cap.items():
        if zid not in zone_ids:
            bad(f"wind_cap.{zid}", "ref-zone", f"unknown zone {zid!r}")
        if not (cap >= 0 and math.isfinite(cap)):
            bad(f"wind_cap.{zid}", "nonneg", "wind cap must be finite and >= 0")
    return out
