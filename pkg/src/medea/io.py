"""Scenario loading, numerical preprocessing of input series, and result writers.

Config files are INI-style (read with :mod:`configparser`); section names:

``[scenario]``                 name, horizon, hour_weight, start, sweep_zone
``[zone.<id>]``                reserve_load_factor, reserve_intermittent_factor, voll,
                               renewable_target (MWh/a), wind_cap (GW), co2_price,
                               distance.<other> (km)
``[fuel.<id>]``                co2_intensity, air_pollution_var, air_pollution_fix,
                               renewable, price | price_monthly
``[dispatchable.<zone>.<id>]`` fuels, efficiency.el / efficiency.ht, initial_capacity,
                               overnight_cost + wacc + lifetime | capital_cost, om_qfix,
                               om_var, expandable, chp.eta_el / chp.beta / chp.sigma_bp /
                               chp.max_heat
``[intermittent.<zone>.<id>]`` kind, profile, initial_capacity, overnight_cost + wacc +
                               lifetime | capital_cost, om_qfix, om_var, expandable,
                               pollution_fuel, annual_energy (MWh, rescales the profile)
``[storage.<zone>.<id>]``      power_out, power_in, energy, eff_in, eff_out, inflow,
                               capital_cost_power, capital_cost_energy, expandable,
                               boundary_level
``[link.<a>.<b>]``             initial_ntc, capital_cost, expandable
``[demand]``                   <zone>.el / <zone>.ht = series reference or constant
``[solver]``                   method, feasibility_tol, optimality_tol, iteration_limit

A series reference has the form ``file.csv:column`` (path relative to the
config file).  Series files start with one ``# unit: <unit>`` line followed by
a CSV table with a ``timestamp`` column.
"""
from __future__ import annotations

import calendar
import configparser
import csv
import json
import logging
import math
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from medea.domain import (
    EL,
    HT,
    DispatchableTech,
    Fuel,
    IntermittentTech,
    Scenario,
    StorageTech,
    TransmissionLink,
    Zone,
    annuity,
    build_feasible_operating_region,
)

logger = logging.getLogger(__name__)

UNITS = ("GW", "MW", "ratio", "currency/MWh", "GWh")
HOURS_PER_WEEK = 168


class ConfigError(ValueError):
    """Problem in a config or series file; the message carries file and line."""


# ---------------------------------------------------------------- preprocessing

def scale_profile(series, target_annual_energy: float, capacity: float, hour_weight: float = 1.0) -> np.ndarray:
    """Rescale a capacity-factor series so ``capacity`` produces ``target_annual_energy``.

    ``target_annual_energy`` and ``capacity`` must use matching units (MWh and
    MW, or GWh and GW).  Raises ``ValueError`` if any scaled value exceeds 1.
    """
    a = np.asarray(series, dtype=float)
    if capacity <= 0:
        raise ValueError("capacity must be > 0")
    if len(a) == 0 or a.min() < 0 or a.max() > 1:
        raise ValueError("profile values must lie in [0, 1]")
    total = capacity * a.sum() * hour_weight
    if total <= 0:
        raise ValueError("profile has no energy to scale")
    k = target_annual_energy / total
    out = a * k
    if out.max() > 1.0 + 1e-12:
        i = int(np.argmax(out))
        raise ValueError(f"scaled profile peaks at {out[i]:.4f} (index {i}); factor {k:.4f} too large")
    return np.minimum(out, 1.0)


def _pchip_hold(x_anchor: np.ndarray, y_anchor: np.ndarray, x_eval: np.ndarray) -> np.ndarray:
    """PCHIP inside the anchor range, constant continuation outside it."""
    if len(x_anchor) == 1:
        return np.full(len(x_eval), float(y_anchor[0]))
    f = PchipInterpolator(x_anchor, y_anchor, extrapolate=False)
    out = f(np.clip(x_eval, x_anchor[0], x_anchor[-1]))
    return np.asarray(out, dtype=float)


def month_anchor_hours(n_months: int, year: int = 2030) -> Tuple[np.ndarray, int]:
    """Hour index of each month's midpoint and the total hours covered."""
    starts = []
    lengths = []
    h = 0
    for k in range(n_months):
        y, m = year + k // 12, k % 12 + 1
        hours = calendar.monthrange(y, m)[1] * 24
        starts.append(h)
        lengths.append(hours)
        h += hours
    mids = np.array([s + n // 2 for s, n in zip(starts, lengths)], dtype=float)
    return mids, h


def resample_monthly_prices(monthly: Sequence[float], hours: Optional[int] = None, year: int = 2030) -> np.ndarray:
    """Shape-preserving cubic resampling of monthly prices to hours.

    Anchors sit on each month's middle hour, so the hourly series hits every
    monthly value exactly there; before the first and after the last anchor
    the value is held.  One monthly value gives a constant series.
    """
    y = np.asarray(monthly, dtype=float)
    if len(y) == 0:
        raise ValueError("need at least one monthly value")
    if not np.all(np.isfinite(y)):
        raise ValueError("monthly prices must be finite")
    mids, total = month_anchor_hours(len(y), year)
    hours = total if hours is None else hours
    return _pchip_hold(mids, y, np.arange(hours, dtype=float))


def estimate_inflows(weekly_fill, hourly_generation, hourly_pumping, eff_in: float = 1.0,
                     eff_out: float = 1.0) -> np.ndarray:
    """Hourly natural inflow (GW) that closes the reservoir's weekly energy balance.

    ``weekly_fill`` holds W+1 levels (GWh) at week boundaries; generation and
    pumping are hourly (GW) over the same W weeks.  Weekly inflow is the level
    change plus energy drawn for generation minus energy stored from pumping.
    Negative weeks are clamped to zero with a warning; the weekly values are
    spread over hours with monotone cubic interpolation and rescaled so each
    week's hours sum to its estimate.
    """
    fill = np.asarray(weekly_fill, dtype=float)
    gen = np.asarray(hourly_generation, dtype=float)
    pump = np.asarray(hourly_pumping, dtype=float)
    if len(fill) < 2:
        raise ValueError("need at least two fill levels")
    W = len(fill) - 1
    if len(gen) != W * HOURS_PER_WEEK or len(pump) != W * HOURS_PER_WEEK:
        raise ValueError(
            f"span mismatch: {len(fill)} weekly levels need {W * HOURS_PER_WEEK} hourly values, "
            f"got generation {len(gen)} and pumping {len(pump)}"
        )
    if not (0 < eff_in <= 1 and 0 < eff_out <= 1):
        raise ValueError("efficiencies must lie in (0, 1]")
    gen_w = gen.reshape(W, HOURS_PER_WEEK).sum(axis=1)
    pump_w = pump.reshape(W, HOURS_PER_WEEK).sum(axis=1)
    weekly = np.diff(fill) + gen_w / eff_out - eff_in * pump_w
    neg = weekly < 0
    if neg.any():
        logger.warning("clamping %d negative weekly inflow estimates to zero (min %.3f GWh)",
                       int(neg.sum()), float(weekly.min()))
        weekly = np.where(neg, 0.0, weekly)
    mids = np.arange(W) * HOURS_PER_WEEK + HOURS_PER_WEEK / 2.0
    hourly = _pchip_hold(mids, weekly / HOURS_PER_WEEK, np.arange(W * HOURS_PER_WEEK) + 0.5)
    hourly = np.maximum(hourly, 0.0).reshape(W, HOURS_PER_WEEK)
    sums = hourly.sum(axis=1)
    for w in range(W):
        if weekly[w] == 0:
            hourly[w] = 0.0
        elif sums[w] > 0:
            hourly[w] *= weekly[w] / sums[w]
        else:
            hourly[w] = weekly[w] / HOURS_PER_WEEK
    return hourly.ravel()


# ---------------------------------------------------------------- series files

def read_series_file(path: str) -> Tuple[str, pd.DataFrame]:
    """Read a unit-tagged series CSV; returns ``(unit, frame)``."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if not first.startswith("#") or ":" not in first:
        raise ConfigError(f"{path}:1: expected '# unit: <unit>' header")
    unit = first.split(":", 1)[1].strip()
    if unit not in UNITS:
        raise ConfigError(f"{path}:1: unknown unit {unit!r}")
    frame = pd.read_csv(path, skiprows=1)
    if "timestamp" in frame.columns:
        ts = pd.to_datetime(frame["timestamp"], utc=True)
        if not ts.is_monotonic_increasing or ts.duplicated().any():
            raise ConfigError(f"{path}: timestamps must be strictly increasing")
        if len(ts) > 2:
            steps = ts.diff().dropna().unique()
            if len(steps) != 1:
                raise ConfigError(f"{path}: gap or irregular step in timestamps")
    return unit, frame


def write_series_file(path: str, unit: str, columns: Dict[str, Sequence[float]], start: str = "2030-01-01T00:00",
                      freq: str = "h") -> None:
    n = len(next(iter(columns.values())))
    idx = pd.date_range(pd.Timestamp(start, tz="UTC"), periods=n, freq=freq)
    frame = pd.DataFrame({"timestamp": idx.strftime("%Y-%m-%dT%H:%MZ")})
    for k, v in columns.items():
        frame[k] = np.asarray(v, dtype=float)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# unit: {unit}\n")
        frame.to_csv(fh, index=False, lineterminator="\n", float_format="%.10g")


# ---------------------------------------------------------------- config loading

class _Config:
    """configparser wrapper that remembers line numbers for error messages."""

    def __init__(self, path: str):
        self.path = path
        self.base = os.path.dirname(os.path.abspath(path))
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        self.cp.optionxform = str  # keep key case
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
        try:
            self.cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        self.lines: Dict[Tuple[str, str], int] = {}
        self.section_line: Dict[str, int] = {}
        sec = None
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("[") and line.endswith("]"):
                sec = line[1:-1].strip()
                self.section_line[sec] = no
            elif sec and line and line[0] not in "#;" and ("=" in line or ":" in line):
                key = line.split("=", 1)[0] if "=" in line else line.split(":", 1)[0]
                self.lines[(sec, key.strip())] = no

    def where(self, sec: str, key: Optional[str] = None) -> str:
        no = self.lines.get((sec, key)) if key else None
        no = no or self.section_line.get(sec, 0)
        return f"{self.path}:{no}"

    def error(self, sec: str, key: Optional[str], msg: str) -> ConfigError:
        return ConfigError(f"{self.where(sec, key)}: [{sec}] {msg}")

    def sections(self, prefix: str) -> List[str]:
        return [s for s in self.cp.sections() if s.startswith(prefix + ".")]

    def has(self, sec: str, key: str) -> bool:
        return self.cp.has_option(sec, key)

    def get(self, sec: str, key: str, default=None, required: bool = False) -> Optional[str]:
        if self.cp.has_option(sec, key):
            return self.cp.get(sec, key).strip()
        if required:
            raise self.error(sec, None, f"missing mandatory key {key!r}")
        return default

    def num(self, sec: str, key: str, default: Optional[float] = None, required: bool = False) -> Optional[float]:
        raw = self.get(sec, key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise self.error(sec, key, f"{key} = {raw!r} is not a number") from None

    def flag(self, sec: str, key: str, default: bool = False) -> bool:
        if not self.cp.has_option(sec, key):
            return default
        try:
            return self.cp.getboolean(sec, key)
        except ValueError:
            raise self.error(sec, key, f"{key} is not a boolean") from None

    def prefixed(self, sec: str, prefix: str) -> Dict[str, str]:
        return {k[len(prefix):]: v.strip() for k, v in self.cp.items(sec) if k.startswith(prefix)}


def _series(cfg: _Config, sec: str, key: str, horizon: int, allowed: Iterable[str],
            cache: Dict[str, Tuple[str, pd.DataFrame]]) -> np.ndarray:
    raw = cfg.get(sec, key, required=True)
    try:
        return np.full(horizon, float(raw))
    except ValueError:
        pass
    if ":" not in raw:
        raise cfg.error(sec, key, f"{key} must be a number or 'file.csv:column'")
    fname, col = raw.rsplit(":", 1)
    path = os.path.join(cfg.base, fname)
    if path not in cache:
        if not os.path.exists(path):
            raise cfg.error(sec, key, f"series file {fname!r} not found")
        try:
            cache[path] = read_series_file(path)
        except ConfigError as exc:
            raise cfg.error(sec, key, str(exc)) from None
    unit, frame = cache[path]
    allowed = tuple(allowed)
    if unit not in allowed:
        raise cfg.error(sec, key, f"unit mismatch: {fname} is in {unit}, expected one of {', '.join(allowed)}")
    if col not in frame.columns:
        raise cfg.error(sec, key, f"column {col!r} not in {fname}")
    values = frame[col].to_numpy(dtype=float)
    if len(values) < horizon:
        raise cfg.error(sec, key, f"{fname}:{col} has {len(values)} rows, horizon is {horizon}")
    values = values[:horizon]
    if unit == "MW":
        values = values / 1000.0
    return values


def _capital_cost(cfg: _Config, sec: str) -> Tuple[float, float, Optional[float]]:
    """Annualised capital cost plus the financing terms used to get it."""
    wacc = cfg.num(sec, "wacc", 0.05)
    lifetime = cfg.num(sec, "lifetime")
    if cfg.has(sec, "overnight_cost"):
        if lifetime is None:
            raise cfg.error(sec, "overnight_cost", "overnight_cost needs a lifetime")
        try:
            return annuity(cfg.num(sec, "overnight_cost"), wacc, lifetime), wacc, lifetime
        except ValueError as exc:
            raise cfg.error(sec, "overnight_cost", str(exc)) from None
    return cfg.num(sec, "capital_cost", 0.0), wacc, lifetime


def _split_id(cfg: _Config, sec: str, parts: int) -> List[str]:
    bits = sec.split(".")[1:]
    if len(bits) != parts:
        raise cfg.error(sec, None, f"section name must have {parts} dotted parts after the kind")
    return bits


def load_scenario(path: str) -> Scenario:
    """Read a config file (and the series it references) into a :class:`Scenario`."""
    cfg = _Config(path)
    cache: Dict[str, Tuple[str, pd.DataFrame]] = {}
    if not cfg.cp.has_section("scenario"):
        raise ConfigError(f"{path}: missing [scenario] section")
    T = int(cfg.num("scenario", "horizon", required=True))
    if T < 0:
        raise cfg.error("scenario", "horizon", "horizon must be >= 0")
    hour_weight = cfg.num("scenario", "hour_weight", 1.0)

    zones, co2, wind_cap = [], {}, {}
    zone_ids = [s.split(".", 1)[1] for s in cfg.sections("zone")]
    for sec in cfg.sections("zone"):
        zid = sec.split(".", 1)[1]
        dist = {}
        for other, v in cfg.prefixed(sec, "distance.").items():
            if other not in zone_ids:
                raise cfg.error(sec, "distance." + other, f"unknown zone {other!r}")
            dist[other] = cfg.num(sec, "distance." + other)
        zones.append(Zone(
            id=zid,
            reserve_load_factor=cfg.num(sec, "reserve_load_factor", 0.2),
            reserve_intermittent_factor=cfg.num(sec, "reserve_intermittent_factor", 0.1),
            voll=cfg.num(sec, "voll", 12500.0),
            renewable_target=cfg.num(sec, "renewable_target"),
            distance_to=dist,
        ))
        if cfg.has(sec, "co2_price"):
            co2[zid] = _series(cfg, sec, "co2_price", T, ("currency/MWh",), cache)
        if cfg.has(sec, "wind_cap"):
            wind_cap[zid] = cfg.num(sec, "wind_cap")
    if not zones:
        raise ConfigError(f"{path}: no [zone.<id>] sections")

    fuels, prices = [], {}
    fuel_ids = [s.split(".", 1)[1] for s in cfg.sections("fuel")]
    for sec in cfg.sections("fuel"):
        fid = sec.split(".", 1)[1]
        fuels.append(Fuel(
            id=fid,
            co2_intensity=cfg.num(sec, "co2_intensity", 0.0),
            air_pollution_var=cfg.num(sec, "air_pollution_var", 0.0),
            air_pollution_fix=cfg.num(sec, "air_pollution_fix", 0.0),
            renewable=cfg.flag(sec, "renewable"),
        ))
        if cfg.has(sec, "price_monthly"):
            raw = cfg.get(sec, "price_monthly")
            try:
                monthly = [float(v) for v in raw.split(",")]
            except ValueError:
                raise cfg.error(sec, "price_monthly", "price_monthly must be comma-separated numbers") from None
            start = pd.Timestamp(cfg.get("scenario", "start", "2030-01-01T00:00"))
            offset = int((start - pd.Timestamp(year=start.year, month=1, day=1)) / pd.Timedelta(hours=1))
            full = resample_monthly_prices(monthly, hours=offset + T, year=start.year)
            prices[fid] = full[offset:offset + T]
        elif cfg.has(sec, "price"):
            prices[fid] = _series(cfg, sec, "price", T, ("currency/MWh",), cache)

    def fuel_ref(sec: str, key: str, fid: str) -> str:
        if fid not in fuel_ids:
            raise cfg.error(sec, key, f"unknown fuel {fid!r} in {sec.split('.', 1)[1]}")
        return fid

    def zone_ref(sec: str, zid: str) -> str:
        if zid not in zone_ids:
            raise cfg.error(sec, None, f"unknown zone {zid!r}")
        return zid

    dispatchables = []
    for sec in cfg.sections("dispatchable"):
        zid, tid = _split_id(cfg, sec, 2)
        zone_ref(sec, zid)
        fuels_raw = cfg.get(sec, "fuels", required=True)
        tech_fuels = tuple(fuel_ref(sec, "fuels", f.strip()) for f in fuels_raw.split(",") if f.strip())
        eff = {m: float(v) for m, v in cfg.prefixed(sec, "efficiency.").items()}
        for m in eff:
            if m not in (EL, HT):
                raise cfg.error(sec, "efficiency." + m, f"unknown product {m!r}")
        chp = None
        if cfg.has(sec, "chp.eta_el"):
            try:
                chp = build_feasible_operating_region(
                    cfg.num(sec, "chp.eta_el"), cfg.num(sec, "chp.beta", 0.0),
                    cfg.num(sec, "chp.sigma_bp", 0.0), cfg.num(sec, "chp.max_heat", required=True))
            except ValueError as exc:
                raise cfg.error(sec, "chp.eta_el", str(exc)) from None
            eff.setdefault(EL, cfg.num(sec, "chp.eta_el"))
        cc, wacc, life = _capital_cost(cfg, sec)
        dispatchables.append(DispatchableTech(
            id=tid, zone=zid, fuels=tech_fuels, efficiency=eff,
            initial_capacity=cfg.num(sec, "initial_capacity", 0.0),
            capital_cost=cc, om_qfix=cfg.num(sec, "om_qfix", 0.0), om_var=cfg.num(sec, "om_var", 0.0),
            expandable=cfg.flag(sec, "expandable"), chp_region=chp, wacc=wacc, lifetime=life,
        ))

    intermittents = []
    for sec in cfg.sections("intermittent"):
        zid, tid = _split_id(cfg, sec, 2)
        zone_ref(sec, zid)
        profile = _series(cfg, sec, "profile", T, ("ratio",), cache)
        cap = cfg.num(sec, "initial_capacity", 0.0)
        if cfg.has(sec, "annual_energy"):
            try:
                profile = scale_profile(profile, cfg.num(sec, "annual_energy") / 1000.0, cap, hour_weight)
            except ValueError as exc:
                raise cfg.error(sec, "annual_energy", str(exc)) from None
        pol = cfg.get(sec, "pollution_fuel")
        cc, wacc, life = _capital_cost(cfg, sec)
        intermittents.append(IntermittentTech(
            id=tid, zone=zid, kind=cfg.get(sec, "kind", required=True), profile=profile,
            initial_capacity=cap, capital_cost=cc,
            om_qfix=cfg.num(sec, "om_qfix", 0.0), om_var=cfg.num(sec, "om_var", 0.0),
            expandable=cfg.flag(sec, "expandable", True),
            pollution_fuel=None if pol is None else fuel_ref(sec, "pollution_fuel", pol),
            wacc=wacc, lifetime=life,
        ))

    storages = []
    for sec in cfg.sections("storage"):
        zid, kid = _split_id(cfg, sec, 2)
        zone_ref(sec, zid)
        inflow = _series(cfg, sec, "inflow", T, ("GW", "MW"), cache) if cfg.has(sec, "inflow") else None
        storages.append(StorageTech(
            id=kid, zone=zid,
            power_out=cfg.num(sec, "power_out", 0.0), power_in=cfg.num(sec, "power_in", 0.0),
            energy=cfg.num(sec, "energy", 0.0),
            eff_in=cfg.num(sec, "eff_in", 1.0), eff_out=cfg.num(sec, "eff_out", 1.0), inflow=inflow,
            capital_cost_power=cfg.num(sec, "capital_cost_power", 0.0),
            capital_cost_energy=cfg.num(sec, "capital_cost_energy", 0.0),
            expandable=cfg.flag(sec, "expandable"), boundary_level=cfg.num(sec, "boundary_level"),
        ))

    links = []
    for sec in cfg.sections("link"):
        a, b = _split_id(cfg, sec, 2)
        zone_ref(sec, a)
        zone_ref(sec, b)
        links.append(TransmissionLink(
            a, b, initial_ntc=cfg.num(sec, "initial_ntc", 0.0),
            capital_cost=cfg.num(sec, "capital_cost", 0.0), expandable=cfg.flag(sec, "expandable"),
        ))

    demand = {}
    if cfg.cp.has_section("demand"):
        for key, _ in cfg.cp.items("demand"):
            zid, _, m = key.partition(".")
            if zid not in zone_ids:
                raise cfg.error("demand", key, f"unknown zone {zid!r}")
            if m not in (EL, HT):
                raise cfg.error("demand", key, f"unknown product {m!r}")
            demand[(zid, m)] = _series(cfg, "demand", key, T, ("GW", "MW"), cache)

    sweep = cfg.get("scenario", "sweep_zone")
    if sweep is not None and sweep not in zone_ids:
        raise cfg.error("scenario", "sweep_zone", f"unknown zone {sweep!r}")
    return Scenario(
        horizon=T, zones=zones, fuels=fuels, dispatchables=dispatchables, intermittents=intermittents,
        storages=storages, links=links, demand=demand, fuel_price=prices, co2_price=co2,
        wind_cap=wind_cap, hour_weight=hour_weight,
        name=cfg.get("scenario", "name", os.path.splitext(os.path.basename(path))[0]),
        start=cfg.get("scenario", "start", "2030-01-01T00:00"), sweep_zone=sweep,
    )


def solver_settings(path: str) -> Dict[str, object]:
    """Options from the ``[solver]`` section, ready for ``SolverOptions(**...)``."""
    cfg = _Config(path)
    out: Dict[str, object] = {}
    if not cfg.cp.has_section("solver"):
        return out
    if cfg.has("solver", "method"):
        out["method"] = cfg.get("solver", "method")
    for key in ("feasibility_tol", "optimality_tol"):
        if cfg.has("solver", key):
            out[key] = cfg.num("solver", key)
    if cfg.has("solver", "iteration_limit"):
        out["iteration_limit"] = int(cfg.num("solver", "iteration_limit"))
    return out


# ---------------------------------------------------------------- writers

COST_HEADER = ["zone", "fuel_co2", "investment", "om", "nse", "zonal_cost", "air_pollution", "trade_balance",
               "net_cost", "emissions_tco2", "renewable_mwh", "curtailment_mwh"]
CAPACITY_HEADER = ["zone", "tech", "kind", "initial_gw", "added_gw", "decommissioned_gw", "final_gw"]
DISPATCH_HEADER = ["zone", "tech", "month", "energy_gwh"]
SWEEP_HEADER = ["wind_cap_gw", "status", "c_net", "total_cost", "wind_gw", "pv_gw", "emissions_tco2",
                "oc_midpoint_gw", "oc_net", "oc_total"]


ZERO_SNAP = 1e-9


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return ""
    # solver round-off below this is noise; snapping also avoids "-0"
    if abs(v) < ZERO_SNAP:
        return "0"
    # fixed precision keeps reruns byte-identical
    return f"{v:.9g}"


def _write_csv(path: str, header: List[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _months(start: str, n: int) -> List[str]:
    idx = pd.date_range(pd.Timestamp(start, tz="UTC"), periods=n, freq="h")
    return list(idx.strftime("%Y-%m"))


def write_outcome(outcome, destination: str, start: str = "2030-01-01T00:00", hour_weight: float = 1.0,
                  sweep=None, zone: Optional[str] = None) -> List[str]:
    """Write cost_components.csv, capacities.csv, dispatch_monthly.csv, sweep.csv and summary.json.

    Money in k-currency, energy in MWh unless a column says GWh.  ``sweep``
    (a SweepResult) fills sweep.csv; without it the file carries the single
    outcome as one row, reported for ``zone`` (default: first zone).  Returns the written paths in a fixed order.
    """
    try:
        os.makedirs(destination, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {destination}: {exc.strerror}") from exc
    from medea.engine import net_system_cost

    paths = [os.path.join(destination, n) for n in
             ("cost_components.csv", "capacities.csv", "dispatch_monthly.csv", "sweep.csv", "summary.json")]
    rows = []
    if outcome.optimal:
        for z in sorted(outcome.zones):
            c = outcome.costs[z]
            rows.append([z, c.fuel_co2, c.investment, c.om, c.nse, outcome.lp_zone_cost[z],
                         outcome.air_pollution[z], -outcome.trade_revenue[z], net_system_cost(outcome, z),
                         outcome.emissions[z], outcome.renewable_generation[z], outcome.curtailment[z]])
    _write_csv(paths[0], COST_HEADER, rows)

    caps = sorted(outcome.capacities, key=lambda r: (r.zone, r.kind, r.tech))
    _write_csv(paths[1], CAPACITY_HEADER,
               [[r.zone, r.tech, r.kind, r.initial, r.added, r.decommissioned, r.final] for r in caps])

    rows = []
    if outcome.dispatch:
        n = len(next(iter(outcome.dispatch.values())))
        months = np.array(_months(start, n))
        for (z, tech) in sorted(outcome.dispatch):
            series = outcome.dispatch[(z, tech)] * hour_weight
            for m in sorted(set(months)):
                rows.append([z, tech, m, float(series[months == m].sum())])
    _write_csv(paths[2], DISPATCH_HEADER, rows)

    _write_csv(paths[3], SWEEP_HEADER, sweep_rows(sweep) if sweep is not None else sweep_rows_single(outcome, zone))

    summary = {
        "scenario": outcome.scenario,
        "scenario_hash": outcome.scenario_hash,
        "status": outcome.status,
        "objective": None if math.isnan(outcome.objective) else float(_fmt(outcome.objective)),
        "zones": sorted(outcome.zones),
        "message": outcome.message,
    }
    with open(paths[4], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def sweep_rows_single(outcome, zone: Optional[str] = None) -> List[List]:
    if not outcome.optimal:
        return [[math.nan, outcome.status] + [math.nan] * 8]
    zone = zone or sorted(outcome.zones)[0]
    return [[outcome.wind_capacity(zone), outcome.status, outcome.net_cost(zone), outcome.objective,
             outcome.wind_capacity(zone), outcome.capacity_of_kind(zone, "pv"),
             sum(outcome.emissions.values()), math.nan, math.nan, math.nan]]


def sweep_rows(sweep) -> List[List]:
    """One row per cap; OC columns filled on rows that close a finite difference."""
    oc = {round(o.cap_low, 12): o for o in sweep.oc}
    rows = []
    z = sweep.zone
    for p in sweep.points:
        o = p.outcome
        step = oc.get(round(p.wind_cap, 12)) if p is not sweep.points[0] else None
        rows.append([
            p.wind_cap, o.status, p.c_net, p.total_cost,
            o.wind_capacity(z) if o.optimal else math.nan,
            o.capacity_of_kind(z, "pv") if o.optimal else math.nan,
            sum(o.emissions.values()) if o.optimal else math.nan,
            step.midpoint if step else math.nan,
            step.oc_net if step else math.nan,
            step.oc_total if step else math.nan,
        ])
    return rows


def write_sweep(sweep, destination: str) -> str:
    os.makedirs(destination, exist_ok=True)
    path = os.path.join(destination, "sweep.csv")
    _write_csv(path, SWEEP_HEADER, sweep_rows(sweep))
    return path


def write_long_format(cells, path: str) -> None:
    """Plot-ready long table over grid cells: one row per (cell, cap, metric)."""
    rows = []
    for cell in cells:
        co2, pv, ntc = cell.key
        if cell.sweep is None:
            rows.append([co2, pv, ntc, math.nan, "error", math.nan])
            continue
        for r in sweep_rows(cell.sweep):
            for name, val in zip(SWEEP_HEADER[2:], r[2:]):
                rows.append([co2, pv, ntc, r[0], name, val])
    _write_csv(path, ["co2_price", "pv_cost", "ntc", "wind_cap_gw", "metric", "value"], rows)
