"""Scenario runner.

Every hour the engine (1) lets each farm decide its dispatch, (2) builds the
order book from the resulting offers and bids and asks the auctioneer for a
quote, (3) clears the market and (4) commits battery transitions. A per-farm
ledger then reconciles physical flows: a shortfall left by the rules is
bought from the grid at the tier price, and energy the rules cannot place
(for instance a full battery) is booked as curtailment. Both are logged.

Decisions never look at market prices, so toggling P2P trading changes only
who is paid and how much is imported from or exported to the grid, never the
kWh flows at a farm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import metrics
from .battery import BatterySpec, BatteryState, apply_transition
from .data_io import (DEFAULT_START, REPORT_COLUMNS, EnergyTrace, TraceProfile, atomic_write_text,
                      load_trace_csv, synthesize_traces, write_report)
from .errors import ConfigError, DataError, InvariantBreach
from .farm import FarmConfig, StepInputs, decide_step
from .market import OrderBook, clear_market
from .tariff import TariffSchedule, grid_price, tier_for_hour

LEDGER_TOL = 1e-9
LEDGER_FIELDS = ("generation", "load", "charged", "discharged", "bought_internal",
                 "bought_grid", "sold_internal", "sold_grid", "clamp_residual", "reconciled")


@dataclass(frozen=True)
class FarmTraces:
    load: np.ndarray
    pv: np.ndarray
    wind: np.ndarray

    @classmethod
    def from_traces(cls, load: EnergyTrace, pv: EnergyTrace = None, wind: EnergyTrace = None):
        n = len(load)
        zeros = np.zeros(n)
        return cls(load.values, pv.values if pv is not None else zeros,
                   wind.values if wind is not None else zeros)

    def __len__(self):
        return len(self.load)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    farms: tuple
    tariff: TariffSchedule = TariffSchedule()
    p2p_enabled: bool = True
    horizon_steps: int = 24
    seed: int = 0
    start: datetime = DEFAULT_START
    # farm_id -> (seed or None, TraceProfile); None derives the seed from the scenario seed
    synthetic: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "farms", tuple(self.farms))
        if self.horizon_steps < 1:
            raise ConfigError("horizon_steps must be >= 1")
        ids = [f.farm_id for f in self.farms]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate farm ids in scenario {self.scenario_id}")
        if not ids:
            raise ConfigError(f"scenario {self.scenario_id} has no farms")

    def with_overrides(self, scenario_id: str, p2p_enabled: bool = None, **farm_flags):
        farms = tuple(replace(f, **farm_flags) for f in self.farms) if farm_flags else self.farms
        return replace(self, scenario_id=scenario_id, farms=farms,
                       p2p_enabled=self.p2p_enabled if p2p_enabled is None else p2p_enabled)


@dataclass(frozen=True)
class StepRecord:
    """Market bulletin and community cash for one step."""

    step: int
    timestamp: str
    tier: str
    tsp: float
    tbp: float
    sdr: Optional[float]
    isp: float
    ibp: float
    grid_import: float
    grid_export: float
    community_cost: float
    community_revenue: float
    market_grid_import: float = 0.0
    reconciled_import: float = 0.0
    curtailed: float = 0.0
    internal_traded: float = 0.0
    auctioneer_imbalance: float = 0.0


@dataclass
class ScenarioReport:
    scenario_id: str
    p2p_enabled: bool
    farm_ids: tuple
    steps: list
    ledger: dict            # field -> (T, N) array of kWh
    cost: np.ndarray        # (T, N) cash paid for energy
    revenue: np.ndarray     # (T, N) cash received for energy
    soc: np.ndarray         # (T + 1, N), NaN for farms without a battery
    audit: list = field(default_factory=list)
    reconciliations: int = 0

    def columns(self):
        return REPORT_COLUMNS

    def rows(self):
        for s in self.steps:
            yield {c: getattr(s, c) for c in REPORT_COLUMNS}

    @property
    def horizon(self) -> int:
        return len(self.steps)

    def farm_totals(self) -> dict:
        out = {}
        for j, fid in enumerate(self.farm_ids):
            entry = {name: float(math.fsum(arr[:, j])) for name, arr in self.ledger.items()}
            entry["cost"] = float(math.fsum(self.cost[:, j]))
            entry["revenue"] = float(math.fsum(self.revenue[:, j]))
            out[fid] = entry
        return out

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "p2p_enabled": self.p2p_enabled,
            "columns": list(REPORT_COLUMNS),
            "steps": list(self.rows()),
            "farm_totals": self.farm_totals(),
            "community_cost": metrics.community_cost(self),
            "community_revenue": metrics.sold_revenue(self),
            "reconciliations": self.reconciliations,
        }

    def audit_jsonl(self) -> str:
        return "".join(json.dumps(line, sort_keys=True) + "\n" for line in self.audit)


@dataclass
class ComparisonReport:
    base_id: str
    reports: dict           # scenario_id -> ScenarioReport
    metric_sets: dict       # scenario_id -> MetricSet
    deltas: dict            # scenario_id -> {"cost": pct, "revenue": pct, "peak": pct}

    _COLUMNS = ("scenario_id", "p2p_enabled", "community_cost", "community_revenue",
                "peak_hour_grid_import_kwh", "cost_delta_pct", "revenue_delta_pct",
                "peak_delta_pct")

    def columns(self):
        return self._COLUMNS

    def rows(self):
        for sid, report in self.reports.items():
            m = self.metric_sets[sid]
            d = self.deltas[sid]
            yield {
                "scenario_id": sid,
                "p2p_enabled": int(report.p2p_enabled),
                "community_cost": m.community_purchase_cost,
                "community_revenue": m.community_revenue,
                "peak_hour_grid_import_kwh": m.peak_hour_grid_import_kwh,
                "cost_delta_pct": d["cost"],
                "revenue_delta_pct": d["revenue"],
                "peak_delta_pct": d["peak"],
            }

    def to_dict(self) -> dict:
        return {
            "base": self.base_id,
            "columns": list(self._COLUMNS),
            "scenarios": list(self.rows()),
            "daily_cost": {sid: [float(x) for x in m.per_day_cost_series]
                           for sid, m in self.metric_sets.items()},
        }


def _check_traces(config: ScenarioConfig, traces: Mapping) -> None:
    for farm in config.farms:
        if farm.farm_id not in traces:
            raise DataError(f"no traces bound for farm {farm.farm_id}")
        t = traces[farm.farm_id]
        for name in ("load", "pv", "wind"):
            if len(getattr(t, name)) != config.horizon_steps:
                raise DataError(
                    f"farm {farm.farm_id}: {name} trace has {len(getattr(t, name))} steps, "
                    f"horizon is {config.horizon_steps}"
                )


def run_simulation(config: ScenarioConfig, traces: Mapping) -> ScenarioReport:
    """Run one scenario over its horizon and return the full report."""
    _check_traces(config, traces)
    farms = config.farms
    schedule = config.tariff
    n, horizon = len(farms), config.horizon_steps
    ids = tuple(f.farm_id for f in farms)
    index = {fid: j for j, fid in enumerate(ids)}

    loads = np.column_stack([np.asarray(traces[f].load, float) for f in ids])
    pvs = np.column_stack([np.asarray(traces[f].pv, float) for f in ids])
    winds = np.column_stack([np.asarray(traces[f].wind, float) for f in ids])

    ledger = {name: np.zeros((horizon, n)) for name in LEDGER_FIELDS}
    cost = np.zeros((horizon, n))
    revenue = np.zeros((horizon, n))
    soc = np.full((horizon + 1, n), np.nan)
    states = []
    for j, f in enumerate(farms):
        state = BatteryState(f.initial_soc_percent) if f.has_battery else None
        states.append(state)
        if state is not None:
            soc[0, j] = state.soc_percent

    steps = []
    audit = []
    reconciliations = 0
    for t in range(horizon):
        ts = config.start + timedelta(hours=t)
        tier = tier_for_hour(ts.hour, schedule)
        lambda_buy = grid_price(tier, schedule)

        decisions = []
        offers, bids = [], []
        for j, f in enumerate(farms):
            inputs = StepInputs(float(pvs[t, j]), float(winds[t, j]), float(loads[t, j]), tier)
            d = decide_step(inputs, states[j], f)
            decisions.append(d)
            if d.e_sell > 0:
                offers.append((f.farm_id, d.e_sell))
            elif d.e_buy > 0:
                bids.append((f.farm_id, d.e_buy))

        result = clear_market(OrderBook(offers, bids, tier, t), schedule, config.p2p_enabled)
        if abs(result.internal_traded_kwh
               - math.fsum(s.sold_internal for s in result.settlements)) > LEDGER_TOL:
            raise InvariantBreach("internal energy not balanced", step=t)

        events = []
        step_cost = []
        step_rev = []
        for s in result.settlements:
            j = index[s.farm_id]
            ledger["bought_internal"][t, j] = s.bought_internal
            ledger["bought_grid"][t, j] = s.bought_grid
            ledger["sold_internal"][t, j] = s.sold_internal
            ledger["sold_grid"][t, j] = s.sold_grid
            if s.cash_delta < 0:
                cost[t, j] = -s.cash_delta
            else:
                revenue[t, j] = s.cash_delta

        reconciled_total = 0.0
        curtailed_total = 0.0
        for j, f in enumerate(farms):
            d = decisions[j]
            gen = (pvs[t, j] if f.has_pv else 0.0) + (winds[t, j] if f.has_wind else 0.0)
            charged, discharged = d.charged_kwh, d.discharged_kwh
            if states[j] is not None:
                tr = apply_transition(states[j], f.battery_spec, charged, discharged)
                states[j] = tr.state
                soc[t + 1, j] = tr.state.soc_percent
                charged, discharged = tr.charged_kwh, tr.discharged_kwh

            row_in = gen + discharged + ledger["bought_internal"][t, j] + ledger["bought_grid"][t, j]
            row_out = loads[t, j] + charged + ledger["sold_internal"][t, j] + ledger["sold_grid"][t, j]
            gap = row_in - row_out
            if gap < -LEDGER_TOL:
                # rules left load uncovered: buy the shortfall from the grid
                need = -gap
                ledger["bought_grid"][t, j] += need
                ledger["reconciled"][t, j] = need
                cost[t, j] += need * lambda_buy
                reconciled_total += need
                reconciliations += 1
                events.append({"farm_id": f.farm_id, "kind": "reconcile_import",
                               "kwh": need, "rules": list(d.rule_trace)})
                gap = 0.0
            elif gap > LEDGER_TOL:
                curtailed_total += gap
                events.append({"farm_id": f.farm_id, "kind": "curtail", "kwh": gap,
                               "rules": list(d.rule_trace)})
            # sub-tolerance round-off is booked as residual so the identity stays exact
            ledger["clamp_residual"][t, j] = gap
            ledger["generation"][t, j] = gen
            ledger["load"][t, j] = loads[t, j]
            ledger["charged"][t, j] = charged
            ledger["discharged"][t, j] = discharged
            step_cost.append(cost[t, j])
            step_rev.append(revenue[t, j])

        grid_import = result.grid_import_kwh + reconciled_total
        record = StepRecord(
            step=t,
            timestamp=ts.isoformat(),
            tier=tier.name.lower(),
            tsp=result.tsp,
            tbp=result.tbp,
            sdr=result.quote.sdr,
            isp=result.quote.isp,
            ibp=result.quote.ibp,
            grid_import=grid_import,
            grid_export=result.grid_export_kwh,
            community_cost=math.fsum(step_cost),
            community_revenue=math.fsum(step_rev),
            market_grid_import=result.grid_import_kwh,
            reconciled_import=reconciled_total,
            curtailed=curtailed_total,
            internal_traded=result.internal_traded_kwh,
            auctioneer_imbalance=result.auctioneer_imbalance,
        )
        steps.append(record)
        bulletin = {c: getattr(record, c) for c in REPORT_COLUMNS}
        bulletin.update(
            market_grid_import=record.market_grid_import,
            reconciled_import=record.reconciled_import,
            curtailed=record.curtailed,
            auctioneer_imbalance=record.auctioneer_imbalance,
            events=events,
            rules={f.farm_id: list(d.rule_trace) for f, d in zip(farms, decisions)},
        )
        audit.append(bulletin)

    report = ScenarioReport(
        scenario_id=config.scenario_id,
        p2p_enabled=config.p2p_enabled,
        farm_ids=ids,
        steps=steps,
        ledger=ledger,
        cost=cost,
        revenue=revenue,
        soc=soc,
        audit=audit,
        reconciliations=reconciliations,
    )
    check_ledger(report)
    return report


def ledger_imbalance(report: ScenarioReport) -> np.ndarray:
    """Per step and farm: inflows minus outflows. Zero when energy is conserved."""
    L = report.ledger
    inflow = L["generation"] + L["discharged"] + L["bought_internal"] + L["bought_grid"]
    outflow = L["load"] + L["charged"] + L["sold_internal"] + L["sold_grid"] + L["clamp_residual"]
    return inflow - outflow


def check_ledger(report: ScenarioReport, tol: float = LEDGER_TOL) -> None:
    gap = np.abs(ledger_imbalance(report))
    if gap.size and gap.max() > tol:
        t, j = np.unravel_index(np.argmax(gap), gap.shape)
        raise InvariantBreach(
            f"ledger imbalance {gap[t, j]:.3e} kWh", step=int(t), farm_id=report.farm_ids[j]
        )
    if np.any(report.ledger["clamp_residual"] < -tol):
        t, j = np.argwhere(report.ledger["clamp_residual"] < -tol)[0]
        raise InvariantBreach("negative curtailment", step=int(t), farm_id=report.farm_ids[j])
    soc = report.soc[~np.isnan(report.soc)]
    if soc.size and (soc.min() < 0 or soc.max() > 100):
        raise InvariantBreach("state of charge left [0, 100]")


def run_comparison(base: ScenarioConfig, variants: Sequence, traces: Mapping) -> ComparisonReport:
    """Run the base and each variant on the same traces and report percentage
    changes of cost, sold revenue and peak-hour grid import against the base."""
    for v in variants:
        if v.horizon_steps != base.horizon_steps:
            raise ConfigError(
                f"variant {v.scenario_id} horizon {v.horizon_steps} != base {base.horizon_steps}"
            )
        if v.start != base.start or [f.farm_id for f in v.farms] != [f.farm_id for f in base.farms]:
            raise ConfigError(f"variant {v.scenario_id} does not share the base trace bindings")
    ids = [base.scenario_id] + [v.scenario_id for v in variants]
    if len(set(ids)) != len(ids):
        raise ConfigError("scenario ids in a comparison must be unique")

    reports, metric_sets, deltas = {}, {}, {}
    for cfg in (base, *variants):
        report = run_simulation(cfg, traces)
        reports[cfg.scenario_id] = report
        metric_sets[cfg.scenario_id] = metrics.compute_metrics(report, cfg.tariff)
    b = metric_sets[base.scenario_id]
    for sid, m in metric_sets.items():
        deltas[sid] = {
            "cost": metrics.percent_delta(b.community_purchase_cost, m.community_purchase_cost),
            "revenue": metrics.percent_delta(b.community_revenue, m.community_revenue),
            "peak": metrics.percent_delta(b.peak_hour_grid_import_kwh, m.peak_hour_grid_import_kwh),
        }
    return ComparisonReport(base.scenario_id, reports, metric_sets, deltas)


def standard_variants(config: ScenarioConfig):
    """The three community set-ups compared in the evaluation: renewables with
    P2P trading, renewables without P2P, and neither."""
    return (
        config.with_overrides("re_p2p", p2p_enabled=True),
        config.with_overrides("re_only", p2p_enabled=False),
        config.with_overrides("no_re", p2p_enabled=False, has_pv=False, has_wind=False),
    )


# ---------------------------------------------------------------- config files

def _farm_from_dict(data: dict) -> FarmConfig:
    data = dict(data)
    battery = data.pop("battery", None)
    traces = data.pop("traces", None) or {}
    data.pop("synthetic", None)
    spec = None
    initial = 50.0
    if battery is not None:
        battery = dict(battery)
        initial = battery.pop("initial_soc_percent", 50.0)
        spec = BatterySpec(**battery)
    data.setdefault("has_battery", spec is not None)
    try:
        return FarmConfig(
            battery_spec=spec,
            initial_soc_percent=initial,
            load_trace_ref=traces.get("load"),
            pv_trace_ref=traces.get("pv"),
            wind_trace_ref=traces.get("wind"),
            **data,
        )
    except TypeError as exc:
        raise ConfigError(f"bad farm entry: {exc}") from None


def scenario_from_dict(data: dict) -> ScenarioConfig:
    try:
        farms_data = data["farms"]
        scenario_id = data.get("scenario_id", "base")
        horizon = int(data["horizon_steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario config missing or bad field: {exc}") from None
    if not isinstance(farms_data, list):
        raise ConfigError("'farms' must be a list")
    farms = [_farm_from_dict(f) for f in farms_data]
    synthetic = {}
    for f in farms_data:
        if "synthetic" in f:
            syn = dict(f["synthetic"])
            seed = syn.pop("seed", None)
            seed = None if seed is None else int(seed)
            try:
                synthetic[f["farm_id"]] = (seed, TraceProfile(**syn))
            except TypeError as exc:
                raise ConfigError(f"bad synthetic profile: {exc}") from None
    start = data.get("start")
    try:
        start = DEFAULT_START if start is None else datetime.fromisoformat(start)
    except ValueError:
        raise ConfigError(f"bad start timestamp {start!r}") from None
    return ScenarioConfig(
        scenario_id=scenario_id,
        farms=tuple(farms),
        tariff=TariffSchedule.from_dict(data.get("tariff", {})),
        p2p_enabled=bool(data.get("p2p_enabled", True)),
        horizon_steps=horizon,
        seed=int(data.get("seed", 0)),
        start=start,
        synthetic=synthetic,
    )


def variants_from_dict(base: ScenarioConfig, data: dict) -> list:
    spec = data.get("variants")
    if spec == "standard":
        # skip set-ups identical to the base so they are not run twice
        return [v for v in standard_variants(base)
                if replace(v, scenario_id=base.scenario_id) != base]
    if not isinstance(spec, list):
        raise ConfigError("'variants' must be a list of variant objects or \"standard\"")
    out = []
    for v in spec:
        if not isinstance(v, dict) or "scenario_id" not in v:
            raise ConfigError(f"malformed variant entry: {v!r}")
        unknown = set(v) - {"scenario_id", "p2p_enabled", "farm_overrides"}
        if unknown:
            raise ConfigError(f"unknown variant fields: {sorted(unknown)}")
        overrides = v.get("farm_overrides", {})
        bad = set(overrides) - {"has_pv", "has_wind"}
        if bad:
            raise ConfigError(f"variants may only override has_pv/has_wind, got {sorted(bad)}")
        p2p = v.get("p2p_enabled")
        out.append(base.with_overrides(str(v["scenario_id"]),
                                       p2p_enabled=None if p2p is None else bool(p2p),
                                       **{k: bool(x) for k, x in overrides.items()}))
    return out


def load_config_file(path):
    """Parse a scenario JSON file. Returns (config, raw dict)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return scenario_from_dict(data), data


def load_traces(config: ScenarioConfig, base_dir=".") -> dict:
    """Resolve every farm's trace bindings (files relative to ``base_dir`` or
    synthetic profiles) into :class:`FarmTraces`."""
    base_dir = Path(base_dir)
    out = {}
    for k, farm in enumerate(config.farms):
        if farm.farm_id in config.synthetic:
            seed, profile = config.synthetic[farm.farm_id]
            if seed is None:
                seed = config.seed + k
            load, pv, wind = synthesize_traces(seed, profile, config.horizon_steps, config.start)
            out[farm.farm_id] = FarmTraces.from_traces(load, pv, wind)
            continue
        if farm.load_trace_ref is None:
            raise ConfigError(f"farm {farm.farm_id} has no load trace binding")

        def read(ref, kind):
            if ref is None:
                if (kind == "pv" and farm.has_pv) or (kind == "wind" and farm.has_wind):
                    raise ConfigError(f"farm {farm.farm_id} enables {kind} but binds no {kind} trace")
                return None
            return load_trace_csv(base_dir / ref, config.horizon_steps,
                                  trace_id=f"{farm.farm_id}-{kind}")

        out[farm.farm_id] = FarmTraces.from_traces(
            read(farm.load_trace_ref, "load"), read(farm.pv_trace_ref, "pv"),
            read(farm.wind_trace_ref, "wind"))
    return out


def write_scenario_outputs(report: ScenarioReport, out_dir, format: str = "csv") -> dict:
    out_dir = Path(out_dir)
    report_path = out_dir / f"report_{report.scenario_id}.{format}"
    audit_path = out_dir / f"audit_{report.scenario_id}.jsonl"
    write_report(report, report_path, format)
    atomic_write_text(audit_path, report.audit_jsonl())
    return {"report": report_path, "audit": audit_path}


def synthetic_community(n_farms: int = 10, horizon_steps: int = 8760, seed: int = 0,
                        p2p_enabled: bool = True, tariff: TariffSchedule = TariffSchedule()):
    """A mixed community of PV, wind and hybrid farms of different sizes, half
    of them with batteries, on synthetic traces. Returns (config, traces)."""
    farms, traces, synthetic = [], {}, {}
    for k in range(n_farms):
        fid = f"farm{k + 1:02d}"
        has_pv = k % 3 != 2
        has_wind = k % 3 != 0
        has_battery = k % 2 == 0
        spec = BatterySpec(capacity_kwh=40.0 + 10.0 * (k % 3), max_charge_per_step_kwh=10.0,
                           max_discharge_per_step_kwh=10.0) if has_battery else None
        farms.append(FarmConfig(fid, has_pv=has_pv, has_wind=has_wind, has_battery=has_battery,
                                battery_spec=spec))
        profile = TraceProfile(farm_scale=0.6 + 0.1 * k, pv_peak_kw=8.0 + 3.0 * k,
                               wind_mean_kw=2.0 + 2.0 * (k % 4))
        synthetic[fid] = (seed + k, profile)
        traces[fid] = FarmTraces.from_traces(*synthesize_traces(seed + k, profile, horizon_steps))
    config = ScenarioConfig("community", tuple(farms), tariff=tariff, p2p_enabled=p2p_enabled,
                            horizon_steps=horizon_steps, seed=seed, synthetic=synthetic)
    return config, traces
