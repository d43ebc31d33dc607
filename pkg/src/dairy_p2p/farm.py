"""Hourly rule-based load and battery management for one farm.

Each farm is classified into one of four regimes by whether it has on-site
renewables (PV or wind) and a battery. Within a regime an ordered guard list
decides whether to charge, discharge, sell or buy, and the sell/buy
quantities follow the excess-energy and purchase rule tables.

Energy offered by the battery is already part of the total available energy,
so the battery flows reported in :class:`FarmDecision` are the *net* physical
flows for the step: when the battery both backs the available total and
absorbs a charge, the two are netted and only the difference is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .battery import BatterySpec, BatteryState, charge_capacity, usable_capacity
from .errors import ConfigError
from .tariff import TariffTier

SOC_FULL = 90.0
SOC_LOW = 20.0
SOC_HALF = 50.0

# stable rule identifiers written to the audit log
EQ4_CHARGE = "EQ4.CHARGE"
EQ4_CHARGE_AND_SELL = "EQ4.CHARGE_AND_SELL"
EQ4_SOC_HIGH = "EQ4.SOC_HIGH"
EQ5_BUY_NO_CHARGE = "EQ5.BUY_NO_CHARGE"
EQ5_BUY_AND_CHARGE = "EQ5.BUY_AND_CHARGE"
EQ5_BUY = "EQ5.BUY"
EQ6_SELL = "EQ6.SELL"
EQ6_BUY = "EQ6.BUY"
EQ7_BUY_NO_CHARGE = "EQ7.BUY_NO_CHARGE"
EQ7_BUY_AND_CHARGE = "EQ7.BUY_AND_CHARGE"
EQ7_BUY = "EQ7.BUY"
EQ11_CASE = ("EQ11.CASE_1", "EQ11.CASE_2")
EQ12_CASE = tuple(f"EQ12.CASE_{i}" for i in range(1, 7))
HOLD_UNCOVERED = "HOLD.UNCOVERED"
HOLD_BALANCED = "HOLD.BALANCED"
CLAMP_NEGATIVE = "CLAMP.NEGATIVE"


@dataclass(frozen=True)
class FarmConfig:
    farm_id: str
    has_pv: bool = False
    has_wind: bool = False
    has_battery: bool = False
    battery_spec: Optional[BatterySpec] = None
    initial_soc_percent: float = 50.0
    load_trace_ref: Optional[str] = None
    pv_trace_ref: Optional[str] = None
    wind_trace_ref: Optional[str] = None

    def __post_init__(self):
        if self.has_battery and self.battery_spec is None:
            raise ConfigError(f"farm {self.farm_id}: has_battery set but no battery spec")
        if not self.has_battery and self.battery_spec is not None:
            raise ConfigError(f"farm {self.farm_id}: battery spec given without has_battery")
        if not 0.0 <= self.initial_soc_percent <= 100.0:
            raise ConfigError(f"farm {self.farm_id}: initial SoC outside [0, 100]")

    @property
    def has_renewables(self) -> bool:
        return self.has_pv or self.has_wind


@dataclass(frozen=True, slots=True)
class StepInputs:
    e_pv: float
    e_wind: float
    e_load: float
    tier: TariffTier


@dataclass(frozen=True, slots=True)
class FarmDecision:
    charge: bool
    discharge: bool
    sell: bool
    buy: bool
    e_sell: float
    e_buy: float
    charged_kwh: float
    discharged_kwh: float
    rule_trace: tuple = field(default=())

    @property
    def is_hold(self) -> bool:
        return not (self.charge or self.discharge or self.sell or self.buy)


def renewable_generation(inputs: StepInputs, config: FarmConfig) -> float:
    gen = 0.0
    if config.has_pv:
        gen += inputs.e_pv
    if config.has_wind:
        gen += inputs.e_wind
    return gen


def total_generation(inputs: StepInputs, b_uc: float, config: FarmConfig) -> float:
    """Energy available to the farm this step: enabled renewables plus the
    battery's usable energy. Zero for a farm with no PV, wind or battery."""
    if not (config.has_pv or config.has_wind or config.has_battery):
        return 0.0
    return renewable_generation(inputs, config) + b_uc


def sell_quantity(e_tot: float, e_load: float, soc: Optional[float], b_ccap: float) -> float:
    """Excess energy offered to the market.

    A nearly full battery (SoC >= 90) offers the whole surplus; otherwise only
    what is left after charging. ``soc=None`` denotes a farm with no battery.
    """
    surplus = e_tot - e_load
    if soc is not None and soc >= SOC_FULL:
        return max(surplus, 0.0)
    if surplus > b_ccap:
        return surplus - b_ccap
    return 0.0


def buy_case(inputs: StepInputs, renewable_gen: float, b_uc: float,
             soc: Optional[float], config: FarmConfig, tier: TariffTier) -> Optional[int]:
    """Index (1..6) of the first matching purchase case, or None.

    Guards are evaluated in listing order. Cases that compare SoC never match
    a farm without a battery (``soc=None``).
    """
    re = config.has_renewables
    bat = config.has_battery
    load = inputs.e_load
    has_soc = soc is not None
    if not re and not bat:
        return 1
    if has_soc and renewable_gen + b_uc < load and tier > TariffTier.NIGHT and soc > SOC_LOW:
        return 2
    if has_soc and tier == TariffTier.NIGHT and soc <= SOC_HALF:
        return 3
    if re and not bat:
        return 4
    if not re and bat and soc > SOC_LOW and tier > TariffTier.NIGHT:
        return 5
    if not re and bat and soc <= SOC_LOW and tier < TariffTier.PEAK:
        return 6
    return None


def _case_amount(case: Optional[int], load: float, renewable_gen: float,
                 b_uc: float, b_ccap: float) -> float:
    if case is None:
        return 0.0
    if case == 1:
        return load
    if case == 2:
        return load - (renewable_gen + b_uc)
    if case == 3:
        return (load - renewable_gen) + b_ccap
    if case == 4:
        return load - renewable_gen
    if case == 5:
        return load - b_uc
    return load + b_ccap


def buy_quantity(inputs: StepInputs, renewable_gen: float, b_uc: float, b_ccap: float,
                 soc: Optional[float], config: FarmConfig, tier: TariffTier) -> float:
    """Energy requested from the market; 0 when no purchase case covers the
    situation. Negative amounts clamp to 0."""
    case = buy_case(inputs, renewable_gen, b_uc, soc, config, tier)
    return max(_case_amount(case, inputs.e_load, renewable_gen, b_uc, b_ccap), 0.0)


def _decision(e_sell=0.0, e_buy=0.0, charged=0.0, discharged=0.0, trace=()):
    return FarmDecision(
        charge=charged > 0,
        discharge=discharged > 0,
        sell=e_sell > 0,
        buy=e_buy > 0,
        e_sell=e_sell,
        e_buy=e_buy,
        charged_kwh=charged,
        discharged_kwh=discharged,
        rule_trace=tuple(trace),
    )


def _purchase(inputs, gen, b_uc, b_ccap, soc, config, tier, charge_ok, trace):
    load = inputs.e_load
    case = buy_case(inputs, gen, b_uc, soc, config, tier)
    if case is None:
        trace.append(HOLD_UNCOVERED)
        return _decision(trace=trace)
    trace.append(EQ12_CASE[case - 1])
    raw = _case_amount(case, load, gen, b_uc, b_ccap)
    if raw < 0:
        trace.append(CLAMP_NEGATIVE)
    e_buy = max(raw, 0.0)
    charged = discharged = 0.0
    if case in (2, 5):
        discharged = min(b_uc, max(load - gen, 0.0))
    elif case in (3, 6) and charge_ok:
        charged = b_ccap
    return _decision(e_buy=e_buy, charged=charged, discharged=discharged, trace=trace)


def decide_step(inputs: StepInputs, battery: Optional[BatteryState],
                config: FarmConfig) -> FarmDecision:
    """Apply the dispatch rules for one farm and one hour."""
    if config.has_battery != (battery is not None):
        raise ConfigError(f"farm {config.farm_id}: battery state must be given iff has_battery")
    spec = config.battery_spec
    tier = inputs.tier
    load = inputs.e_load
    gen = renewable_generation(inputs, config)
    b_uc = usable_capacity(battery, spec) if battery is not None else 0.0
    e_tot = total_generation(inputs, b_uc, config)
    soc = battery.soc_percent if battery is not None else None
    trace = []

    if config.has_renewables and config.has_battery:
        surplus = e_tot - load
        b_ccap = charge_capacity(surplus, True, spec)
        if e_tot > load:
            if soc < SOC_FULL:
                trace.append(EQ4_CHARGE_AND_SELL if surplus > spec.max_charge_per_step_kwh
                             else EQ4_CHARGE)
                e_sell = sell_quantity(e_tot, load, soc, b_ccap)
                if e_sell > 0:
                    trace.append(EQ11_CASE[1])
                net = b_ccap - b_uc
                return _decision(e_sell=e_sell, charged=max(net, 0.0),
                                 discharged=max(-net, 0.0), trace=trace)
            trace.extend((EQ4_SOC_HIGH, EQ11_CASE[0]))
            return _decision(e_sell=sell_quantity(e_tot, load, soc, b_ccap),
                             discharged=b_uc, trace=trace)
        if e_tot < load:
            if soc > SOC_LOW and tier == TariffTier.NIGHT:
                trace.append(EQ5_BUY_NO_CHARGE)
                charge_ok = False
            elif (soc < SOC_HALF and tier == TariffTier.NIGHT) or \
                    (soc < SOC_LOW and tier < TariffTier.PEAK):
                trace.append(EQ5_BUY_AND_CHARGE)
                charge_ok = True
            else:
                trace.append(EQ5_BUY)
                charge_ok = False
            return _purchase(inputs, gen, b_uc, b_ccap, soc, config, tier, charge_ok, trace)
        trace.append(HOLD_BALANCED)
        return _decision(trace=trace)

    if config.has_renewables:
        if e_tot > load:
            trace.extend((EQ6_SELL, EQ11_CASE[1]))
            return _decision(e_sell=sell_quantity(e_tot, load, None, 0.0), trace=trace)
        if e_tot < load:
            trace.append(EQ6_BUY)
            return _purchase(inputs, gen, 0.0, 0.0, None, config, tier, False, trace)
        trace.append(HOLD_BALANCED)
        return _decision(trace=trace)

    if config.has_battery:
        b_ccap = charge_capacity(e_tot - load, False, spec)
        if soc > SOC_LOW and tier == TariffTier.NIGHT:
            trace.append(EQ7_BUY_NO_CHARGE)
            charge_ok = False
        elif soc < SOC_LOW and tier < TariffTier.PEAK:
            trace.append(EQ7_BUY_AND_CHARGE)
            charge_ok = True
        else:
            trace.append(EQ7_BUY)
            charge_ok = False
        return _purchase(inputs, gen, b_uc, b_ccap, soc, config, tier, charge_ok, trace)

    return _purchase(inputs, gen, 0.0, 0.0, None, config, tier, False, trace)
