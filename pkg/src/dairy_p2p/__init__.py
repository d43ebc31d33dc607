"""Hourly multi-agent simulator of peer-to-peer energy trading among prosumer farms."""

from .battery import (BatterySpec, BatteryState, apply_transition, charge_capacity,
                      discharge_percent, usable_capacity)
from .engine import (ComparisonReport, FarmTraces, ScenarioConfig, ScenarioReport,
                     run_comparison, run_simulation, standard_variants)
from .errors import ConfigError, ContractViolation, DataError, InvariantBreach, SimulationError
from .farm import (FarmConfig, FarmDecision, StepInputs, buy_quantity, decide_step,
                   sell_quantity, total_generation)
from .market import (MarketResult, OrderBook, PriceQuote, clear_market, internal_buying_price,
                     internal_selling_price, supply_demand_ratio)
from .metrics import community_cost, percent_delta, peak_demand, sold_revenue
from .tariff import TariffSchedule, TariffTier, grid_price, tier_for_hour

__version__ = "0.1.0"
