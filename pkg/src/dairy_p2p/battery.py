"""Battery bookkeeping: usable energy, charge capacity and SoC updates.

The model is lossless. ``BatteryState`` is an immutable value; transitions
return a new state plus whatever energy the [0, 100] clamp refused.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, ContractViolation

# slack for float round-off when checking caller-supplied quantities
_EPS = 1e-9


@dataclass(frozen=True)
class BatterySpec:
    capacity_kwh: float = 50.0
    max_charge_per_step_kwh: float = 10.0
    max_discharge_per_step_kwh: float = 10.0

    def __post_init__(self):
        if self.capacity_kwh <= 0:
            raise ConfigError("battery capacity must be positive")
        if not 0 < self.max_charge_per_step_kwh <= self.capacity_kwh:
            raise ConfigError("max charge per step must lie in (0, capacity]")
        if not 0 < self.max_discharge_per_step_kwh <= self.capacity_kwh:
            raise ConfigError("max discharge per step must lie in (0, capacity]")


@dataclass(frozen=True)
class BatteryState:
    soc_percent: float = 50.0

    def __post_init__(self):
        if not 0.0 <= self.soc_percent <= 100.0:
            raise ContractViolation(f"SoC {self.soc_percent} outside [0, 100]")

    def stored_kwh(self, spec: BatterySpec) -> float:
        return self.soc_percent / 100.0 * spec.capacity_kwh


@dataclass(frozen=True)
class Transition:
    """Outcome of :func:`apply_transition`.

    ``clamp_residual_kwh`` is the energy the caller asked to move that the
    SoC clamp rejected (positive: could not be stored; the battery was full).
    ``shortfall_kwh`` is requested discharge the battery could not deliver.
    """

    state: BatteryState
    charged_kwh: float
    discharged_kwh: float
    clamp_residual_kwh: float = 0.0
    shortfall_kwh: float = 0.0


def usable_capacity(state: BatteryState, spec: BatterySpec) -> float:
    """Energy the battery can deliver this step: stored energy capped by the
    per-step discharge limit."""
    stored = state.stored_kwh(spec)
    if stored < spec.max_discharge_per_step_kwh:
        return stored
    return spec.max_discharge_per_step_kwh


def charge_capacity(surplus_kwh: float, has_renewables: bool, spec: BatterySpec) -> float:
    """Energy to put into the battery this step.

    With renewables the battery takes the surplus up to the per-step limit;
    without renewables it charges from the grid at the full limit.
    """
    limit = spec.max_charge_per_step_kwh
    if not has_renewables or surplus_kwh >= limit:
        return limit
    return max(surplus_kwh, 0.0)


def discharge_percent(b_uc: float, spec: BatterySpec) -> float:
    return b_uc / spec.capacity_kwh * 100.0


def apply_transition(state: BatteryState, spec: BatterySpec,
                     charged_kwh: float = 0.0, discharged_kwh: float = 0.0) -> Transition:
    if charged_kwh < 0 or discharged_kwh < 0:
        raise ContractViolation("charge and discharge amounts must be non-negative")
    if charged_kwh > 0 and discharged_kwh > 0:
        raise ContractViolation("cannot charge and discharge in the same step")
    if charged_kwh > spec.max_charge_per_step_kwh + _EPS:
        raise ContractViolation(
            f"charge {charged_kwh} exceeds per-step limit {spec.max_charge_per_step_kwh}"
        )
    if discharged_kwh > usable_capacity(state, spec) + _EPS:
        raise ContractViolation(
            f"discharge {discharged_kwh} exceeds usable capacity {usable_capacity(state, spec)}"
        )

    if charged_kwh > 0:
        soc = state.soc_percent + charged_kwh / spec.capacity_kwh * 100.0
    else:
        soc = state.soc_percent - discharge_percent(discharged_kwh, spec)

    residual = 0.0
    shortfall = 0.0
    if soc > 100.0:
        residual = (soc - 100.0) / 100.0 * spec.capacity_kwh
        soc = 100.0
    elif soc < 0.0:
        shortfall = -soc / 100.0 * spec.capacity_kwh
        soc = 0.0
    return Transition(
        state=BatteryState(soc),
        charged_kwh=charged_kwh - residual,
        discharged_kwh=discharged_kwh - shortfall,
        clamp_residual_kwh=residual,
        shortfall_kwh=shortfall,
    )
