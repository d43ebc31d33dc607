import pytest
from hypothesis import given, strategies as st

from dairy_p2p.battery import (BatterySpec, BatteryState, apply_transition, charge_capacity,
                               discharge_percent, usable_capacity)
from dairy_p2p.errors import ConfigError, ContractViolation

SPEC100 = BatterySpec(capacity_kwh=100, max_charge_per_step_kwh=5, max_discharge_per_step_kwh=20)


@pytest.mark.parametrize("soc,expected", [(50, 20), (10, 10), (0, 0)])
def test_usable_capacity(soc, expected):
    assert usable_capacity(BatteryState(soc), SPEC100) == pytest.approx(expected)


@pytest.mark.parametrize("surplus,re,expected", [(7, True, 5), (3, True, 3), (-4, False, 5),
                                                 (-4, True, 0), (5, True, 5)])
def test_charge_capacity(surplus, re, expected):
    assert charge_capacity(surplus, re, SPEC100) == expected


@pytest.mark.parametrize("b_uc,expected", [(20, 20), (0, 0), (100, 100)])
def test_discharge_percent(b_uc, expected):
    assert discharge_percent(b_uc, SPEC100) == expected


def test_transitions():
    spec = BatterySpec(100, 10, 20)
    assert apply_transition(BatteryState(50), spec, charged_kwh=10).state.soc_percent == 60
    assert apply_transition(BatteryState(50), spec, discharged_kwh=20).state.soc_percent == 30
    assert apply_transition(BatteryState(50), spec).state.soc_percent == 50


def test_overcharge_clamps_and_reports_residual():
    spec = BatterySpec(100, 10, 20)
    tr = apply_transition(BatteryState(95), spec, charged_kwh=10)
    assert tr.state.soc_percent == 100
    assert tr.clamp_residual_kwh == pytest.approx(5)
    assert tr.charged_kwh == pytest.approx(5)


def test_contract_violations():
    spec = BatterySpec(100, 10, 20)
    with pytest.raises(ContractViolation):
        apply_transition(BatteryState(50), spec, charged_kwh=1, discharged_kwh=1)
    with pytest.raises(ContractViolation):
        apply_transition(BatteryState(10), spec, discharged_kwh=15)
    with pytest.raises(ContractViolation):
        apply_transition(BatteryState(10), spec, charged_kwh=11)
    with pytest.raises(ContractViolation):
        BatteryState(101)


def test_spec_validation():
    with pytest.raises(ConfigError):
        BatterySpec(10, 11, 5)
    with pytest.raises(ConfigError):
        BatterySpec(0, 1, 1)


specs = st.builds(
    lambda cap, fc, fd: BatterySpec(cap, cap * fc, cap * fd),
    st.floats(1, 500), st.floats(0.01, 1), st.floats(0.01, 1),
)


@given(specs, st.floats(0, 100))
def test_usable_bounded(spec, soc):
    state = BatteryState(soc)
    b_uc = usable_capacity(state, spec)
    assert 0 <= b_uc <= spec.max_discharge_per_step_kwh
    assert b_uc <= state.stored_kwh(spec)


@given(specs, st.floats(0, 100), st.floats(0, 1))
def test_round_trip(spec, soc, frac):
    state = BatteryState(soc)
    headroom = (100 - soc) / 100 * spec.capacity_kwh
    x = frac * min(spec.max_charge_per_step_kwh, spec.max_discharge_per_step_kwh, headroom)
    up = apply_transition(state, spec, charged_kwh=x).state
    x = min(x, usable_capacity(up, spec))
    back = apply_transition(up, spec, discharged_kwh=x).state
    assert back.soc_percent == pytest.approx(soc, abs=1e-9)


@given(specs, st.floats(0, 100),
       st.lists(st.tuples(st.booleans(), st.floats(0, 1)), max_size=30))
def test_soc_stays_in_range(spec, soc, moves):
    state = BatteryState(soc)
    for charge, frac in moves:
        if charge:
            tr = apply_transition(state, spec, charged_kwh=frac * spec.max_charge_per_step_kwh)
        else:
            tr = apply_transition(state, spec, discharged_kwh=frac * usable_capacity(state, spec))
        state = tr.state
        assert 0 <= state.soc_percent <= 100


@given(specs, st.floats(-50, 50), st.floats(-50, 50), st.booleans())
def test_charge_capacity_bounded_and_monotone(spec, a, b, re):
    lo, hi = sorted((a, b))
    assert 0 <= charge_capacity(lo, re, spec) <= spec.max_charge_per_step_kwh
    assert charge_capacity(lo, True, spec) <= charge_capacity(hi, True, spec)
