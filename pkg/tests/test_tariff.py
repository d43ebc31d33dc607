import pytest
from hypothesis import given, strategies as st

from dairy_p2p.errors import ConfigError
from dairy_p2p.tariff import TariffSchedule, TariffTier, grid_price, tier_for_hour

DEFAULT = TariffSchedule()


@pytest.mark.parametrize("hour,tier", [(3, TariffTier.NIGHT), (18, TariffTier.PEAK),
                                       (12, TariffTier.DAY), (23, TariffTier.NIGHT),
                                       (7, TariffTier.NIGHT), (8, TariffTier.DAY),
                                       (17, TariffTier.PEAK), (19, TariffTier.DAY)])
def test_default_tiers(hour, tier):
    assert tier_for_hour(hour, DEFAULT) is tier


def test_grid_price_lookup():
    assert grid_price(TariffTier.NIGHT, DEFAULT) == 0.10
    assert grid_price(TariffTier.DAY, DEFAULT) == 0.18
    assert grid_price(TariffTier.PEAK, DEFAULT) == 0.25


@pytest.mark.parametrize("hour", [-1, 24, 3.0, "3", True])
def test_invalid_hour(hour):
    with pytest.raises(ValueError):
        tier_for_hour(hour, DEFAULT)


def test_tier_order():
    assert TariffTier.NIGHT < TariffTier.DAY < TariffTier.PEAK


@pytest.mark.parametrize("kwargs", [
    dict(night_price=0.2, day_price=0.18),
    dict(feed_in_price=0.12),
    dict(feed_in_price=0.0),
    dict(peak_hours={17, 18, 12}),
    dict(night_hours={0, 1}),
])
def test_invalid_schedules(kwargs):
    with pytest.raises(ConfigError):
        TariffSchedule(**kwargs)


@st.composite
def schedules(draw):
    prices = sorted(draw(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4, unique=True)))
    labels = draw(st.lists(st.sampled_from([0, 1, 2]), min_size=24, max_size=24))
    sets = [{h for h in range(24) if labels[h] == k} for k in range(3)]
    return TariffSchedule(night_price=prices[1], day_price=prices[2], peak_price=prices[3],
                          feed_in_price=prices[0], night_hours=sets[0], day_hours=sets[1],
                          peak_hours=sets[2])


@given(schedules())
def test_total_monotone_and_feed_in_below(schedule):
    for h in range(24):
        tier = tier_for_hour(h, schedule)
        assert tier is tier_for_hour(h, schedule)
        assert schedule.feed_in_price < grid_price(tier, schedule)
    prices = [grid_price(t, schedule) for t in TariffTier]
    assert prices == sorted(prices) and len(set(prices)) == 3


def test_dict_round_trip():
    assert TariffSchedule.from_dict(DEFAULT.to_dict()) == DEFAULT
