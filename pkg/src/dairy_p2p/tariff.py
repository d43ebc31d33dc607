"""Time-of-use tariff tiers and grid prices."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ConfigError


class TariffTier(enum.IntEnum):
    """Grid purchase tier. Integer values give the order Night < Day < Peak."""

    NIGHT = 0
    DAY = 1
    PEAK = 2


DEFAULT_NIGHT_HOURS = frozenset([23, 0, 1, 2, 3, 4, 5, 6, 7])
DEFAULT_PEAK_HOURS = frozenset([17, 18])
DEFAULT_DAY_HOURS = frozenset(set(range(24)) - DEFAULT_NIGHT_HOURS - DEFAULT_PEAK_HOURS)


@dataclass(frozen=True)
class TariffSchedule:
    """Three-tier purchase prices, the feed-in price and the hour partition.

    Prices are currency per kWh. ``feed_in_price`` is what the grid pays for
    exported energy and must sit below every purchase tier.
    """

    night_price: float = 0.10
    day_price: float = 0.18
    peak_price: float = 0.25
    feed_in_price: float = 0.08
    night_hours: frozenset = DEFAULT_NIGHT_HOURS
    day_hours: frozenset = DEFAULT_DAY_HOURS
    peak_hours: frozenset = DEFAULT_PEAK_HOURS
    _lookup: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("night_hours", "day_hours", "peak_hours"):
            object.__setattr__(self, name, frozenset(int(h) for h in getattr(self, name)))
        if not 0 < self.night_price < self.day_price < self.peak_price:
            raise ConfigError(
                "tariff prices must satisfy 0 < night < day < peak, got "
                f"{self.night_price}, {self.day_price}, {self.peak_price}"
            )
        if not 0 < self.feed_in_price < self.night_price:
            raise ConfigError(
                f"feed-in price {self.feed_in_price} must lie in (0, night price)"
            )
        sets = (self.night_hours, self.day_hours, self.peak_hours)
        union = set().union(*sets)
        if sum(len(s) for s in sets) != 24 or union != set(range(24)):
            raise ConfigError("night/day/peak hours must partition 0..23")
        lookup = [None] * 24
        for tier, hours in zip(TariffTier, sets):
            for h in hours:
                lookup[h] = tier
        object.__setattr__(self, "_lookup", tuple(lookup))

    @classmethod
    def from_dict(cls, data: dict) -> "TariffSchedule":
        known = {"night_price", "day_price", "peak_price", "feed_in_price",
                 "night_hours", "day_hours", "peak_hours"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown tariff fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "night_price": self.night_price,
            "day_price": self.day_price,
            "peak_price": self.peak_price,
            "feed_in_price": self.feed_in_price,
            "night_hours": sorted(self.night_hours),
            "day_hours": sorted(self.day_hours),
            "peak_hours": sorted(self.peak_hours),
        }


def tier_for_hour(hour_of_day: int, schedule: TariffSchedule) -> TariffTier:
    """Return the tier whose hour set contains ``hour_of_day``."""
    if isinstance(hour_of_day, bool) or not isinstance(hour_of_day, int) \
            or not 0 <= hour_of_day < 24:
        raise ValueError(f"hour_of_day must be an integer in [0, 24), got {hour_of_day!r}")
    return schedule._lookup[hour_of_day]


def grid_price(tier: TariffTier, schedule: TariffSchedule) -> float:
    if tier is TariffTier.NIGHT:
        return schedule.night_price
    if tier is TariffTier.DAY:
        return schedule.day_price
    return schedule.peak_price
