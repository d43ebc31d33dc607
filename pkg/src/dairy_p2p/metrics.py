"""Community-level evaluation metrics computed from a finished scenario report."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Optional

import numpy as np

from .tariff import TariffSchedule, TariffTier, tier_for_hour


@dataclass(frozen=True)
class MetricSet:
    community_purchase_cost: float
    community_revenue: float
    peak_hour_grid_import_kwh: float
    per_day_cost_series: np.ndarray
    net_position: float = 0.0


def community_cost(report) -> float:
    """Gross cash paid by all farms for energy (internal and grid)."""
    return float(math.fsum(report.cost.ravel())) if report.cost.size else 0.0


def sold_revenue(report) -> float:
    """Cash received by all farms for energy sold internally or exported."""
    return float(math.fsum(report.revenue.ravel())) if report.revenue.size else 0.0


def peak_demand(report, schedule: TariffSchedule) -> float:
    """Grid import summed over the steps that fall in the peak tier."""
    total = []
    for s in report.steps:
        hour = datetime.fromisoformat(s.timestamp).hour
        if tier_for_hour(hour, schedule) is TariffTier.PEAK:
            total.append(s.grid_import)
    return math.fsum(total)


def daily_cost(report) -> np.ndarray:
    per_step = report.cost.sum(axis=1) if report.cost.size else np.zeros(0)
    days = []
    for k in range(0, len(per_step), 24):
        days.append(math.fsum(per_step[k:k + 24]))
    return np.array(days)


def percent_delta(base: float, variant: float) -> Optional[float]:
    """Change of ``variant`` relative to ``base`` in percent, or None if the
    base is zero and the change is undefined."""
    if base == 0:
        return None
    return (variant - base) / base * 100.0


def compute_metrics(report, schedule: TariffSchedule) -> MetricSet:
    cost = community_cost(report)
    revenue = sold_revenue(report)
    return MetricSet(
        community_purchase_cost=cost,
        community_revenue=revenue,
        peak_hour_grid_import_kwh=peak_demand(report, schedule),
        per_day_cost_series=daily_cost(report),
        net_position=revenue - cost,
    )
