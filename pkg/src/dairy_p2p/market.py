"""Central auctioneer: supply-demand-ratio pricing and market clearing.

Offers and bids are price-taking quantities. The auctioneer computes the
supply-demand ratio (SDR) of the step, derives the internal selling and
buying prices from it, fills the short side of the book pro rata and settles
residuals with the utility grid.

Cash sign convention for settlements: positive means the farm receives money.
The auctioneer collects every buyer payment, pays sellers for internally
traded energy and pays the grid for residual imports. Residual exports are
paid by the grid directly at the feed-in price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ContractViolation
from .tariff import TariffSchedule, TariffTier, grid_price


@dataclass(frozen=True)
class OrderBook:
    offers: Sequence[tuple] = ()
    bids: Sequence[tuple] = ()
    tier: TariffTier = TariffTier.DAY
    step_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "offers", tuple((str(f), float(q)) for f, q in self.offers))
        object.__setattr__(self, "bids", tuple((str(f), float(q)) for f, q in self.bids))
        for side, orders in (("offer", self.offers), ("bid", self.bids)):
            seen = set()
            for farm_id, qty in orders:
                if not (qty > 0 and math.isfinite(qty)):
                    raise ContractViolation(f"{side} from {farm_id} has non-positive quantity {qty}")
                if farm_id in seen:
                    raise ContractViolation(f"duplicate {side} from farm {farm_id}")
                seen.add(farm_id)
        both = {f for f, _ in self.offers} & {f for f, _ in self.bids}
        if both:
            raise ContractViolation(f"farms on both sides of the book: {sorted(both)}")

    @property
    def tsp(self) -> float:
        return math.fsum(q for _, q in self.offers)

    @property
    def tbp(self) -> float:
        return math.fsum(q for _, q in self.bids)


@dataclass(frozen=True)
class PriceQuote:
    sdr: Optional[float]  # None when there is no demand
    isp: float
    ibp: float


@dataclass(frozen=True)
class Settlement:
    farm_id: str
    bought_internal: float = 0.0
    bought_grid: float = 0.0
    sold_internal: float = 0.0
    sold_grid: float = 0.0
    cash_delta: float = 0.0


@dataclass(frozen=True)
class MarketResult:
    quote: PriceQuote
    settlements: tuple = field(default=())
    grid_import_kwh: float = 0.0
    grid_export_kwh: float = 0.0
    auctioneer_imbalance: float = 0.0
    tsp: float = 0.0
    tbp: float = 0.0
    lambda_buy: float = 0.0
    lambda_sell: float = 0.0

    def settlement_for(self, farm_id: str) -> Optional[Settlement]:
        for s in self.settlements:
            if s.farm_id == farm_id:
                return s
        return None

    @property
    def internal_traded_kwh(self) -> float:
        return math.fsum(s.bought_internal for s in self.settlements)

    @property
    def buyer_payments(self) -> float:
        return math.fsum(-s.cash_delta for s in self.settlements if s.cash_delta < 0)

    @property
    def seller_receipts(self) -> float:
        return math.fsum(s.cash_delta for s in self.settlements if s.cash_delta > 0)


def supply_demand_ratio(tsp: float, tbp: float) -> Optional[float]:
    """``tsp / tbp``, or None when there is no demand."""
    if tsp < 0 or tbp < 0:
        raise ContractViolation("supply and demand totals must be non-negative")
    if tbp == 0:
        return None
    return tsp / tbp


def internal_selling_price(sdr: float, lambda_sell: float, lambda_buy: float) -> float:
    """Internal selling price.

    Falls from ``lambda_buy`` at SDR=0 to ``lambda_sell`` at SDR=1 along
    ``ls*lb / ((lb - ls)*sdr + ls)`` and stays at ``lambda_sell`` above 1.
    """
    if not 0 < lambda_sell < lambda_buy:
        raise ContractViolation(
            f"need 0 < lambda_sell < lambda_buy, got {lambda_sell}, {lambda_buy}"
        )
    if sdr < 0:
        raise ContractViolation(f"SDR must be non-negative, got {sdr}")
    if sdr > 1:
        return lambda_sell
    return (lambda_sell * lambda_buy) / ((lambda_buy - lambda_sell) * sdr + lambda_sell)


def internal_buying_price(isp: float, sdr: float, lambda_buy: float) -> float:
    """Blend of the internal selling price (weight SDR) and the grid price.
    Above SDR=1 buyers pay the full grid price."""
    if sdr < 0:
        raise ContractViolation(f"SDR must be non-negative, got {sdr}")
    if sdr > 1:
        return lambda_buy
    return isp * sdr + lambda_buy * (1 - sdr)


def price_quote(tsp: float, tbp: float, lambda_sell: float, lambda_buy: float) -> PriceQuote:
    sdr = supply_demand_ratio(tsp, tbp)
    # no demand behaves like unbounded oversupply
    effective = math.inf if sdr is None else sdr
    isp = internal_selling_price(effective, lambda_sell, lambda_buy)
    ibp = internal_buying_price(isp, effective, lambda_buy)
    return PriceQuote(sdr=sdr, isp=isp, ibp=ibp)


def clear_market(book: OrderBook, schedule: TariffSchedule, p2p_enabled: bool = True) -> MarketResult:
    """Price and settle one step's order book."""
    lambda_buy = grid_price(book.tier, schedule)
    lambda_sell = schedule.feed_in_price
    offers = sorted(book.offers)
    bids = sorted(book.bids)
    tsp = book.tsp
    tbp = book.tbp
    common = dict(tsp=tsp, tbp=tbp, lambda_buy=lambda_buy, lambda_sell=lambda_sell)

    if not p2p_enabled:
        settlements = [Settlement(f, bought_grid=q, cash_delta=-q * lambda_buy) for f, q in bids]
        settlements += [Settlement(f, sold_grid=q, cash_delta=q * lambda_sell) for f, q in offers]
        settlements.sort(key=lambda s: s.farm_id)
        return MarketResult(
            quote=PriceQuote(supply_demand_ratio(tsp, tbp), lambda_sell, lambda_buy),
            settlements=tuple(settlements),
            grid_import_kwh=tbp,
            grid_export_kwh=tsp,
            auctioneer_imbalance=0.0,
            **common,
        )

    if tsp == 0 and tbp == 0:
        return MarketResult(quote=PriceQuote(None, lambda_sell, lambda_buy), **common)

    quote = price_quote(tsp, tbp, lambda_sell, lambda_buy)
    settlements = []
    if quote.sdr is not None and quote.sdr <= 1:
        # every offer sells internally, bids are filled pro rata
        fill = quote.sdr
        for f, q in bids:
            internal = q * fill
            settlements.append(Settlement(f, bought_internal=internal, bought_grid=q - internal,
                                          cash_delta=-q * quote.ibp))
        for f, q in offers:
            settlements.append(Settlement(f, sold_internal=q, cash_delta=q * quote.isp))
        grid_import = math.fsum(s.bought_grid for s in settlements)
        grid_export = 0.0
        receipts = math.fsum(q * quote.ibp for _, q in bids)
        payouts = math.fsum([q * quote.isp for _, q in offers] + [grid_import * lambda_buy])
    else:
        # oversupply: bids fill fully, offers sell 1/SDR internally, rest exported
        fill = 0.0 if quote.sdr is None else 1.0 / quote.sdr
        for f, q in bids:
            settlements.append(Settlement(f, bought_internal=q, cash_delta=-q * quote.ibp))
        for f, q in offers:
            internal = q * fill
            settlements.append(Settlement(f, sold_internal=internal, sold_grid=q - internal,
                                          cash_delta=q * quote.isp))
        grid_import = 0.0
        grid_export = math.fsum(s.sold_grid for s in settlements)
        receipts = math.fsum(q * quote.ibp for _, q in bids)
        payouts = math.fsum(s.sold_internal * quote.isp for s in settlements)

    settlements.sort(key=lambda s: s.farm_id)
    return MarketResult(
        quote=quote,
        settlements=tuple(settlements),
        grid_import_kwh=grid_import,
        grid_export_kwh=grid_export,
        auctioneer_imbalance=receipts - payouts,
        **common,
    )
