"""
Internal prices from the supply-demand ratio
============================================

The auctioneer quotes an internal selling price (ISP) and an internal buying
price (IBP) from the ratio of offered to requested energy. Both sit between
the feed-in price and the grid price, and they meet at the feed-in price
when supply covers demand exactly.
"""

import numpy as np

from dairy_p2p import (OrderBook, TariffSchedule, TariffTier, clear_market,
                       internal_buying_price, internal_selling_price)

feed_in, grid = 0.08, 0.18

print(f"{'SDR':>5} {'ISP':>8} {'IBP':>8}")
for sdr in np.linspace(0, 1.5, 16):
    isp = internal_selling_price(sdr, feed_in, grid)
    ibp = internal_buying_price(isp, sdr, grid)
    print(f"{sdr:5.2f} {isp:8.4f} {ibp:8.4f}")

# Above SDR = 1 buyers pay the grid price and sellers get the feed-in price;
# the gap is kept by the auctioneer and reported, not hidden.

###############################################################################
# A hand-sized book: two sellers offer 5 kWh, one buyer needs 10 kWh.

schedule = TariffSchedule(night_price=0.15, day_price=0.20, peak_price=0.30, feed_in_price=0.10)
book = OrderBook(offers=[("A", 3), ("B", 2)], bids=[("C", 10)], tier=TariffTier.DAY)
result = clear_market(book, schedule, p2p_enabled=True)
print()
print(f"SDR {result.quote.sdr:.2f}, ISP {result.quote.isp:.6f}, IBP {result.quote.ibp:.6f}")
for s in result.settlements:
    print(f"  {s.farm_id}: internal in {s.bought_internal:.1f} / out {s.sold_internal:.1f} kWh, "
          f"grid in {s.bought_grid:.1f} kWh, cash {s.cash_delta:+.6f}")
print(f"grid import {result.grid_import_kwh:.1f} kWh, "
      f"auctioneer imbalance {result.auctioneer_imbalance:+.2e}")

grid_only = clear_market(book, schedule, p2p_enabled=False)
print(f"without P2P the buyer pays {-grid_only.settlement_for('C').cash_delta:.4f} "
      f"instead of {-result.settlement_for('C').cash_delta:.4f}")
