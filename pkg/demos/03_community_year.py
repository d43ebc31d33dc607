"""
A year of trading in a ten-farm community
=========================================

Run the synthetic community for 8760 hours under three set-ups (renewables
with P2P trading, renewables without P2P, and no renewables) and compare
purchase cost, sales revenue and peak-hour grid import. The magnitudes
depend entirely on the synthetic traces and the default tariff; only the
ordering of the scenarios is structural.
"""

import time

from dairy_p2p.engine import run_comparison, standard_variants, synthetic_community

config, traces = synthetic_community(n_farms=10, horizon_steps=8760, seed=0)
base, *others = standard_variants(config)

t0 = time.perf_counter()
comparison = run_comparison(base, others, traces)
print(f"3 scenarios x 10 farms x 8760 h in {time.perf_counter() - t0:.1f} s\n")

print(f"{'scenario':<8} {'cost':>10} {'revenue':>10} {'peak kWh':>10} "
      f"{'d cost':>8} {'d rev':>8} {'d peak':>8}")
for row in comparison.rows():
    def pct(v):
        return "n/a" if v is None else f"{v:+.1f}%"
    print(f"{row['scenario_id']:<8} {row['community_cost']:10.0f} {row['community_revenue']:10.0f} "
          f"{row['peak_hour_grid_import_kwh']:10.0f} {pct(row['cost_delta_pct']):>8} "
          f"{pct(row['revenue_delta_pct']):>8} {pct(row['peak_delta_pct']):>8}")

###############################################################################
# Seen from the no-renewables community, and from the renewables-only one.

m = comparison.metric_sets
print()
print(f"renewables + P2P vs no renewables: "
      f"{100 * (1 - m['re_p2p'].community_purchase_cost / m['no_re'].community_purchase_cost):.1f}% "
      f"lower purchase cost")
print(f"P2P vs no P2P (both with renewables): "
      f"{100 * (1 - m['re_p2p'].community_purchase_cost / m['re_only'].community_purchase_cost):.1f}% "
      f"lower cost, "
      f"{100 * (m['re_p2p'].community_revenue / m['re_only'].community_revenue - 1):.1f}% "
      f"more revenue")

###############################################################################
# Daily cost trend. matplotlib is optional.

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(9, 3.5))
    for sid in ("no_re", "re_only", "re_p2p"):
        ax.plot(m[sid].per_day_cost_series, label=sid, lw=0.8)
    ax.set_xlabel("day")
    ax.set_ylabel("purchase cost per day")
    ax.legend()
    fig.tight_layout()
    fig.savefig("community_daily_cost.png", dpi=120)
    print("\nwrote community_daily_cost.png")
