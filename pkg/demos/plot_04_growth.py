"""
A small growth sweep
====================

``ratio_T = ||T_U f||_1 / ||f||_2`` for the witness at each depth, where
``T_U`` is the maximal half-plane projection over the direction set.  The
sweep uses the feasible setting found in the construction demo; the same
numbers come out of ``sector-hilbert growth``.
"""

import math

from sector_hilbert import growth_sweep

table = growth_sweep(range(1, 5), R=512, eps=0.5)
print(f"{'m':>2} {'N':>3} {'ratio_T':>9} {'H_U p=2':>8} {'level':>8}  status")
for r in table.records:
    if r.status == "ok":
        print(f"{r.m:>2} {r.N:>3} {r.ratio_T:9.4f} {r.ratio_H[2.0]:8.4f} {r.level_measure:8.3f}  ok")
    else:
        print(f"{r.m:>2} {r.N:>3} {'':>9} {'':>8} {'':>8}  failed: {r.message}")
print("slope of ratio_T^2 against log nu:", round(table.slope(), 4) if not math.isnan(table.slope()) else "n/a")
