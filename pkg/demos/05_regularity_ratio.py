"""R_k = Q_t / (Q_0^{1-t} Q_1^t) and its large-k limit.

Run: python3 demos/05_regularity_ratio.py
"""
import numpy as np

from toge import GeodesicPair, canonical, regularity_gap, rinfty, rk_ratio, volume_ratio

pair = GeodesicPair(canonical("interval"), canonical("interval", [((1,), 0.5), ((2,), -0.5)]))

# %% At t = 1/2 and alpha = k/2 the Hessians are 4, 3 and 3.5.
print("volume ratio (det G_t / det G_0^(1/2) det G_1^(1/2))^(1/2):",
      volume_ratio(pair, 0.5, [0.5])[0])
print("limit of R_k (its reciprocal):", rinfty(pair, 0.5, [0.5])[0])
for k in (16, 64, 256):
    print(f"k={k:3d}: R_k = {rk_ratio(pair, k, 0.5, [k // 2]):.6f}")

# %% The interior sup gap decays roughly like 1/k.
for k in (16, 32, 64, 128):
    rep = regularity_gap(pair, k)
    print(f"k={k:3d}: interior {rep.sup_interior:.3e}  boundary {rep.sup_boundary:.3e}")
