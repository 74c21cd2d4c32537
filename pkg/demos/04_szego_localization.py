"""Diagonal Szego sums and how their weights concentrate.

Run: python3 demos/04_szego_localization.py
"""
import numpy as np

from toge import canonical, localization_profile, norming_table, szego_diagonal

u0 = canonical("interval")
u1 = canonical("interval", [((1,), 0.5), ((2,), -0.5)])

# %% Fubini-Study has a constant diagonal, k + 1.
T = norming_table(u0, 20)
print("FS k=20:", [round(szego_diagonal(T, [r])[0], 12) for r in (-2.0, 0.0, 3.0)])

# %% For a perturbed metric Pi / k - 1 halves when k doubles.
prev = None
for k in (32, 64, 128, 256):
    dev = abs(szego_diagonal(norming_table(u1, k), [0.5])[0] / k - 1)
    print(f"k={k:3d}: Pi/k - 1 = {dev:.3e}" + (f"  ratio {prev / dev:.3f}" if prev else ""))
    prev = dev

# %% Outside a window of width k^{-0.4} the largest term decays, but only
# like exp(-c k^0.2): the log-log slope stays far above -3 at these k.
ks = np.array([32, 64, 128, 256])
outside = [localization_profile(norming_table(u0, k), [0.0], 0.1)[1] for k in ks]
print("max outside term:", np.array(outside))
print("log-log slope:", np.polyfit(np.log(ks), np.log(outside), 1)[0])
