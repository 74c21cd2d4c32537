"""Bergman geodesics converge to the Monge-Ampere geodesic.

Run: python3 demos/06_convergence.py
"""
from toge import GeodesicPair, build_grid, canonical, converge
from toge.converge import FIELDS

pair = GeodesicPair(canonical("interval"), canonical("interval", [((1,), 0.5), ((2,), -0.5)]))
ks = [16, 32, 64, 128, 256]
rep = converge(pair, ks, build_grid(pair, n_t=11, n_x=33, margin=0.02))

# %% One row per field: sup errors over the (t, x) grid and the fitted slope.
print("field       " + "".join(f"k={k:<9d}" for k in ks) + "slope")
for name in FIELDS:
    vals = "".join(f"{v:<11.2e}" for v in rep.series(name))
    print(f"{name:<12s}{vals}{rep.rates[(name, 'power')][0]:.2f}")

# %% The same run from the command line:
#   toge converge --config demos/configs/interval_pair.json --out out/
