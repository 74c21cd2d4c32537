"""Delzant polytopes, their dilates and facet proximity.

Run: python3 demos/01_polytopes.py
"""
import numpy as np

from toge import hirzebruch, lattice_points, near_facets, simplex

# %% The Hirzebruch trapezoid for a = 1 is cut out by four inequalities.
P = hirzebruch(1)
print(P.name, "vertices:", P.vertices.astype(int).tolist())
print("volume:", P.euclidean_volume)

# %% Lattice points of kP grow like vol(P) k^m (Ehrhart).
for k in (1, 2, 4, 8, 16, 32):
    n = lattice_points(P, k).count
    print(f"k={k:3d}  #kP={n:5d}  ratio to vol k^2: {n / (P.euclidean_volume * k * k):.3f}")

# %% Near a corner of the simplex two facets are delta-close.
S = simplex(2)
for x in ([0.3, 0.3], [0.02, 0.4], [0.01, 0.01]):
    fp = near_facets(S, np.array(x), 0.05)
    print(x, "close facets:", sorted(fp.near_set), "distances:", np.round(fp.distances, 3))
