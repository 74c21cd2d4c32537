"""Symplectic potentials and the Legendre transform to the open orbit.

Run: python3 demos/02_legendre.py
"""
import numpy as np

from toge import canonical, convexity_check, legendre, legendre_batch

# %% On [0, 1] the Guillemin potential x log x + (1-x) log(1-x) has
# Legendre dual log(1 + e^rho).
u = canonical("interval")
rho = np.linspace(-20, 20, 9)[:, None]
phi, x, iters, _ = legendre_batch(u, rho)
print("max |phi - log(1+e^rho)|:", np.abs(phi - np.logaddexp(0, rho[:, 0])).max())
print("Newton iterations:", iters.tolist())

# %% Far in the tail the maximizer is exponentially close to a facet.
r = legendre(u, [-60.0])
print("rho=-60: x* =", r.maximizer[0], " exact:", np.exp(-60) / (1 + np.exp(-60)))

# %% Adding a smooth part keeps the potential convex as long as the
# Hessian stays positive.
for c in (0.5, 1.5, 2.5):
    v = canonical("interval", [((1,), c), ((2,), -c)])
    print(f"f = {c} x(1-x): min u'' = {convexity_check(v):.3f}")
