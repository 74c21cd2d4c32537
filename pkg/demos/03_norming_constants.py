"""Norming constants by quadrature, checked against closed forms.

Run: python3 demos/03_norming_constants.py
"""
import numpy as np

from toge import QuadConfig, bargmann_fock, canonical, log_p_special, norming_table
from toge.oracles import bf_truncated_log_q, fs_log_q_normalized

# %% Fubini-Study on the simplex: normalized Q is an inverse multinomial.
u = canonical("simplex")
for k in (4, 8, 16):
    T = norming_table(u, k, QuadConfig(cells_per_axis=16))
    err = np.abs(np.expm1(T.log_q_normalized - fs_log_q_normalized(k, T.alphas))).max()
    print(f"simplex k={k:2d}: {T.alphas.shape[0]:3d} lattice points, max rel err {err:.1e}")

# %% The truncated Bargmann-Fock model gives incomplete gamma functions.
v = bargmann_fock(1, 1)
T = norming_table(v, 40)
print("Bargmann-Fock k=40 max |dlog Q|:",
      np.abs(T.log_q - bf_truncated_log_q(40, T.alphas, 1)).max())

# %% For any potential, P(alpha) = e^{k u(alpha/k)} / Q(alpha) is of order k^{m/2}.
w = canonical("interval", [((1,), 0.5), ((2,), -0.5)])
for k in (32, 128, 512):
    lp = log_p_special(norming_table(w, k))
    print(f"k={k:3d}: P(k/2) / sqrt(k) = {np.exp(lp[k // 2]) / np.sqrt(k):.5f}")
