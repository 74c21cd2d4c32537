"""Closed forms for the Fubini-Study and Bargmann-Fock models.

These are independent of the quadrature path and serve as its oracles.
All values are logarithms unless stated otherwise.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammainc, gammaln, xlogy

__all__ = [
    "log_multinomial",
    "fs_log_q_raw",
    "fs_log_q_normalized",
    "fs_log_p_special",
    "fs_log_p_special_raw",
    "fs_szego",
    "bf_log_q",
    "bf_truncated_log_q",
    "bf_log_p_special",
    "log_bf_law",
    "binomial_log_pmf",
]


def _alpha2d(alpha):
    a = np.asarray(alpha, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def log_multinomial(k, alpha):
    """``log k! / (alpha_1! ... alpha_m! (k - |alpha|)!)`` for rows of alpha."""
    a = _alpha2d(alpha)
    rest = k - a.sum(axis=1)
    return gammaln(k + 1) - gammaln(a + 1).sum(axis=1) - gammaln(rest + 1)


def fs_log_q_raw(k, alpha):
    """Dirichlet integral ``int_Sigma x^alpha (1-|x|)^(k-|alpha|) dx`` on the unit simplex."""
    a = _alpha2d(alpha)
    m = a.shape[1]
    rest = k - a.sum(axis=1)
    return gammaln(a + 1).sum(axis=1) + gammaln(rest + 1) - gammaln(k + m + 1)


def fs_log_q_normalized(k, alpha):
    """Norming constant in the normalization where it is the inverse multinomial."""
    return -log_multinomial(k, alpha)


def fs_log_p_special(k, alpha):
    """Normalized special value ``multinomial * prod (a/k)^a * (1-|a|/k)^(k-|a|)``."""
    a = _alpha2d(alpha)
    rest = k - a.sum(axis=1)
    return (log_multinomial(k, a) + xlogy(a, a / k).sum(axis=1) + xlogy(rest, rest / k))


def fs_log_p_special_raw(k, alpha):
    a = _alpha2d(alpha)
    rest = k - a.sum(axis=1)
    return xlogy(a, a / k).sum(axis=1) + xlogy(rest, rest / k) - fs_log_q_raw(k, a)


def fs_szego(k, m=1):
    """Raw-normalization diagonal Szego value, constant ``(k+1)...(k+m)``."""
    return float(np.prod(np.arange(k + 1, k + m + 1, dtype=float)))


def bf_log_q(k, alpha):
    """``log(alpha! / k^(|alpha| + m))`` on the full orthant."""
    a = _alpha2d(alpha)
    m = a.shape[1]
    return gammaln(a + 1).sum(axis=1) - (a.sum(axis=1) + m) * np.log(k)


def bf_truncated_log_q(k, alpha, length):
    """Bargmann-Fock norming constant on ``[0, length]^m``.

    Each factor is ``gamma_lower(a + 1, k L) / k^(a+1)``.
    """
    a = _alpha2d(alpha)
    return bf_log_q(k, a) + np.log(gammainc(a + 1, k * float(length))).sum(axis=1)


def log_bf_law(x, k):
    """``log(k e^{-x} x^x / Gamma(x + 1))``, real-analytic in ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    return np.log(k) - x + xlogy(x, x) - gammaln(x + 1)


def bf_log_p_special(k, alpha):
    a = _alpha2d(alpha)
    return log_bf_law(a, k).sum(axis=1)


def binomial_log_pmf(k, j, x):
    """``log C(k, j) x^j (1-x)^(k-j)``."""
    j = np.asarray(j, dtype=float)
    return (gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
            + xlogy(j, x) + xlogy(k - j, 1 - x))
