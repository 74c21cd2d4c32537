"""Monge-Ampere geodesics and their Bergman approximations.

The Monge-Ampere geodesic between two toric potentials is the Legendre dual
of the straight line ``u_t = (1 - t) u_0 + t u_1``.  The Bergman geodesic at
level k is the log of an exponential sum over the lattice points of kP,

    psi_k(t, rho) = (1/k) log sum_alpha exp(-log Q_0(alpha) + 2 t lambda_alpha + <alpha, rho>),
    2 lambda_alpha = log Q_0(alpha) - log Q_1(alpha),

whose derivatives are moments of the normalized weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import MissingNormingTable, NumericalError
from .potential import SymplecticPotential, convexity_check, legendre_batch
from .quantize import NormingTable, QuadConfig, default_threads, norming_table

__all__ = [
    "GeodesicPair",
    "MAJet",
    "BergmanJet",
    "ma_jet",
    "ma_jets",
    "bergman_jet",
    "bergman_jets",
    "rk_ratio",
    "rk_table",
    "rinfty",
    "volume_ratio",
    "regularity_gap",
    "GapReport",
]


@dataclass
class GeodesicPair:
    """Two symplectic potentials on one polytope plus a norming-table cache."""

    u0: SymplecticPotential
    u1: SymplecticPotential
    quad: QuadConfig = field(default_factory=QuadConfig)
    threads: int | None = None
    validate: bool = True
    _tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.u0.same_log_part(self.u1):
            raise ValueError("endpoints must share polytope and logarithmic part")
        if self.validate:
            for name, u in (("u0", self.u0), ("u1", self.u1)):
                lam = convexity_check(u)
                if not lam > 0:
                    raise ValueError(f"{name} is not strictly convex (min eigenvalue {lam:.3g})")
        self.f = self.u1.f - self.u0.f

    @property
    def polytope(self):
        return self.u0.polytope

    def at(self, t: float) -> SymplecticPotential:
        if t == 0:
            return self.u0
        if t == 1:
            return self.u1
        return self.u0.interpolate(self.u1, t)

    def table(self, k: int, t: float = 0.0) -> NormingTable:
        """Norming table of ``u_t`` at level k (computed once, then cached)."""
        key = (int(k), round(float(t), 12))
        if key not in self._tables:
            threads = default_threads() if self.threads is None else self.threads
            self._tables[key] = norming_table(self.at(t), k, self.quad, threads)
        return self._tables[key]

    def add_table(self, table: NormingTable, t: float):
        self._tables[(table.k, round(float(t), 12))] = table

    def swapped(self) -> GeodesicPair:
        p = GeodesicPair(self.u1, self.u0, self.quad, self.threads, validate=False)
        for (k, t), tab in self._tables.items():
            p._tables[(k, round(1.0 - t, 12))] = tab
        return p

    def endpoint_tables(self, k):
        try:
            return self.table(k, 0.0), self.table(k, 1.0)
        except KeyError as e:  # pragma: no cover - cache miss is computed above
            raise MissingNormingTable(str(e)) from None


@dataclass(frozen=True)
class MAJet:
    t: float
    rho: np.ndarray
    phi: float
    dt: float
    dt2: float
    grad: np.ndarray
    hess: np.ndarray
    mixed: np.ndarray

    def ma_residual(self) -> float:
        v = self.mixed
        return float(self.dt2 - v @ np.linalg.solve(self.hess, v))


@dataclass(frozen=True)
class BergmanJet:
    t: float
    rho: np.ndarray
    phi: float
    dt: float
    dt2: float
    grad: np.ndarray
    hess: np.ndarray
    mixed: np.ndarray
    weights: np.ndarray


def _ma_from_x(pair: GeodesicPair, t: float, x, rho):
    ut = pair.at(t)
    G = ut.hessian(x, eps=0.0)
    H = np.linalg.inv(G)
    gf = pair.f.grad(x)
    Hgf = np.einsum("nij,nj->ni", H, gf)
    return dict(
        phi=np.einsum("ni,ni->n", x, rho) - ut.value(x),
        dt=-pair.f.value(x),
        dt2=np.einsum("ni,ni->n", Hgf, gf),
        grad=x.copy(),
        hess=H,
        mixed=-Hgf,
    )


def ma_jets(pair: GeodesicPair, t: float, rho=None, x=None):
    """Jets of ``phi_t`` at stacked ``rho`` (Legendre solve) or at ``x`` (``rho = grad u_t(x)``).

    Returns a dict of arrays with keys ``phi, dt, dt2, grad, hess, mixed, rho, x``.
    """
    ut = pair.at(t)
    if x is not None:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rho = ut.gradient(x, eps=0.0)
    else:
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        _, x, _, _ = legendre_batch(ut, rho)
    out = _ma_from_x(pair, t, x, rho)
    out["rho"], out["x"] = rho, x
    return out


def ma_jet(pair: GeodesicPair, t: float, rho) -> MAJet:
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    j = ma_jets(pair, t, rho=rho[None, :])
    return MAJet(t, rho, float(j["phi"][0]), float(j["dt"][0]), float(j["dt2"][0]),
                 j["grad"][0], j["hess"][0], j["mixed"][0])


def bergman_jets(pair: GeodesicPair, k: int, t: float, rho, tables=None):
    """Jets of ``psi_k(t, .)`` at stacked ``rho``; returns a dict of arrays plus weights."""
    if tables is None:
        T0, T1 = pair.endpoint_tables(k)
    else:
        T0, T1 = tables
        if T0.k != k or T1.k != k:
            raise MissingNormingTable(f"tables are not at level k={k}")
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    alphas = T0.alphas.astype(float)
    lam2 = T0.log_q - T1.log_q
    logw = -T0.log_q + t * lam2
    S = rho @ alphas.T + logw[None, :]
    lse = logsumexp(S, axis=1)
    p = np.exp(S - lse[:, None])
    mean_a = p @ alphas
    mean_l = p @ lam2
    da = alphas[None, :, :] - mean_a[:, None, :]
    dl = lam2[None, :] - mean_l[:, None]
    cov_aa = np.einsum("na,nai,naj->nij", p, da, da)
    cov_al = np.einsum("na,nai,na->ni", p, da, dl)
    var_l = np.einsum("na,na->n", p, dl * dl)
    return dict(phi=lse / k, dt=mean_l / k, dt2=var_l / k, grad=mean_a / k,
                hess=cov_aa / k, mixed=cov_al / k, weights=p, rho=rho)


def bergman_jet(pair: GeodesicPair, k: int, t: float, rho, tables=None) -> BergmanJet:
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    j = bergman_jets(pair, k, t, rho[None, :], tables)
    return BergmanJet(t, rho, float(j["phi"][0]), float(j["dt"][0]), float(j["dt2"][0]),
                      j["grad"][0], j["hess"][0], j["mixed"][0], j["weights"][0])


def rk_table(pair: GeodesicPair, k: int, t: float, guard_tol: float = 1e-9):
    """``log R_k(t, alpha)`` for all alpha in kP.

    Computed from norming constants and checked against the dual form
    ``(1-t) log P_0 + t log P_1 - log P_t``.
    """
    T0, T1 = pair.endpoint_tables(k)
    if t == 0 or t == 1:
        return np.zeros(T0.alphas.shape[0])
    Tt = pair.table(k, t)
    log_r = Tt.log_q - (1 - t) * T0.log_q - t * T1.log_q
    a = T0.alphas / k
    lp = [k * tab.potential.value(a) - tab.log_q for tab in (T0, T1, Tt)]
    dual = (1 - t) * lp[0] + t * lp[1] - lp[2]
    scale = 1.0 + k * np.abs(lp[2]).max() * 1e-6
    if np.max(np.abs(dual - log_r)) > guard_tol * scale:
        raise NumericalError(f"R_k dual forms disagree at k={k}, t={t}")
    return log_r


def rk_ratio(pair: GeodesicPair, k: int, t: float, alpha) -> float:
    T0 = pair.table(k, 0.0)
    i = T0.index_of(alpha)
    return float(np.exp(rk_table(pair, k, t)[i]))


def volume_ratio(pair: GeodesicPair, t: float, x) -> np.ndarray:
    """``(det G_t / (det G_0^{1-t} det G_1^t))^{1/2}`` at points x of P.

    Evaluated through boundary-regular determinants: ``det G * prod l_r`` is
    smooth and positive up to the boundary and the ``l_r`` factors cancel in
    the quotient, so x may lie on a facet.
    """
    x = np.asarray(x, dtype=float).reshape(-1, pair.polytope.dim)
    b0 = pair.u0.boundary_det(x)
    b1 = pair.u1.boundary_det(x)
    bt = pair.at(t).boundary_det(x)
    return np.exp(0.5 * (np.log(bt) - (1 - t) * np.log(b0) - t * np.log(b1)))


def rinfty(pair: GeodesicPair, t: float, x) -> np.ndarray:
    """Large-k limit of ``R_k(t, alpha)`` at ``alpha / k = x``.

    Laplace's method gives ``Q(alpha) ~ e^{k u(x)} (2 pi / k)^{m/2} det G(x)^{-1/2}``,
    so the limit is the reciprocal of :func:`volume_ratio`.
    """
    return 1.0 / volume_ratio(pair, t, x)


@dataclass
class GapReport:
    k: int
    sup_all: float
    sup_interior: float
    sup_boundary: float
    by_t: dict


def regularity_gap(pair: GeodesicPair, k: int, t_values=None) -> GapReport:
    """``sup |R_k - R_inf(t, alpha/k)|`` over alpha, split by a k^{-2/3} boundary zone."""
    if t_values is None:
        t_values = np.linspace(0.0, 1.0, 11)
    T0 = pair.table(k, 0.0)
    a = T0.alphas / k
    interior = np.min(pair.u0.ell_log(a), axis=1) >= k ** (-2.0 / 3.0)
    sup_all = sup_in = sup_bd = 0.0
    by_t = {}
    for t in np.atleast_1d(t_values):
        gap = np.abs(np.exp(rk_table(pair, k, float(t))) - rinfty(pair, float(t), a))
        by_t[float(t)] = gap
        sup_all = max(sup_all, float(gap.max()))
        if interior.any():
            sup_in = max(sup_in, float(gap[interior].max()))
        if (~interior).any():
            sup_bd = max(sup_bd, float(gap[~interior].max()))
    return GapReport(k, sup_all, sup_in, sup_bd, by_t)
