"""Error fields between Bergman and Monge-Ampere geodesics, and rate fits.

Both geodesics are compared as full open-orbit potentials at the same
``(t, rho)``.  Grid points are chosen in polytope coordinates and mapped to
``rho = grad u_t(x)`` separately for every t, so the Monge-Ampere side needs
no Legendre solve.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, EmptyGrid
from .geodesic import GeodesicPair, bergman_jets, ma_jets

__all__ = [
    "EmptyGrid",
    "EvalGrid",
    "ErrorRow",
    "ErrorReport",
    "FIELDS",
    "R_FIELDS",
    "build_grid",
    "error_fields",
    "fit_rate",
    "converge",
    "r_frame",
    "default_margin",
]

FIELDS = ("e0", "e1_space", "e1_time", "e2_space", "e2_mixed", "e2_time")
R_FIELDS = ("e1_space_r", "e2_space_r")
NEAR_BOUNDARY = 0.1


def default_margin(k_values, floor: float = 0.02) -> float:
    return max(floor, 1.0 / (4 * min(k_values)))


@dataclass(frozen=True, eq=False)
class EvalGrid:
    t_values: np.ndarray  # (n_t,)
    x_values: np.ndarray  # (N, m)
    rho: np.ndarray  # (n_t, N, m), rho = grad u_t(x)
    near_boundary: np.ndarray  # (N,) bool
    margin: float

    @property
    def size(self) -> int:
        return self.x_values.shape[0]


def build_grid(pair: GeodesicPair, n_t: int = 11, n_x: int = 33, margin: float = 0.02) -> EvalGrid:
    """Tensor grid of ``n_x`` points per axis on ``P`` shrunk by ``margin``.

    Points with some facet value below ``margin`` are dropped; points with a
    facet value below 0.1 are flagged for r-frame evaluation.
    """
    if n_t < 3 or n_x < 3:
        raise ValueError("n_t and n_x must be at least 3")
    if not margin > 0:
        raise ValueError("margin must be positive")
    P = pair.polytope
    lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
    axes = [np.linspace(a + margin, b - margin, n_x) for a, b in zip(lo, hi)]
    if any(a[0] > a[-1] for a in axes):
        raise EmptyGrid(f"margin {margin} leaves no room in P")
    x = np.array(list(itertools.product(*axes)), dtype=float)
    ell = pair.u0.ell_log(x)
    keep = ell.min(axis=1) >= margin * (1 - 1e-12)
    x = x[keep]
    if x.shape[0] == 0:
        raise EmptyGrid(f"no grid point has all facet values >= {margin}")
    t_values = np.linspace(0.0, 1.0, n_t)
    rho = np.stack([pair.at(float(t)).gradient(x, eps=0.0) for t in t_values])
    near = pair.u0.ell_log(x).min(axis=1) < NEAR_BOUNDARY
    return EvalGrid(t_values, x, rho, near, float(margin))


def r_frame(rho, d1, d2_diag):
    """Convert rho-derivatives to ``r_j = e^{rho_j / 2}`` derivatives.

    ``d/dr = (2/r) d/drho`` and ``d^2/dr^2 = (4/r^2)(d^2/drho^2 - d/drho / 2)``,
    componentwise along the coordinate axes.
    """
    r = np.exp(0.5 * np.asarray(rho))
    return 2.0 / r * d1, 4.0 / r ** 2 * (d2_diag - 0.5 * d1)


@dataclass
class ErrorRow:
    k: int
    sup: dict  # field -> sup value
    argmax_t: dict
    argmax_x: dict
    c_k: float
    fields: dict | None = None  # field -> (n_t, N) array when requested


@dataclass
class ErrorReport:
    k_values: list
    rows: list
    rates: dict = field(default_factory=dict)  # (field, model) -> (slope, intercept, residual)

    def series(self, name: str) -> np.ndarray:
        return np.array([row.sup[name] for row in self.rows])

    def monotone(self, name: str) -> bool:
        e = self.series(name)
        return bool(np.all(np.diff(e) < 0))


def _sup(values, t_idx, x_idx, grid, out, name):
    i = int(np.argmax(values))
    out.sup[name] = float(values.flat[i])
    ti, xi = np.unravel_index(i, values.shape)
    out.argmax_t[name] = float(grid.t_values[t_idx[ti]])
    out.argmax_x[name] = grid.x_values[x_idx[xi]].copy()


def error_fields(pair: GeodesicPair, k: int, grid: EvalGrid, keep: bool = False) -> ErrorRow:
    """Sup-norm differences of all jets over the grid at level k.

    ``c_k`` is the grid mean of ``psi_k - phi`` at ``t = 0``; the operator
    2-norm is used for matrices and the Euclidean norm for vectors.  With
    ``keep=True`` the pointwise error arrays are attached to the row.
    """
    tables = pair.endpoint_tables(k)
    n_t, N = grid.t_values.size, grid.size
    diff = {name: np.zeros((n_t, N)) for name in FIELDS + R_FIELDS}
    d0 = np.zeros((n_t, N))
    for i, t in enumerate(grid.t_values):
        t = float(t)
        ma = ma_jets(pair, t, x=grid.x_values)
        bj = bergman_jets(pair, k, t, grid.rho[i], tables)
        d0[i] = bj["phi"] - ma["phi"]
        dg = bj["grad"] - ma["grad"]
        diff["e1_space"][i] = np.linalg.norm(dg, axis=1)
        diff["e1_time"][i] = np.abs(bj["dt"] - ma["dt"])
        dh = bj["hess"] - ma["hess"]
        diff["e2_space"][i] = np.linalg.norm(dh, ord=2, axis=(1, 2))
        diff["e2_mixed"][i] = np.linalg.norm(bj["mixed"] - ma["mixed"], axis=1)
        diff["e2_time"][i] = np.abs(bj["dt2"] - ma["dt2"])
        r1, r2 = r_frame(grid.rho[i], dg, np.diagonal(dh, axis1=1, axis2=2))
        diff["e1_space_r"][i] = np.abs(r1).max(axis=1)
        diff["e2_space_r"][i] = np.abs(r2).max(axis=1)
    c_k = float(d0[0].mean())
    diff["e0"] = np.abs(d0 - c_k)
    row = ErrorRow(int(k), {}, {}, {}, c_k, diff if keep else None)
    t_all, x_all = np.arange(n_t), np.arange(N)
    for name in FIELDS:
        _sup(diff[name], t_all, x_all, grid, row, name)
    near = np.flatnonzero(grid.near_boundary)
    for name in R_FIELDS:
        if near.size:
            _sup(diff[name][:, near], t_all, near, grid, row, name)
        else:
            row.sup[name], row.argmax_t[name], row.argmax_x[name] = 0.0, float("nan"), None
    return row


def fit_rate(k_values, errors, model: str = "power"):
    """Least-squares rate of ``errors`` in k on log-log axes.

    ``model="power"`` fits ``log e = s log k + c``; ``model="power_log"`` fits
    ``log(e / log k) = s log k + c``, so ``e = C log k / k`` gives ``s = -1``.
    Returns ``(slope, intercept, max abs residual)``; all-zero errors give the
    sentinel ``(-inf, nan, 0.0)``.
    """
    k = np.asarray(k_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if k.size < 4 or k.size != e.size:
        raise DegenerateFit(f"need at least 4 (k, error) pairs, got {k.size}")
    if np.all(e == 0):
        return float("-inf"), float("nan"), 0.0
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise DegenerateFit("errors must be all positive or all zero")
    y = np.log(e)
    if model == "power_log":
        y = y - np.log(np.log(k))
    elif model != "power":
        raise ValueError(f"unknown rate model {model!r}")
    X = np.log(k)
    slope, intercept = np.polyfit(X, y, 1)
    resid = float(np.max(np.abs(y - (slope * X + intercept))))
    return float(slope), float(intercept), resid


def converge(pair: GeodesicPair, k_values, grid: EvalGrid | None = None,
             models=("power", "power_log")) -> ErrorReport:
    """Error rows for every k plus fitted rates for every field."""
    k_values = [int(k) for k in k_values]
    if grid is None:
        grid = build_grid(pair, margin=default_margin(k_values))
    rows = [error_fields(pair, k, grid) for k in k_values]
    report = ErrorReport(k_values, rows)
    if len(k_values) >= 4:
        for name in FIELDS + R_FIELDS:
            for model in models:
                try:
                    report.rates[(name, model)] = fit_rate(k_values, report.series(name), model)
                except DegenerateFit:
                    report.rates[(name, model)] = (float("nan"), float("nan"), float("nan"))
    return report
