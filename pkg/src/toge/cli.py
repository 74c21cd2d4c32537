"""Command line entry point ``toge <command> --config <path>``.

Exit status: 0 on success, 2 on a configuration error, 3 on a numerical
failure (the failing k, alpha, t, x are written to stderr).
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, RunConfig, load_config
from .converge import FIELDS, R_FIELDS, build_grid, default_margin, error_fields, fit_rate
from .errors import DegenerateFit, NumericalError, SchemaError
from .geodesic import GeodesicPair, bergman_jets, ma_jets, regularity_gap, rinfty, rk_table
from .oracles import bf_truncated_log_q, fs_log_q_normalized
from .potential import bargmann_fock, canonical, convexity_check, legendre_batch
from .quantize import (
    localization_profile,
    log_p_special,
    log_szego,
    norming_table,
)

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 2, 3
RATE_MODELS = ("power", "power_log")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (str, bytes)):
        return v
    a = np.asarray(v)
    if a.ndim == 0:
        if np.issubdtype(a.dtype, np.integer):
            return str(int(a))
        return "%.17g" % float(a)
    return ";".join(_fmt(x) for x in a.ravel())


class CsvOut:
    """CSV writer with a provenance comment line and fixed float formatting."""

    def __init__(self, path: Path, header, cfg: RunConfig):
        self.path = path
        self.fh = open(path, "w", newline="")
        self.fh.write(f"# toge {__version__} config-sha256 {cfg.digest}\n")
        self.w = csv.writer(self.fh, lineterminator="\n")
        self.w.writerow(header)

    def row(self, *values):
        self.w.writerow([_fmt(v) for v in values])

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class Context(dict):
    """Current (k, alpha, t, x) of a run, reported when a numerical step fails."""

    def describe(self) -> str:
        return " ".join(f"{key}={_fmt(self.get(key))}" for key in ("k", "alpha", "t", "x")
                        if self.get(key) is not None)


def _pair(cfg: RunConfig, threads) -> GeodesicPair:
    return GeodesicPair(cfg.u0, cfg.u1, cfg.quad, threads, validate=False)


def cmd_validate(cfg, out, threads, ctx):
    P = cfg.polytope
    with CsvOut(out / "validate.csv", ["item", "value"], cfg) as w:
        w.row("dim", P.dim)
        w.row("n_facets", P.n_facets)
        w.row("n_vertices", P.vertices.shape[0])
        w.row("volume", P.euclidean_volume)
        w.row("min_eig_u0", convexity_check(cfg.u0))
        if cfg.u1 is not None:
            w.row("min_eig_u1", convexity_check(cfg.u1))
    print(f"ok: {P.name} dim={P.dim} facets={P.n_facets} vertices={P.vertices.shape[0]}")


def cmd_qconst(cfg, out, threads, ctx):
    with CsvOut(out / "qconst.csv", ["k", "alpha", "logQ_raw", "logP_special", "quad_err"],
                cfg) as w:
        for k in cfg.k_values:
            ctx["k"] = k
            T = norming_table(cfg.u0, k, cfg.quad, threads)
            lp = log_p_special(T)
            for a, q, p, e in zip(T.alphas, T.log_q, lp, T.quad_err):
                w.row(k, a, q, p, e)


def cmd_pkernel(cfg, out, threads, ctx):
    rho = cfg.rho_points()
    u = cfg.u0
    phi, _, _, _ = legendre_batch(u, rho)
    with CsvOut(out / "pkernel.csv", ["k", "alpha", "rho", "logP_z", "logP_special"], cfg) as w:
        for k in cfg.k_values:
            ctx["k"] = k
            T = norming_table(u, k, cfg.quad, threads)
            lp = log_p_special(T)
            if "alpha" in cfg.data:
                idx = [T.index_of(a) for a in cfg.data["alpha"]]
            else:
                idx = range(T.alphas.shape[0])
            for i in idx:
                a = T.alphas[i]
                for r, ph in zip(rho, phi):
                    w.row(k, a, r, float(a @ r) - k * ph - T.log_q[i], lp[i])


def cmd_szego(cfg, out, threads, ctx):
    rho = cfg.rho_points()
    u, m = cfg.u0, cfg.polytope.dim
    vol = cfg.polytope.euclidean_volume
    delta = cfg.data["localization_delta"]
    phi, _, _, _ = legendre_batch(u, rho)
    with CsvOut(out / "szego.csv", ["k", "rho", "log_Pi", "tyz_ratio"], cfg) as w, \
            CsvOut(out / "localization.csv", ["k", "rho", "delta", "inside_mass", "outside_max"],
                   cfg) as wl:
        for k in cfg.k_values:
            ctx["k"] = k
            T = norming_table(u, k, cfg.quad, threads)
            lse, _ = log_szego(T, rho, phi)
            for r, v in zip(rho, lse):
                w.row(k, r, v, vol * np.exp(v - m * np.log(k)))
                inside, outside = localization_profile(T, r, delta)
                wl.row(k, r, delta, inside, outside)


def cmd_geodesic(cfg, out, threads, ctx):
    pair = _pair(cfg, threads)
    t_values = np.linspace(0.0, 1.0, cfg.data["t_grid"])
    rho = cfg.rho_points()
    names = ("phi", "dt", "dt2", "grad", "hess", "mixed")
    header = ["k", "t", "rho"] + [f"{n}_{s}" for n in names for s in ("ma", "bergman")]
    with CsvOut(out / "geodesic.csv", header, cfg) as w:
        for k in cfg.k_values:
            ctx["k"] = k
            tables = pair.endpoint_tables(k)
            for t in t_values:
                ctx["t"] = float(t)
                ma = ma_jets(pair, float(t), rho=rho)
                bj = bergman_jets(pair, k, float(t), rho, tables)
                for i in range(rho.shape[0]):
                    vals = []
                    for n in names:
                        vals += [ma[n][i], bj[n][i]]
                    w.row(k, float(t), rho[i], *vals)


def cmd_rk(cfg, out, threads, ctx):
    pair = _pair(cfg, threads)
    t_values = np.linspace(0.0, 1.0, cfg.data["t_grid"])
    with CsvOut(out / "rk.csv", ["k", "t", "alpha", "R_k", "R_inf", "gap"], cfg) as w, \
            CsvOut(out / "rk_gap.csv", ["k", "sup_all", "sup_interior", "sup_boundary"],
                   cfg) as wg:
        for k in cfg.k_values:
            ctx["k"] = k
            T0 = pair.table(k, 0.0)
            a = T0.alphas / k
            for t in t_values:
                ctx["t"] = float(t)
                rk = np.exp(rk_table(pair, k, float(t)))
                ri = rinfty(pair, float(t), a)
                for alpha, x, y in zip(T0.alphas, rk, ri):
                    w.row(k, float(t), alpha, x, y, abs(x - y))
            rep = regularity_gap(pair, k, t_values)
            wg.row(k, rep.sup_all, rep.sup_interior, rep.sup_boundary)


def _errors(cfg, threads, ctx):
    pair = _pair(cfg, threads)
    ks = cfg.k_values
    margin = max(cfg.data["margin"], default_margin(ks, cfg.data["margin"]))
    grid = build_grid(pair, cfg.data["t_grid"], cfg.data["x_grid"], margin)
    rows = []
    for k in ks:
        ctx["k"] = k
        rows.append(error_fields(pair, k, grid))
    return rows


def _write_rates(cfg, out, ks, series):
    with CsvOut(out / "rates.csv", ["field", "model", "slope", "residual"], cfg) as w:
        for name, es in series.items():
            for model in RATE_MODELS:
                try:
                    slope, _, resid = fit_rate(ks, es, model)
                except DegenerateFit:
                    slope, resid = float("nan"), float("nan")
                w.row(name, model, slope, resid)


def cmd_converge(cfg, out, threads, ctx):
    rows = _errors(cfg, threads, ctx)
    series = {name: [] for name in FIELDS}
    header = ["k", "field", "sup_value", "argmax_t", "argmax_x"]
    with CsvOut(out / "errors.csv", header, cfg) as w, \
            CsvOut(out / "errors_rframe.csv", header, cfg) as wr:
        for row in rows:
            for name in FIELDS:
                w.row(row.k, name, row.sup[name], row.argmax_t[name], row.argmax_x[name])
                series[name].append(row.sup[name])
            for name in R_FIELDS:
                wr.row(row.k, name, row.sup[name], row.argmax_t[name], row.argmax_x[name])
    _write_rates(cfg, out, cfg.k_values, series)


def cmd_rates(cfg, out, threads, ctx):
    path = out / "errors.csv"
    if not path.exists():
        cmd_converge(cfg, out, threads, ctx)
        return
    series, ks = {}, []
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        k = int(rec["k"])
        if k not in ks:
            ks.append(k)
        series.setdefault(rec["field"], []).append(float(rec["sup_value"]))
    _write_rates(cfg, out, ks, series)


def oracle_suite(quad, threads=1, ctx=None):
    """Closed-form checks of the quadrature path: ``[(name, k, max rel err, tol)]``."""
    ctx = Context() if ctx is None else ctx
    results = []
    tol = quad.rtol
    for name, u, ks in (("fubini_study_interval", canonical("interval"), range(1, 33)),
                        ("fubini_study_simplex", canonical("simplex"), range(1, 17))):
        for k in ks:
            ctx["k"] = k
            T = norming_table(u, k, quad, threads)
            err = np.abs(np.expm1(T.log_q_normalized - fs_log_q_normalized(k, T.alphas)))
            results.append((name, k, float(err.max()), tol))
    u = bargmann_fock(1, 1)
    for k in (4, 8, 16, 32, 64):
        ctx["k"] = k
        T = norming_table(u, k, quad, threads)
        err = np.abs(np.expm1(T.log_q - bf_truncated_log_q(k, T.alphas, 1)))
        results.append(("bargmann_fock_truncated", k, float(err.max()), tol))
    u = canonical("interval")
    rho = np.linspace(-2.0, 2.0, 5)[:, None]
    for k in (8, 32, 128):
        ctx["k"] = k
        T = norming_table(u, k, quad, threads)
        lse, _ = log_szego(T, rho)
        err = np.abs(np.expm1(lse - np.log(k + 1)))
        results.append(("szego_constant_interval", k, float(err.max()), tol))
    return results


def cmd_oracle(cfg, out, threads, ctx):
    results = oracle_suite(cfg.quad, threads, ctx)
    ctx.clear()
    worst = max(r[2] for r in results)
    with CsvOut(out / "oracle.csv", ["check", "k", "max_rel_err", "tol", "pass"], cfg) as w:
        for name, k, err, tol in results:
            w.row(name, k, err, tol, "yes" if err <= tol else "no")
    print(f"oracle: {len(results)} checks, max relative error {worst:.3e}")
    failed = [r for r in results if r[2] > r[3]]
    if failed:
        for name, k, err, tol in failed:
            print(f"oracle breach: {name} k={k} err={err:.3e} tol={tol:.1e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "qconst": cmd_qconst,
    "pkernel": cmd_pkernel,
    "szego": cmd_szego,
    "geodesic": cmd_geodesic,
    "rk": cmd_rk,
    "converge": cmd_converge,
    "rates": cmd_rates,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toge", description="Toric geodesic numerics.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=None, help="output directory (default: config 'output' or .)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: config, then TOGE_THREADS, then 1)")
    p.add_argument("--version", action="version", version=f"toge {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
    except SchemaError as e:
        for v in e.violations:
            print(f"schema error: {v}", file=sys.stderr)
        return EXIT_SCHEMA
    out = Path(args.out or cfg.data.get("output", "."))
    out.mkdir(parents=True, exist_ok=True)
    threads = args.threads or cfg.threads
    ctx = Context()
    try:
        code = HANDLERS[args.command](cfg, out, threads, ctx)
    except NumericalError as e:
        k = getattr(e, "k", None)
        alpha = getattr(e, "alpha", None)
        x = getattr(e, "x", None)
        if k is not None:
            ctx["k"] = k
        if alpha is not None:
            ctx["alpha"] = alpha
        if x is not None:
            ctx["x"] = x
        print(f"numerical error: {type(e).__name__}: {e}", file=sys.stderr)
        print(f"at {ctx.describe()}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK if code is None else code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
