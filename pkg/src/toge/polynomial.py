"""Sparse multivariate polynomials with exact gradients and Hessians."""
from __future__ import annotations

import numpy as np


class Polynomial:
    """``sum_i c_i x^{e_i}`` stored as ``{exponent tuple: coefficient}``.

    Evaluation methods accept stacked points of shape ``(..., m)``.
    """

    def __init__(self, dim: int, terms=()):
        self.dim = int(dim)
        acc: dict[tuple, float] = {}
        for exp, coef in terms:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.dim or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for dimension {self.dim}")
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValueError("polynomial coefficients must be finite")
            acc[exp] = acc.get(exp, 0.0) + coef
        self.terms = {e: c for e, c in sorted(acc.items()) if c != 0.0}

    @classmethod
    def from_json(cls, dim, items):
        return cls(dim, [(it["exp"], it["coef"]) for it in items])

    def to_json(self):
        return [{"exp": list(e), "coef": c} for e, c in self.terms.items()]

    @classmethod
    def affine(cls, c, b=0.0):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        m = c.shape[0]
        terms = [((0,) * m, b)]
        for j in range(m):
            e = [0] * m
            e[j] = 1
            terms.append((tuple(e), c[j]))
        return cls(m, terms)

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial(self.dim, list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + other.scale(-1.0)

    def scale(self, s: float) -> Polynomial:
        return Polynomial(self.dim, [(e, s * c) for e, c in self.terms.items()])

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Polynomial({self.dim}, {list(self.terms.items())})"

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @staticmethod
    def _mono(x, exp, shift=None):
        out = np.ones(x.shape[:-1])
        for j, e in enumerate(exp):
            if shift is not None:
                e = e - shift[j]
            if e:
                out = out * x[..., j] ** e
        return out

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for exp, c in self.terms.items():
            out = out + c * self._mono(x, exp)
        return out

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for exp, c in self.terms.items():
            for j in range(self.dim):
                if exp[j] == 0:
                    continue
                d = [0] * self.dim
                d[j] = 1
                out[..., j] += c * exp[j] * self._mono(x, exp, d)
        return out

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        m = self.dim
        out = np.zeros(x.shape + (m,))
        for exp, c in self.terms.items():
            for i in range(m):
                for j in range(i, m):
                    d = [0] * m
                    d[i] += 1
                    d[j] += 1
                    if exp[i] < d[i] or exp[j] < d[j]:
                        continue
                    coef = exp[i] * (exp[i] - 1) if i == j else exp[i] * exp[j]
                    val = c * coef * self._mono(x, exp, d)
                    out[..., i, j] += val
                    if i != j:
                        out[..., j, i] += val
        return out
