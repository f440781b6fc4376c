"""Gauss-Legendre quadrature and integral-valued coefficients."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .scalar import ScalarExpr, as_fraction, const

__all__ = ["gauss_legendre", "adaptive_gauss_legendre", "QuadratureExpr"]


@lru_cache(maxsize=64)
def _rule(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    x, w = np.polynomial.legendre.leggauss(n)
    return tuple(float(v) for v in x), tuple(float(v) for v in w)


def gauss_legendre(f: Callable[[float], float], a: float, b: float, nodes: int = 32) -> float:
    x, w = _rule(nodes)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * math.fsum(wi * f(mid + half * xi) for xi, wi in zip(x, w))


def adaptive_gauss_legendre(
    f: Callable[[float], float], a: float, b: float, nodes: int = 32, rtol: float = 1e-12, max_depth: int = 30
) -> float:
    """Bisect until the whole-interval and two-halves estimates agree to ``rtol``."""

    def recurse(lo, hi, whole, depth):
        mid = 0.5 * (lo + hi)
        left = gauss_legendre(f, lo, mid, nodes)
        right = gauss_legendre(f, mid, hi, nodes)
        both = left + right
        if depth >= max_depth or abs(both - whole) <= rtol * max(abs(both), 1e-300) or abs(both - whole) < 1e-300:
            return both
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(a, b, gauss_legendre(f, a, b, nodes), 0)


Bounds = tuple[tuple[str, Fraction, Fraction], ...]


class QuadratureExpr:
    """``offset + integral of integrand over a box``, evaluated numerically.

    The integrand depends on the bound variables and on free base coordinates;
    derivatives in free coordinates are taken under the integral sign.
    """

    __slots__ = ("integrand", "bounds", "nodes", "adaptive", "offset")

    def __init__(self, integrand: ScalarExpr, bounds: Sequence[tuple[str, object, object]], nodes: int = 32,
                 adaptive: bool = False, offset: ScalarExpr | None = None):
        self.integrand = integrand
        self.bounds: Bounds = tuple((v, as_fraction(a), as_fraction(b)) for v, a, b in bounds)
        self.nodes = nodes
        self.adaptive = adaptive
        self.offset = offset if offset is not None else ScalarExpr.ZERO

    @property
    def bound_vars(self) -> frozenset[str]:
        return frozenset(v for v, _, _ in self.bounds)

    @property
    def free_symbols(self) -> frozenset[str]:
        return (self.integrand.free_symbols - self.bound_vars) | self.offset.free_symbols

    is_polynomial = False

    def _same_rule(self, other: "QuadratureExpr") -> bool:
        return (self.bounds, self.nodes, self.adaptive) == (other.bounds, other.nodes, other.adaptive)

    def _like(self, integrand: ScalarExpr, offset: ScalarExpr) -> "QuadratureExpr":
        return QuadratureExpr(integrand, self.bounds, self.nodes, self.adaptive, offset)

    def __bool__(self) -> bool:
        return bool(self.integrand) or bool(self.offset)

    def __eq__(self, other):
        if not isinstance(other, QuadratureExpr):
            return NotImplemented
        return self._same_rule(other) and self.integrand == other.integrand and self.offset == other.offset

    def __hash__(self):
        return hash((self.integrand, self.bounds, self.nodes, self.adaptive, self.offset))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if isinstance(other, ScalarExpr):
            return self._like(self.integrand, self.offset + other)
        if isinstance(other, QuadratureExpr):
            if not self._same_rule(other):
                raise ValueError("cannot add integrals over different domains")
            return self._like(self.integrand + other.integrand, self.offset + other.offset)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.integrand, -self.offset)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        if other.free_symbols & self.bound_vars:
            raise ValueError("factor depends on an integration variable")
        return self._like(self.integrand * other, self.offset * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def partial(self, c: str) -> "QuadratureExpr":
        if c in self.bound_vars:
            return self._like(ScalarExpr.ZERO, ScalarExpr.ZERO)
        return self._like(self.integrand.partial(c), self.offset.partial(c))

    def eval(self, point: Mapping[str, float]) -> float:
        base = dict(point)

        def integrate(level: int) -> float:
            if level == len(self.bounds):
                return self.integrand.eval(base)
            var, a, b = self.bounds[level]

            def f(s: float) -> float:
                base[var] = s
                return integrate(level + 1)

            if self.adaptive:
                return adaptive_gauss_legendre(f, float(a), float(b), self.nodes)
            return gauss_legendre(f, float(a), float(b), self.nodes)

        out = integrate(0) if self.integrand else 0.0
        if self.offset:
            out += self.offset.eval(point)
        return out

    def __call__(self, point):
        return self.eval(point)

    def __str__(self) -> str:
        dom = ", ".join(f"{v}={a}..{b}" for v, a, b in self.bounds)
        text = f"quad[{dom}]({self.integrand})"
        return text if not self.offset else f"{self.offset} + {text}"

    __repr__ = __str__
