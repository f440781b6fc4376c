"""Lifted functionals: point evaluation and integration over parameters.

A functional on functions of the parameters extends coefficientwise to
families (functions and horizontal forms on the cylinder) and produces
objects on the base.  Integrals are computed exactly when the integrand lies
in the antiderivative-closed class, i.e. sums of terms

    p(t) * r,   p(t) * sin(a*t + b) * r,   p(t) * cos(a*t + b) * r,   p(t) * exp(a*t + b) * r

with ``p`` polynomial, ``a`` a nonzero rational and ``r``, ``b`` free of
``t``.  Anything else falls back to Gauss-Legendre quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .cylinder import NotHorizontal, horizontalize, is_horizontal, nabla, slice_form
from .exterior import DiffForm, VectorField
from .quadrature import QuadratureExpr
from .scalar import (
    Atom,
    ScalarExpr,
    ZeroTest,
    ZeroTestConfig,
    as_fraction,
    const,
    cos,
    exp,
    sin,
    symbol,
    zero_test,
)
from .spaces import CylinderSpace, SmoothMap, SpaceMismatch, compose, slicing

__all__ = [
    "PointEval",
    "Integral",
    "LiftedFunctional",
    "NotInClosedClass",
    "QuadratureFallback",
    "antiderivative",
    "integrate_symbolic",
    "lift_apply_scalar",
    "lift_apply_form",
    "newton_leibniz_scalar",
    "nl_form_identity",
]


class NotInClosedClass(ValueError):
    """The integrand has no antiderivative in the supported closed class."""


class QuadratureFallback(UserWarning):
    pass


@dataclass(frozen=True)
class PointEval:
    point: tuple[tuple[str, Fraction], ...]

    @classmethod
    def at(cls, **point) -> "PointEval":
        return cls(tuple((k, as_fraction(v)) for k, v in point.items()))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.point)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.point)


@dataclass(frozen=True)
class Integral:
    bounds: tuple[tuple[str, Fraction, Fraction], ...]

    def __post_init__(self):
        for var, a, b in self.bounds:
            if not a < b:
                raise ValueError(f"integration over {var} needs a < b, got [{a}, {b}]")

    @classmethod
    def interval(cls, var: str, a, b) -> "Integral":
        return cls(((var, as_fraction(a), as_fraction(b)),))

    @classmethod
    def box(cls, *bounds) -> "Integral":
        return cls(tuple((v, as_fraction(a), as_fraction(b)) for v, a, b in bounds))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _, _ in self.bounds)


@dataclass(frozen=True)
class LiftedFunctional:
    """``kind`` with ``method`` one of ``symbolic``, ``quadrature`` or ``auto``."""

    kind: Union[PointEval, Integral]
    method: str = "auto"
    nodes: int = 32
    adaptive: bool = False

    def __post_init__(self):
        if self.method not in ("symbolic", "quadrature", "auto"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.nodes < 1:
            raise ValueError("nodes must be positive")

    @classmethod
    def integral(cls, var: str, a, b, **kw) -> "LiftedFunctional":
        return cls(Integral.interval(var, a, b), **kw)

    @classmethod
    def point(cls, **point) -> "LiftedFunctional":
        return cls(PointEval.at(**point))

    def check_cylinder(self, cyl: CylinderSpace):
        if not isinstance(cyl, CylinderSpace):
            raise SpaceMismatch(f"{cyl.name} is not a cylinder")
        if set(self.kind.variables) != set(cyl.params.coords) or len(self.kind.variables) != len(cyl.params.coords):
            raise SpaceMismatch(
                f"functional acts on ({', '.join(self.kind.variables)}) but {cyl.name} has parameters "
                f"({', '.join(cyl.params.coords)})"
            )

    def __str__(self) -> str:
        if isinstance(self.kind, PointEval):
            return "evaluate at " + ", ".join(f"{k}={v}" for k, v in self.kind.point)
        return " ".join(f"integrate {v} from {a} to {b}" for v, a, b in self.kind.bounds)


# --------------------------------------------------------------------------
# symbolic antiderivatives


def _linear_coefficient(arg: ScalarExpr, var: str) -> Fraction | None:
    """``a`` when ``arg = a*var + b`` with rational ``a != 0`` and ``b`` free of ``var``."""
    da = arg.partial(var)
    if not da or not da.is_constant:
        return None
    return da.constant_value()


def _integrate_power_times(n: int, atom: Atom | None, alpha: Fraction | None, var: str) -> ScalarExpr:
    t = symbol(var)
    if atom is None:
        return t ** (n + 1) / (n + 1)
    u = atom.arg
    if atom.func == "exp":
        # int t^n e^u = e^u sum_k (-1)^k n!/(n-k)! t^(n-k) / alpha^(k+1)
        poly = ScalarExpr.ZERO
        falling = 1
        for k in range(n + 1):
            poly = poly + t ** (n - k) * (Fraction((-1) ** k * falling) / alpha ** (k + 1))
            falling *= n - k
        return exp(u) * poly
    s_prev = c_prev = ScalarExpr.ZERO
    for m in range(n + 1):
        tm = t**m
        s_cur = -tm * cos(u) / alpha + c_prev * Fraction(m) / alpha
        c_cur = tm * sin(u) / alpha - s_prev * Fraction(m) / alpha
        s_prev, c_prev = s_cur, c_cur
    return s_prev if atom.func == "sin" else c_prev


def _term_antiderivative(mono: tuple, coef: Fraction, var: str) -> ScalarExpr:
    n = 0
    dep: list[tuple[Atom, int]] = []
    rest: dict = {}
    for g, e in mono:
        if g == var:
            n = e
        elif isinstance(g, Atom) and var in g.arg.free_symbols:
            dep.append((g, e))
        else:
            rest[g] = e
    if not dep:
        atom, alpha = None, None
    elif len(dep) == 1 and dep[0][1] == 1:
        atom = dep[0][0]
        alpha = _linear_coefficient(atom.arg, var)
        if alpha is None:
            raise NotInClosedClass(f"argument {atom.arg} is not affine in {var} with rational slope")
    else:
        raise NotInClosedClass(f"product of transcendental factors in {var} is outside the closed class")
    remainder = ScalarExpr({tuple(rest.items()): coef})
    return _integrate_power_times(n, atom, alpha, var) * remainder


def antiderivative(f: ScalarExpr, var: str) -> ScalarExpr:
    """An antiderivative in ``var``; raises :class:`NotInClosedClass` outside the closed class."""
    out = ScalarExpr.ZERO
    for mono, coef in f.terms.items():
        out = out + _term_antiderivative(mono, coef, var)
    return out


def integrate_symbolic(f: ScalarExpr, var: str, a, b) -> ScalarExpr:
    F = antiderivative(f, var)
    return F.substitute({var: const(b)}) - F.substitute({var: const(a)})


def _split_closed(f: ScalarExpr, var: str) -> tuple[ScalarExpr, ScalarExpr]:
    """(antiderivative of the in-class terms, the out-of-class remainder)."""
    good = ScalarExpr.ZERO
    bad: dict = {}
    for mono, coef in f.terms.items():
        try:
            good = good + _term_antiderivative(mono, coef, var)
        except NotInClosedClass:
            bad[mono] = coef
    return good, ScalarExpr(bad)


# --------------------------------------------------------------------------
# applying functionals


def _apply_integral(L: LiftedFunctional, f: ScalarExpr):
    bounds = L.kind.bounds
    if L.method == "quadrature":
        return QuadratureExpr(f, bounds, L.nodes, L.adaptive) if f else ScalarExpr.ZERO
    current = f
    for i, (var, a, b) in enumerate(bounds):
        if L.method == "symbolic":
            current = integrate_symbolic(current, var, a, b)
            continue
        good, bad = _split_closed(current, var)
        if bad:
            warnings.warn(f"integrand {bad} is outside the closed class; using quadrature", QuadratureFallback, stacklevel=3)
            if i < len(bounds) - 1:
                # iterated box with a bad inner step: integrate what is left numerically
                return QuadratureExpr(current, bounds[i:], L.nodes, L.adaptive)
            exact = good.substitute({var: const(b)}) - good.substitute({var: const(a)})
            return QuadratureExpr(bad, bounds[i:], L.nodes, L.adaptive, offset=exact)
        current = good.substitute({var: const(b)}) - good.substitute({var: const(a)})
    return current


def lift_apply_scalar(L: LiftedFunctional, f, cyl: CylinderSpace):
    """Apply ``L`` to a family of functions; returns a function on the base.

    The result is a :class:`ScalarExpr` on the exact path and a
    :class:`QuadratureExpr` when quadrature is involved.
    """
    L.check_cylinder(cyl)
    if isinstance(f, DiffForm):
        if f.degree != 0:
            raise ValueError("lift_apply_scalar needs a 0-form; use lift_apply_form")
        f = f.scalar
    if isinstance(f, (int, Fraction)):
        f = const(f)
    stray = f.free_symbols - set(cyl.coords)
    if stray:
        raise SpaceMismatch(f"function uses coordinates {sorted(stray)} outside {cyl.name}")
    if isinstance(L.kind, PointEval):
        return f.substitute({k: const(v) for k, v in L.kind.point})
    return _apply_integral(L, f)


def lift_apply_form(L: LiftedFunctional, a: DiffForm) -> DiffForm:
    """Apply ``L`` coefficientwise to a horizontal form; the result lives on the base."""
    cyl = a.space
    L.check_cylinder(cyl)
    if not is_horizontal(a, "piM"):
        raise NotHorizontal(f"functionals act on horizontal forms; got {a}")
    if isinstance(L.kind, Integral) and len(cyl.params.coords) != 1:
        raise ValueError("integration of forms needs a one-dimensional parameter space")
    out = {idx: lift_apply_scalar(L, c, cyl) for idx, c in a.terms.items()}
    return DiffForm._raw(cyl.base, a.degree, out)


# --------------------------------------------------------------------------
# Newton-Leibniz identities


def _interval_var(cyl: CylinderSpace) -> str:
    if not isinstance(cyl, CylinderSpace) or len(cyl.params.coords) != 1:
        raise SpaceMismatch("an interval cylinder M x [a,b] is required")
    return cyl.params.coords[0]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of an identity check: the verdict plus the residual that was tested."""

    test: ZeroTest
    residual: object = None

    @property
    def verdict(self):
        return self.test.verdict

    @property
    def passed(self) -> bool:
        return self.test.is_zero


def newton_leibniz_scalar(F: SmoothMap, f: ScalarExpr, a, b, *, method: str = "auto", nodes: int = 32,
                          config: ZeroTestConfig | None = None) -> CheckResult:
    """``int_a^b d/dt (F* f) dt == F_b* f - F_a* f`` for a function ``f`` on the target."""
    cyl = F.source
    t = _interval_var(cyl)
    if isinstance(f, DiffForm):
        f = f.scalar
    pulled = F.pull_scalar(f)
    lhs = lift_apply_scalar(LiftedFunctional.integral(t, a, b, method=method, nodes=nodes), pulled.partial(t), cyl)
    Fb = compose(F, slicing(cyl, {t: b}))
    Fa = compose(F, slicing(cyl, {t: a}))
    rhs = Fb.pull_scalar(f) - Fa.pull_scalar(f)
    residual = lhs - rhs
    return CheckResult(zero_test([residual], config), residual)


def nl_form_identity(a: DiffForm, lo, hi, *, method: str = "auto", nodes: int = 32,
                     config: ZeroTestConfig | None = None) -> CheckResult:
    """``I_lo^hi(nabla_{d/dt} p0(a)) == iota_hi* a - iota_lo* a`` for any form on ``M x [lo, hi]``."""
    cyl = a.space
    t = _interval_var(cyl)
    ddt = VectorField(cyl.params, {t: 1})
    lhs = lift_apply_form(LiftedFunctional.integral(t, lo, hi, method=method, nodes=nodes), nabla(ddt, horizontalize(a)))
    rhs = slice_form(a, {t: hi}) - slice_form(a, {t: lo})
    residual = lhs - rhs
    return CheckResult(zero_test(residual.coefficients(), config), residual)
