import math
import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import fd5, simpson
from cylcalc.cylinder import NotHorizontal, canonical_lift, horizontal_d, slice_form
from cylcalc.exterior import DiffForm, d, pullback, wedge
from cylcalc.generators import random_field, random_form, random_horizontal_form, random_polynomial
from cylcalc.integration import (
    Integral,
    LiftedFunctional,
    NotInClosedClass,
    QuadratureFallback,
    antiderivative,
    integrate_symbolic,
    lift_apply_form,
    lift_apply_scalar,
    newton_leibniz_scalar,
    nl_form_identity,
)
from cylcalc.quadrature import QuadratureExpr
from cylcalc.scalar import ScalarExpr, Verdict, cos, exp, sin, symbols, zero_test
from cylcalc.spaces import CylinderSpace, SmoothMap, Space, SpaceMismatch, identity, projection_M

x, y, t, s, u = symbols("x y t s u")
M = Space("M", ("x", "y"))
C = CylinderSpace(M, Space("G", ("t",)), "C")
C1 = CylinderSpace(Space("M", ("x",)), Space("G", ("t",)), "C")
I01 = LiftedFunctional.integral("t", 0, 1)
dx, dy, dt = (DiffForm.basis(C, c) for c in ("x", "y", "t"))


def proven(obj) -> bool:
    coefs = obj.coefficients() if hasattr(obj, "coefficients") else [obj]
    return zero_test(coefs).verdict is Verdict.PROVEN_ZERO


def seeds():
    return st.integers(0, 2**32 - 1).map(random.Random)


# ---- examples


def test_lift_apply_scalar_examples():
    assert lift_apply_scalar(I01, x * t**2, C) == x / 3
    assert lift_apply_scalar(LiftedFunctional.point(t=0), x + t, C) == x
    assert lift_apply_scalar(I01, exp(t), C) == exp(ScalarExpr.ONE) - 1


def test_lift_apply_form_examples():
    assert lift_apply_form(I01, t * dx) == Fraction(1, 2) * DiffForm.basis(M, "x")
    assert lift_apply_form(I01, x * DiffForm.basis(C, "x", "y")) == x * DiffForm.basis(M, "x", "y")
    assert lift_apply_form(LiftedFunctional.point(t=1), t**2 * dx) == DiffForm.basis(M, "x")


def test_lift_apply_form_needs_horizontal_input():
    with pytest.raises(NotHorizontal):
        lift_apply_form(I01, dt)


def test_functional_validation():
    with pytest.raises(ValueError):
        LiftedFunctional.integral("t", 1, 0)
    with pytest.raises(ValueError):
        LiftedFunctional(Integral.interval("t", 0, 1), method="simpson")
    with pytest.raises(SpaceMismatch):
        lift_apply_scalar(LiftedFunctional.integral("s", 0, 1), x, C)


def test_newton_leibniz_examples():
    N = Space("N", ("u",))
    F = SmoothMap(C1, N, {"u": x + t})
    assert newton_leibniz_scalar(F, u**2, -1, 2).verdict is Verdict.PROVEN_ZERO
    F = SmoothMap(C1, N, {"u": x})
    assert newton_leibniz_scalar(F, u**3 + sin(u), 0, 1).verdict is Verdict.PROVEN_ZERO
    result = newton_leibniz_scalar(identity(C1), x * t, 0, 1)
    assert result.verdict is Verdict.PROVEN_ZERO


def test_nl_form_examples():
    assert nl_form_identity(x * t * dx, 0, 1).verdict is Verdict.PROVEN_ZERO
    rho = DiffForm.basis(C, "x")
    assert nl_form_identity(wedge(y * rho, dt), 0, 1).verdict is Verdict.PROVEN_ZERO
    assert nl_form_identity(dx, Fraction(-1, 2), 3).verdict is Verdict.PROVEN_ZERO


# ---- symbolic antiderivatives against an independent quadrature


CLOSED_CLASS = [
    t**3 * x - 2 * t,
    t * sin(2 * t + 1),
    t**2 * cos(-t + x),
    (t + x) * exp(3 * t / 2),
    x * y * t**4 * exp(-t) * 1,
]


@pytest.mark.parametrize("f", CLOSED_CLASS, ids=str)
def test_antiderivative_differentiates_back(f):
    assert antiderivative(f, "t").partial("t") == f


@pytest.mark.parametrize("f", CLOSED_CLASS, ids=str)
def test_symbolic_integral_matches_simpson(f):
    a, b = Fraction(-1, 2), Fraction(3, 2)
    exact = integrate_symbolic(f, "t", a, b)
    p = {"x": 0.7, "y": -0.4}
    ref = simpson(lambda v: f.eval(dict(p, t=v)), float(a), float(b), n=4000)
    assert abs(exact.eval(p) - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("f", CLOSED_CLASS, ids=str)
def test_quadrature_agrees_with_symbolic_path(f):
    symbolic = lift_apply_scalar(I01, f, C)
    quad = lift_apply_scalar(LiftedFunctional.integral("t", 0, 1, method="quadrature"), f, C)
    assert isinstance(quad, QuadratureExpr)
    rng = random.Random(0)
    for _ in range(10):
        p = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2)}
        assert abs(quad.eval(p) - symbolic.eval(p)) <= 1e-10 * max(1.0, abs(symbolic.eval(p)))


def test_gauss_legendre_is_exact_on_polynomials_of_degree_below_2n():
    quad = LiftedFunctional.integral("t", 0, 1, method="quadrature", nodes=4)
    q = lift_apply_scalar(quad, t**7, C)
    assert abs(q.eval({"x": 0.0, "y": 0.0}) - 1 / 8) < 1e-14


def test_fallback_outside_closed_class_warns_and_matches_simpson():
    f = x * exp(t**2)
    with pytest.warns(QuadratureFallback):
        q = lift_apply_scalar(I01, f, C)
    ref = simpson(lambda v: 1.3 * math.exp(v * v), 0.0, 1.0, n=4000)
    assert abs(q.eval({"x": 1.3, "y": 0.0}) - ref) < 1e-10
    with pytest.raises(NotInClosedClass):
        lift_apply_scalar(LiftedFunctional.integral("t", 0, 1, method="symbolic"), f, C)


def test_adaptive_quadrature_handles_sharp_integrand():
    f = exp(-40 * t**2) * x
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureFallback)
        q = lift_apply_scalar(LiftedFunctional.integral("t", -2, 2, nodes=8, adaptive=True), f, C)
    ref = math.sqrt(math.pi / 40) * math.erf(2 * math.sqrt(40))
    assert abs(q.eval({"x": 1.0, "y": 0.0}) - ref) < 1e-11


def test_quadrature_partial_matches_finite_difference():
    f = sin(x * t**2) + y * exp(t**2 * x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureFallback)
        q = lift_apply_scalar(LiftedFunctional.integral("t", 0, 1, nodes=48), f, C)
    p = {"x": 0.3, "y": -0.8}
    exact = q.partial("x").eval(p)
    fd = fd5(lambda v: q.eval(dict(p, x=v)), p["x"], 1e-3)
    assert abs(exact - fd) < 1e-9


def test_box_integral_of_function_over_two_parameters():
    cyl = CylinderSpace(M, Space("G", ("t", "s")), "C")
    L = LiftedFunctional(Integral.box(("t", 0, 1), ("s", 0, 2)))
    assert lift_apply_scalar(L, x * t * s, cyl) == x
    with pytest.raises(ValueError):
        lift_apply_form(L, DiffForm.basis(cyl, "x"))


# ---- properties


@given(seeds())
def test_commutes_with_lifted_base_fields(rng):
    f = random_polynomial(rng, C.coords, 3, 4)
    X = random_field(rng, M, 2)
    assert proven(X(lift_apply_scalar(I01, f, C)) - lift_apply_scalar(I01, canonical_lift(X, C)(f), C))


@given(seeds())
def test_cochain_map_on_polynomial_forms(rng):
    w = random_horizontal_form(rng, C, rng.randint(0, 1), max_degree=3)
    a = Fraction(rng.randint(-3, 0))
    L = LiftedFunctional.integral("t", a, a + 2)
    assert proven(d(lift_apply_form(L, w)) - lift_apply_form(L, horizontal_d(w)))


@given(seeds())
def test_lambda_m_linearity(rng):
    w = random_horizontal_form(rng, C, rng.randint(0, 1), max_degree=3)
    eta = random_form(rng, M, rng.randint(0, 2 - w.degree))
    lhs = lift_apply_form(I01, wedge(w, pullback(projection_M(C), eta)))
    assert proven(lhs - wedge(lift_apply_form(I01, w), eta))


@given(seeds())
def test_newton_leibniz_for_random_forms(rng):
    w = random_form(rng, C, rng.randint(0, 3), max_degree=3)
    assert nl_form_identity(w, Fraction(-1, 3), 2).verdict is Verdict.PROVEN_ZERO


def test_point_evaluation_is_slicing():
    w = (x * t**3 - y) * dx + t * dy
    assert lift_apply_form(LiftedFunctional.point(t=Fraction(2, 3)), w) == slice_form(w, {"t": Fraction(2, 3)})
