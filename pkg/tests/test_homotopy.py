import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cylcalc.cylinder import canonical_lift, horizontalize, nabla
from cylcalc.exterior import DegreeError, DiffForm, VectorField, d, lie, pullback
from cylcalc.generators import random_form, random_map
from cylcalc.homotopy import (
    Homotopy,
    contract_along,
    flow_check,
    homotopy_operator,
    interior_relative,
    lifted_flow,
    linear_contraction,
    map_family_derivative,
    scaling_flow,
    straight_line_homotopy,
    translation_flow,
    universal_nl_check,
    verify_homotopy_formula,
)
from cylcalc.integration import QuadratureFallback
from cylcalc.scalar import Verdict, ZeroTestConfig, cos, exp, sin, symbols, zero_test
from cylcalc.spaces import CylinderSpace, SmoothMap, Space, SpaceMismatch

x, y, t, u, v = symbols("x y t u v")
H1, H2, H3 = (linear_contraction(n) for n in (1, 2, 3))
ddt = VectorField(H2.cyl.params, {"t": 1})


def proven(obj) -> bool:
    return zero_test(obj.coefficients()).verdict is Verdict.PROVEN_ZERO


def seeds():
    return st.integers(0, 2**32 - 1).map(random.Random)


def constant_homotopy():
    M, N = Space("M", ("x",)), Space("N", ("u",))
    cyl = CylinderSpace(M, Space("I", ("t",)), "C")
    return Homotopy(SmoothMap(cyl, N, {"u": x}))


# ---- examples


def test_homotopy_operator_golden_anchor():
    area = DiffForm.basis(H2.target, "u", "v")
    h = homotopy_operator(H2, area)
    assert h == DiffForm(H2.base, 1, {("x",): -y / 2, ("y",): x / 2})
    assert d(h) == DiffForm.basis(H2.base, "x", "y")
    assert not d(area)


def test_homotopy_operator_examples():
    assert homotopy_operator(H1, DiffForm.basis(H1.target, "u")).scalar == x
    K = constant_homotopy()
    assert not homotopy_operator(K, u**2 * DiffForm.basis(K.target, "u"))
    with pytest.raises(DegreeError):
        homotopy_operator(H1, DiffForm.function(H1.target, u))


def test_interior_relative_examples():
    V = map_family_derivative(H2, ddt)
    area = DiffForm.basis(H2.target, "u", "v")
    expected = DiffForm(H2.cyl, 1, {("x",): -t * y, ("y",): t * x})
    assert interior_relative(V, area) == expected
    assert contract_along(V, area) == expected
    with pytest.raises(DegreeError):
        contract_along(V, DiffForm.function(H2.target, u))
    K = constant_homotopy()
    VK = map_family_derivative(K, VectorField(K.cyl.params, {"t": 1}))
    assert not interior_relative(VK, DiffForm.basis(K.target, "u"))


def test_map_family_derivative_examples():
    T = VectorField(H1.cyl.params, {"t": 1})
    assert map_family_derivative(H1, T).components == {"u": x}
    assert not any(map_family_derivative(constant_homotopy(), T).components.values())
    F = SmoothMap(H1.cyl, H1.target, {"u": x + t})
    assert map_family_derivative(F, T).components == {"u": 1}


def test_map_family_derivative_needs_parameter_field():
    with pytest.raises(SpaceMismatch):
        map_family_derivative(H1, VectorField(H1.base, {"x": 1}))


def test_verify_homotopy_formula_examples():
    assert verify_homotopy_formula(H2, DiffForm.basis(H2.target, "u", "v")).verdict is Verdict.PROVEN_ZERO
    assert verify_homotopy_formula(H1, DiffForm.basis(H1.target, "u")).verdict is Verdict.PROVEN_ZERO
    K = constant_homotopy()
    result = verify_homotopy_formula(K, DiffForm.basis(K.target, "u"))
    assert result.verdict is Verdict.PROVEN_ZERO and not result.residual


def test_universal_nl_examples():
    assert universal_nl_check(H1, DiffForm.function(H1.target, u**2)).verdict is Verdict.PROVEN_ZERO
    assert universal_nl_check(H2, DiffForm.basis(H2.target, "u", "v")).verdict is Verdict.PROVEN_ZERO
    K = constant_homotopy()
    assert universal_nl_check(K, DiffForm.function(K.target, u)).verdict is Verdict.PROVEN_ZERO


def test_homotopy_validation():
    with pytest.raises(ValueError):
        Homotopy(H1.map, 1, 0)
    with pytest.raises(SpaceMismatch):
        Homotopy(SmoothMap(H1.base, H1.target, {"u": x}))


def test_flow_check_examples():
    M = Space("M", ("x",))
    A, X = translation_flow(M, {"x": 1})
    r = flow_check(A, X)
    assert r.derivation.verdict is Verdict.PROVEN_ZERO and r.initial.verdict is Verdict.PROVEN_ZERO
    A, X = scaling_flow(M)
    r = flow_check(A, X)
    assert r.passed and r.initial.verdict is Verdict.PROVEN_ZERO
    A, X = translation_flow(M, {})
    assert flow_check(A, X).passed and not X


def test_lifted_flow_is_the_flow_of_the_lift():
    M = Space("M", ("x",))
    A, X = scaling_flow(M)
    product = CylinderSpace(M, Space("N", ("y",)), "P")
    lifted = lifted_flow(A, product)
    assert lifted.components["y"] == y
    assert flow_check(lifted, canonical_lift(X, product)).passed


def test_wrong_generator_fails_flow_check():
    M = Space("M", ("x", "y"))
    A, _ = translation_flow(M, {"x": 1})
    assert not flow_check(A, VectorField(M, {"y": 1})).passed


def test_rotation_homotopy_numerically():
    M, N = Space("M", ("x", "y")), Space("N", ("u", "v"))
    cyl = CylinderSpace(M, Space("I", ("t",)), "C")
    F = SmoothMap(cyl, N, {"u": x * cos(t) - y * sin(t), "v": x * sin(t) + y * cos(t)})
    H = Homotopy(F, 0, 1)
    cfg = ZeroTestConfig(tol=1e-8, seed=3)
    for w in (u * DiffForm.basis(N, "v"), (u**2 + v) * DiffForm.basis(N, "u"), DiffForm.basis(N, "u", "v")):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QuadratureFallback)
            r = verify_homotopy_formula(H, w, method="quadrature", config=cfg)
        assert r.verdict in (Verdict.NUMERICALLY_ZERO, Verdict.PROVEN_ZERO)


# ---- invariants


@given(seeds())
def test_homotopy_operator_degree_contract(rng):
    H = rng.choice((H1, H2, H3))
    N = H.target
    k = rng.randint(1, N.dim)
    a, b = random_form(rng, N, k), random_form(rng, N, k)
    ha = homotopy_operator(H, a)
    assert ha.degree == k - 1 and ha.space == H.base
    assert homotopy_operator(H, a + b) == ha + homotopy_operator(H, b)
    q = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    assert homotopy_operator(H, q * a) == q * ha


@pytest.mark.parametrize("n", (1, 2, 3))
def test_poincare_consistency_for_closed_forms(n):
    H = linear_contraction(n)
    rng = random.Random(n)
    for _ in range(10):
        k = rng.randint(1, n)
        w = d(random_form(rng, H.target, k - 1, max_degree=3))
        if not w:
            continue
        start = pullback(H.start(), w)
        assert proven(d(homotopy_operator(H, w)) - pullback(H.end(), w) + start)
        assert not start


def _battery(rng):
    yield from (H1, H2, H3)
    for _ in range(5):
        M = Space("M", ("x", "y")[: rng.randint(1, 2)])
        N = Space("N", ("u", "v")[: rng.randint(1, 2)])
        yield straight_line_homotopy(random_map(rng, M, N), random_map(rng, M, N))


def test_p0_lie_equals_nabla_p0_on_battery_pullbacks():
    rng = random.Random(11)
    for H in _battery(rng):
        T = VectorField(H.cyl.params, {"t": 1})
        for _ in range(5):
            w = random_form(rng, H.target, rng.randint(0, H.target.dim))
            F_w = pullback(H.map, w)
            assert horizontalize(lie(canonical_lift(T, H.cyl), F_w)) == nabla(T, horizontalize(F_w))


@given(seeds())
def test_homotopy_formula_on_random_straight_lines(rng):
    M = Space("M", ("x", "y", "z")[: rng.randint(1, 3)])
    N = Space("N", ("u", "v", "p")[: rng.randint(1, 3)])
    H = straight_line_homotopy(random_map(rng, M, N), random_map(rng, M, N))
    w = random_form(rng, N, rng.randint(0, N.dim), max_degree=2)
    assert verify_homotopy_formula(H, w).verdict is Verdict.PROVEN_ZERO
    assert universal_nl_check(H, w).verdict is Verdict.PROVEN_ZERO


def test_homotopy_on_shifted_interval():
    M, N = Space("M", ("x",)), Space("N", ("u", "v"))
    cyl = CylinderSpace(M, Space("I", ("t",)), "C")
    H = Homotopy(SmoothMap(cyl, N, {"u": x * t**2, "v": exp(t) * x}), Fraction(-1), Fraction(2))
    w = u * v * DiffForm.basis(N, "v")
    assert verify_homotopy_formula(H, w).verdict is Verdict.PROVEN_ZERO
