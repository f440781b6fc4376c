import random

import pytest

from cylcalc.generators import random_map
from cylcalc.scalar import symbols
from cylcalc.spaces import (
    CylinderSpace,
    SmoothMap,
    Space,
    SpaceMismatch,
    compose,
    identity,
    projection_G,
    projection_M,
    slicing,
)

x, y, t, s, u = symbols("x y t s u")
M = Space("M", ("x", "y"))
G = Space("G", ("t",))
C = CylinderSpace(M, G, "C")


def test_projections():
    assert projection_M(C).components == {"x": x, "y": y}
    assert projection_G(C).components == {"t": t}


def test_projection_after_slicing_is_identity():
    assert compose(projection_M(C), slicing(C, {"t": 5})) == identity(M)


def test_slicing_components():
    C1 = CylinderSpace(Space("M", ("x",)), G)
    assert slicing(C1, {"t": 1}).components == {"x": x, "t": 1}
    assert slicing(C1, {"t": 0}).components == {"x": x, "t": 0}


def test_slicing_needs_every_parameter():
    with pytest.raises(ValueError):
        slicing(C, {})


def test_slicing_then_projection_on_function():
    f = x**2
    g = compose(projection_M(C), slicing(C, {"t": 2}))
    assert g.pull_scalar(f) == x**2


def test_compose_examples():
    C1 = CylinderSpace(Space("M", ("x",)), G)
    F = SmoothMap(C1, Space("N", ("u",)), {"u": t * x})
    assert compose(F, slicing(C1, {"t": 1})).components == {"u": x}
    assert compose(F, slicing(C1, {"t": 0})).components == {"u": 0}
    assert compose(identity(F.target), F) == F


def test_compose_chart_mismatch():
    with pytest.raises(SpaceMismatch):
        compose(projection_M(C), projection_M(C))


def test_space_invariants():
    with pytest.raises(ValueError):
        Space("M", ())
    with pytest.raises(ValueError):
        Space("M", ("x", "x"))
    with pytest.raises(ValueError):
        CylinderSpace(M, Space("G", ("x",)))


def test_cylinder_coordinate_order():
    cyl = CylinderSpace(M, Space("G", ("t", "s")))
    assert cyl.coords == ("x", "y", "t", "s")
    assert cyl.base_coords == {"x", "y"} and cyl.param_coords == {"t", "s"}


def test_map_components_must_cover_target_and_use_source_coords():
    with pytest.raises(ValueError):
        SmoothMap(M, Space("N", ("u", "v")), {"u": x})
    with pytest.raises(ValueError):
        SmoothMap(M, Space("N", ("u",)), {"u": t})


@pytest.mark.parametrize("seed", range(20))
def test_compose_associative(seed):
    rng = random.Random(seed)
    A, B, Cs, D = (Space(n, c) for n, c in (("A", ("x", "y")), ("B", ("u", "v")), ("P", ("p",)), ("Q", ("q", "w"))))
    f = random_map(rng, A, B)
    g = random_map(rng, B, Cs)
    h = random_map(rng, Cs, D)
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)
