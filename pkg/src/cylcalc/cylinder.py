"""Operators specific to cylinders ``M x G``.

Vocabulary: a form is *horizontal* (over ``piM``) when none of its terms
contains a parameter differential; such forms are the families of forms on
``M``.  The bidegree ``(p, q)`` of a wedge monomial counts its base and
parameter differentials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from .exterior import DiffForm, VectorField, apply_field, d, pullback
from .scalar import ScalarExpr, const, symbol
from .spaces import CylinderSpace, SmoothMap, SpaceMismatch, parameter_point, projection_G, projection_M, slicing

__all__ = [
    "BigradedForm",
    "NotHorizontal",
    "canonical_lift",
    "lift_pair",
    "bidegree",
    "bidegree_split",
    "projector",
    "horizontalize",
    "p0",
    "is_horizontal",
    "transverse_part",
    "vertical_representative",
    "horizontal_d",
    "nabla",
    "slice_form",
    "slice_field",
    "FieldSlice",
    "interpolation_nodes",
    "reconstruct_vertical_field",
]


class NotHorizontal(ValueError):
    pass


def _require_cylinder(space) -> CylinderSpace:
    if not isinstance(space, CylinderSpace):
        raise SpaceMismatch(f"{space.name} is not a cylinder")
    return space


def _factor(over, cyl: CylinderSpace) -> str:
    """Normalise a projection designator to ``"M"`` or ``"G"``."""
    if isinstance(over, SmoothMap):
        if over == projection_M(cyl):
            return "M"
        if over == projection_G(cyl):
            return "G"
        raise ValueError("only the canonical projections of the cylinder are supported")
    key = str(over).replace("pi_", "pi").replace("pi", "")
    if key in ("M", "G"):
        return key
    raise ValueError(f"unknown projection {over!r}; expected piM or piG")


# --------------------------------------------------------------------------
# lifts


def canonical_lift(X: VectorField, cyl: CylinderSpace) -> VectorField:
    """Extend a field on one factor to the cylinder, zero along the other factor."""
    if X.space != cyl.base and X.space != cyl.params:
        raise SpaceMismatch(f"field lives on {X.space.name}, which is not a factor of {cyl.name}")
    return VectorField(cyl, X.components)


def lift_pair(X: VectorField | None, Y: VectorField | None, cyl: CylinderSpace) -> VectorField:
    """The field on the cylinder related to ``X`` by ``piM`` and to ``Y`` by ``piG``."""
    if X is not None and X.space != cyl.base:
        raise SpaceMismatch("first field must live on the base")
    if Y is not None and Y.space != cyl.params:
        raise SpaceMismatch("second field must live on the parameters")
    out = VectorField.zero(cyl)
    if X is not None:
        out = out + canonical_lift(X, cyl)
    if Y is not None:
        out = out + canonical_lift(Y, cyl)
    return out


# --------------------------------------------------------------------------
# bidegree


def bidegree(idx, cyl: CylinderSpace) -> tuple[int, int]:
    p = sum(1 for c in idx if c in cyl.base_coords)
    return p, len(idx) - p


@dataclass(frozen=True)
class BigradedForm:
    cyl: CylinderSpace
    degree: int
    components: Mapping[tuple[int, int], DiffForm] = field(default_factory=dict)

    def component(self, p: int, q: int) -> DiffForm:
        if p + q != self.degree:
            raise ValueError(f"bidegree ({p},{q}) does not add up to degree {self.degree}")
        return self.components.get((p, q), DiffForm.zero(self.cyl, self.degree))

    def total(self) -> DiffForm:
        out = DiffForm.zero(self.cyl, self.degree)
        for part in self.components.values():
            out = out + part
        return out

    def __str__(self) -> str:
        if not self.components:
            return "0"
        return "; ".join(f"({p},{q}): {f}" for (p, q), f in self.components.items())


def bidegree_split(a: DiffForm) -> BigradedForm:
    cyl = _require_cylinder(a.space)
    parts: dict[tuple[int, int], dict] = {}
    for idx, coef in a.terms.items():
        parts.setdefault(bidegree(idx, cyl), {})[idx] = coef
    comps = {pq: DiffForm._raw(cyl, a.degree, terms) for pq, terms in sorted(parts.items(), reverse=True)}
    return BigradedForm(cyl, a.degree, comps)


def projector(a: DiffForm, p: int, q: int) -> DiffForm:
    """The ``(p, q)`` component of ``a`` (zero unless ``p + q`` is its degree)."""
    cyl = _require_cylinder(a.space)
    if p + q != a.degree:
        return DiffForm.zero(cyl, a.degree)
    return DiffForm._raw(cyl, a.degree, {i: c for i, c in a.terms.items() if bidegree(i, cyl) == (p, q)})


def horizontalize(a: DiffForm) -> DiffForm:
    return projector(a, a.degree, 0)


p0 = horizontalize


def transverse_part(a: DiffForm, over="piM") -> DiffForm:
    """Terms of ``a`` that carry at least one differential transverse to ``over``."""
    cyl = _require_cylinder(a.space)
    block = cyl.param_coords if _factor(over, cyl) == "M" else cyl.base_coords
    return DiffForm._raw(cyl, a.degree, {i: c for i, c in a.terms.items() if any(x in block for x in i)})


def is_horizontal(a: DiffForm, over="piM") -> bool:
    return not transverse_part(a, over)


def vertical_representative(a: DiffForm, over="piG") -> DiffForm:
    """Canonical representative of ``a`` modulo the horizontal ideal of ``over``.

    Modulo the ideal generated by parameter differentials (``over=piG``) this
    is the horizontal part ``p0(a)``; modulo base differentials it is the
    pure-parameter part.
    """
    cyl = _require_cylinder(a.space)
    if _factor(over, cyl) == "G":
        return projector(a, a.degree, 0)
    return projector(a, 0, a.degree)


def _require_horizontal(a: DiffForm, what: str):
    if not is_horizontal(a, "piM"):
        raise NotHorizontal(f"{what} needs a horizontal form; got {a}")


def horizontal_d(a: DiffForm) -> DiffForm:
    _require_cylinder(a.space)
    _require_horizontal(a, "horizontal differential")
    return horizontalize(d(a))


def nabla(X: VectorField, a: DiffForm) -> DiffForm:
    """Differentiate a family of forms coefficientwise along the lift of ``X`` (a field on G)."""
    cyl = _require_cylinder(a.space)
    if X.space == cyl:
        if any(c in cyl.base_coords for c in X.components):
            raise SpaceMismatch("nabla needs a field along the parameters")
        lifted = X
    elif X.space == cyl.params:
        lifted = canonical_lift(X, cyl)
    else:
        raise SpaceMismatch(f"field on {X.space.name} is not a parameter field of {cyl.name}")
    _require_horizontal(a, "nabla")
    return a.map_coefficients(lambda c: apply_field(lifted, c))


# --------------------------------------------------------------------------
# slicing


def slice_form(a: DiffForm, g: Mapping[str, object], strict: bool = False) -> DiffForm:
    """Pull back along the slicing map at ``g``; parameter differentials are killed."""
    cyl = _require_cylinder(a.space)
    if strict:
        _require_horizontal(a, "strict slicing")
    return pullback(slicing(cyl, g), a)


class FieldSlice(NamedTuple):
    field: VectorField
    sliceable: bool


def slice_field(Z: VectorField, g: Mapping[str, object]) -> FieldSlice:
    cyl = _require_cylinder(Z.space)
    point = {c: const(v) for c, v in parameter_point(cyl, g).items()}
    base = {c: v.substitute(point) for c, v in Z.components.items() if c in cyl.base_coords}
    sliceable = not any(c in cyl.param_coords for c in Z.components)
    return FieldSlice(VectorField(cyl.base, base), sliceable)


# --------------------------------------------------------------------------
# reconstruction of vertical fields from slices


def interpolation_nodes(cyl: CylinderSpace, degree: int, start: Fraction = Fraction(-1, 3)) -> list[dict[str, Fraction]]:
    """A unisolvent tensor grid for parameter polynomials of degree <= ``degree`` in each variable."""
    ticks = [start + Fraction(k, 2) for k in range(degree + 1)]
    names = cyl.params.coords
    return [dict(zip(names, combo)) for combo in itertools.product(ticks, repeat=len(names))]


def _lagrange(var: str, node: Fraction, ticks: list[Fraction]) -> ScalarExpr:
    out = ScalarExpr.ONE
    t = symbol(var)
    for other in ticks:
        if other != node:
            out = out * (t - other) * (1 / (node - other))
    return out


def reconstruct_vertical_field(slices: Mapping[tuple, VectorField], cyl: CylinderSpace) -> VectorField:
    """Rebuild a piG-vertical field from slices on a tensor grid.

    ``slices`` maps parameter points (tuples in parameter-coordinate order) to
    fields on the base.  The result is the unique field whose coefficients
    are polynomial in the parameters of per-variable degree below the grid
    size and whose slices match.
    """
    names = cyl.params.coords
    ticks = [sorted({pt[i] for pt in slices}) for i in range(len(names))]
    expected = 1
    for tk in ticks:
        expected *= len(tk)
    if expected != len(slices):
        raise ValueError("slice points do not form a tensor grid")
    out = VectorField.zero(cyl)
    for pt, fld in slices.items():
        if fld.space != cyl.base:
            raise SpaceMismatch("slices must be fields on the base")
        weight = ScalarExpr.ONE
        for name, value, tk in zip(names, pt, ticks):
            weight = weight * _lagrange(name, value, tk)
        out = out + VectorField(cyl, fld.components) * weight
    return out
