"""Differential forms and vector fields in global coordinates.

A :class:`DiffForm` is homogeneous: a map from strictly increasing
coordinate multi-indices (in the space's coordinate order) to coefficients.
Inhomogeneous forms are plain lists of homogeneous pieces.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .scalar import ScalarExpr, ZeroTest, ZeroTestConfig, const, zero_test
from .spaces import AnySpace, SmoothMap, SpaceMismatch

__all__ = [
    "DiffForm",
    "VectorField",
    "DegreeError",
    "wedge",
    "d",
    "interior",
    "lie",
    "pullback",
    "apply_field",
    "coordinate_field",
    "is_vertical_over",
    "form_zero_test",
]


class DegreeError(ValueError):
    pass


def _scalar(value):
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return const(value)
    return value


def _sort_with_sign(index: Sequence[str], pos: Mapping[str, int]) -> tuple[tuple[str, ...] | None, int]:
    """Sort ``index`` into coordinate order; returns (sorted, sign) or (None, 0) on repeats."""
    keys = [pos[c] for c in index]
    if len(set(keys)) != len(keys):
        return None, 0
    sign = 1
    keys = list(keys)
    # insertion sort, counting transpositions
    for i in range(1, len(keys)):
        j = i
        while j > 0 and keys[j - 1] > keys[j]:
            keys[j - 1], keys[j] = keys[j], keys[j - 1]
            sign = -sign
            j -= 1
    order = {pos[c]: c for c in index}
    return tuple(order[k] for k in keys), sign


class DiffForm:
    """Homogeneous differential form of a fixed degree on ``space``."""

    __slots__ = ("space", "degree", "terms")

    def __init__(self, space: AnySpace, degree: int, terms: Mapping[Sequence[str], object] | None = None):
        if degree < 0:
            raise DegreeError("negative degree")
        pos = space.position
        clean: dict[tuple[str, ...], object] = {}
        for idx, coef in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise DegreeError(f"index {idx} does not have length {degree}")
            for c in idx:
                if c not in pos:
                    raise SpaceMismatch(f"d{c} is not a coordinate differential on {space.name}")
            key, sign = _sort_with_sign(idx, pos)
            if key is None:
                continue
            coef = _scalar(coef)
            if sign < 0:
                coef = -coef
            if key in clean:
                coef = clean[key] + coef
            clean[key] = coef
        self.space = space
        self.degree = degree
        self.terms = {k: v for k, v in sorted(clean.items(), key=lambda kv: [pos[c] for c in kv[0]]) if v}

    @classmethod
    def _raw(cls, space, degree, terms) -> "DiffForm":
        # terms already keyed by sorted indices; zeros dropped here
        out = object.__new__(cls)
        pos = space.position
        out.space = space
        out.degree = degree
        out.terms = {k: v for k, v in sorted(terms.items(), key=lambda kv: [pos[c] for c in kv[0]]) if v}
        return out

    @classmethod
    def zero(cls, space: AnySpace, degree: int) -> "DiffForm":
        return cls(space, degree, {})

    @classmethod
    def function(cls, space: AnySpace, f) -> "DiffForm":
        return cls(space, 0, {(): f})

    @classmethod
    def basis(cls, space: AnySpace, *coords: str) -> "DiffForm":
        return cls(space, len(coords), {tuple(coords): 1})

    # ---- structure

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.space == other.space and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, self.degree, frozenset(self.terms.items())))

    def coefficient(self, *coords: str):
        key, sign = _sort_with_sign(coords, self.space.position)
        if key is None:
            return ScalarExpr.ZERO
        c = self.terms.get(key, ScalarExpr.ZERO)
        return c if sign > 0 else -c

    def coefficients(self) -> list:
        return list(self.terms.values())

    @property
    def scalar(self) -> ScalarExpr:
        """The coefficient of a 0-form."""
        if self.degree != 0:
            raise DegreeError("not a 0-form")
        return self.terms.get((), ScalarExpr.ZERO)

    @property
    def free_symbols(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.terms.values():
            out |= c.free_symbols
        return frozenset(out)

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(c, ScalarExpr) and c.is_polynomial for c in self.terms.values())

    def map_coefficients(self, fn) -> "DiffForm":
        return DiffForm._raw(self.space, self.degree, {k: fn(v) for k, v in self.terms.items()})

    def eval(self, point: Mapping[str, float]) -> dict[tuple[str, ...], float]:
        return {k: v.eval(point) for k, v in self.terms.items()}

    # ---- arithmetic

    def _check_compatible(self, other: "DiffForm"):
        if not isinstance(other, DiffForm):
            raise TypeError(f"expected a DiffForm, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatch(f"forms live on different spaces ({self.space.name} vs {other.space.name})")
        if other.degree != self.degree:
            raise DegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")

    def __add__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._check_compatible(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return DiffForm._raw(self.space, self.degree, out)

    def __neg__(self) -> "DiffForm":
        return DiffForm._raw(self.space, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DiffForm):
            if other.degree == 0:
                other = other.scalar
            elif self.degree == 0:
                return other * self.scalar
            else:
                raise DegreeError("use wedge (^) to multiply forms of positive degree")
        other = _scalar(other)
        if not isinstance(other, ScalarExpr) and not hasattr(other, "eval"):
            return NotImplemented
        return DiffForm._raw(self.space, self.degree, {k: v * other for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        other = _scalar(other)
        if isinstance(other, DiffForm):
            other = other.scalar
        return DiffForm._raw(self.space, self.degree, {k: v / other for k, v in self.terms.items()})

    def __xor__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return wedge(self, other)

    # ---- printing

    def __str__(self) -> str:
        return format_form(self)

    def __repr__(self) -> str:
        return f"DiffForm[{self.degree}]({format_form(self)!r} on {self.space.name})"


def format_basis(idx: Sequence[str]) -> str:
    return "^".join(f"d{c}" for c in idx)


def _format_coef(c) -> tuple[str, bool]:
    """Render a coefficient; returns (text, is_atomic_for_product)."""
    s = str(c)
    if isinstance(c, ScalarExpr) and len(c) == 1:
        return s, True
    return s, False


def format_form(form: DiffForm) -> str:
    if not form.terms:
        return "0"
    parts = []
    for idx, c in form.terms.items():
        if not idx:
            # a homogeneous 0-form has a single term
            return str(c)
        basis = format_basis(idx)
        if isinstance(c, ScalarExpr) and c == 1:
            parts.append(basis)
        elif isinstance(c, ScalarExpr) and c == -1:
            parts.append(f"-{basis}")
        else:
            text, atomic = _format_coef(c)
            parts.append(f"{text}*{basis}" if atomic else f"({text})*{basis}")
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") and not p.startswith("-(") else f" + {p}"
    return out


# --------------------------------------------------------------------------
# vector fields


class VectorField:
    """Vector field ``sum_c X^c d/dc`` on ``space``; missing components are zero."""

    __slots__ = ("space", "components")

    def __init__(self, space: AnySpace, components: Mapping[str, object] | None = None):
        comps = {}
        for c, v in (components or {}).items():
            if c not in space.position:
                raise SpaceMismatch(f"d/d{c} is not a coordinate field on {space.name}")
            v = _scalar(v)
            if v:
                comps[c] = v
        self.space = space
        self.components = {c: comps[c] for c in space.coords if c in comps}

    @classmethod
    def zero(cls, space: AnySpace) -> "VectorField":
        return cls(space, {})

    def component(self, c: str) -> ScalarExpr:
        return self.components.get(c, ScalarExpr.ZERO)

    def coefficients(self) -> list:
        return list(self.components.values())

    def __bool__(self) -> bool:
        return bool(self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.space == other.space and self.components == other.components

    def __hash__(self):
        return hash((self.space, frozenset(self.components.items())))

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        if other.space != self.space:
            raise SpaceMismatch("fields live on different spaces")
        out = dict(self.components)
        for c, v in other.components.items():
            out[c] = out[c] + v if c in out else v
        return VectorField(self.space, out)

    def __neg__(self):
        return VectorField(self.space, {c: -v for c, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, DiffForm):
            f = f.scalar
        f = _scalar(f)
        if not isinstance(f, ScalarExpr):
            return NotImplemented
        return VectorField(self.space, {c: v * f for c, v in self.components.items()})

    __rmul__ = __mul__

    def __call__(self, f):
        return apply_field(self, f)

    def substitute(self, bindings) -> "VectorField":
        return VectorField(self.space, {c: v.substitute(bindings) for c, v in self.components.items()})

    def __str__(self) -> str:
        if not self.components:
            return "0"
        parts = []
        for c, v in self.components.items():
            if v == 1:
                parts.append(f"d/d{c}")
            elif v == -1:
                parts.append(f"-d/d{c}")
            elif len(v) == 1:
                parts.append(f"{v}*d/d{c}")
            else:
                parts.append(f"({v})*d/d{c}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") and not p.startswith("-(") else f" + {p}"
        return out

    def __repr__(self):
        return f"VectorField({str(self)!r} on {self.space.name})"


def coordinate_field(space: AnySpace, c: str) -> VectorField:
    return VectorField(space, {c: 1})


# --------------------------------------------------------------------------
# operations


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.space != b.space:
        raise SpaceMismatch(f"cannot wedge forms on {a.space.name} and {b.space.name}")
    pos = a.space.position
    out: dict = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            key, sign = _sort_with_sign(ia + ib, pos)
            if key is None:
                continue
            c = ca * cb
            if sign < 0:
                c = -c
            out[key] = out[key] + c if key in out else c
    return DiffForm._raw(a.space, a.degree + b.degree, out)


def _insert(idx: tuple[str, ...], c: str, pos: Mapping[str, int]) -> tuple[tuple[str, ...] | None, int]:
    """``dc ^ dx_idx`` as (sorted index, sign)."""
    if c in idx:
        return None, 0
    p = pos[c]
    before = sum(1 for x in idx if pos[x] < p)
    key = idx[:before] + (c,) + idx[before:]
    return key, -1 if before % 2 else 1


def d(a: DiffForm) -> DiffForm:
    """Exterior derivative."""
    space = a.space
    pos = space.position
    out: dict = {}
    for idx, coef in a.terms.items():
        for c in sorted(coef.free_symbols & set(pos), key=pos.__getitem__):
            key, sign = _insert(idx, c, pos)
            if key is None:
                continue
            dc = coef.partial(c)
            if not dc:
                continue
            if sign < 0:
                dc = -dc
            out[key] = out[key] + dc if key in out else dc
    return DiffForm._raw(space, a.degree + 1, out)


def interior(X: VectorField, a: DiffForm) -> DiffForm:
    """Contraction ``i_X a`` with the usual alternating signs."""
    if X.space != a.space:
        raise SpaceMismatch(f"field on {X.space.name} cannot contract a form on {a.space.name}")
    if a.degree == 0:
        raise DegreeError("interior product needs a form of degree >= 1")
    out: dict = {}
    for idx, coef in a.terms.items():
        for j, c in enumerate(idx):
            xc = X.components.get(c)
            if xc is None:
                continue
            key = idx[:j] + idx[j + 1:]
            term = coef * xc
            if j % 2:
                term = -term
            out[key] = out[key] + term if key in out else term
    return DiffForm._raw(a.space, a.degree - 1, out)


def apply_field(X: VectorField, f):
    """``X(f) = sum_c X^c df/dc`` on a 0-form or a bare scalar expression."""
    if isinstance(f, DiffForm):
        if f.space != X.space:
            raise SpaceMismatch(f"field on {X.space.name} cannot act on a function on {f.space.name}")
        if f.degree != 0:
            raise DegreeError("vector fields act on 0-forms")
        return DiffForm.function(f.space, apply_field(X, f.scalar))
    f = _scalar(f)
    out = ScalarExpr.ZERO
    for c, xc in X.components.items():
        out = out + xc * f.partial(c)
    return out


def lie(X: VectorField, a: DiffForm) -> DiffForm:
    """Lie derivative by Cartan's formula ``i_X d + d i_X``."""
    if X.space != a.space:
        raise SpaceMismatch(f"field on {X.space.name} cannot differentiate a form on {a.space.name}")
    out = interior(X, d(a))
    if a.degree > 0:
        out = out + d(interior(X, a))
    return out


def pullback(F: SmoothMap, a: DiffForm) -> DiffForm:
    if a.space != F.target:
        raise SpaceMismatch(f"form lives on {a.space.name}, map targets {F.target.name}")
    source = F.source
    dF = {c: d(DiffForm.function(source, F.components[c])) for c in F.target.coords}
    cache: dict[tuple[str, ...], DiffForm] = {(): DiffForm.function(source, 1)}

    def basis_image(idx: tuple[str, ...]) -> DiffForm:
        hit = cache.get(idx)
        if hit is None:
            hit = wedge(basis_image(idx[:-1]), dF[idx[-1]])
            cache[idx] = hit
        return hit

    out = DiffForm.zero(source, a.degree)
    for idx, coef in a.terms.items():
        img = basis_image(idx)
        if img:
            out = out + img * F.pull_scalar(coef)
    return out


def is_vertical_over(X: VectorField, F: SmoothMap) -> bool:
    """``X`` is F-vertical iff it annihilates every pulled-back coordinate of the target."""
    if X.space != F.source:
        raise SpaceMismatch("field and map live on different spaces")
    return all(not apply_field(X, e) for e in F.components.values())


def form_zero_test(obj, config: ZeroTestConfig | None = None) -> ZeroTest:
    """Zero test for a form, a field, or a list of forms."""
    if isinstance(obj, (list, tuple)):
        coefs: list = []
        for piece in obj:
            coefs.extend(piece.coefficients())
        return zero_test(coefs, config)
    if isinstance(obj, ScalarExpr):
        return zero_test([obj], config)
    return zero_test(obj.coefficients(), config)
