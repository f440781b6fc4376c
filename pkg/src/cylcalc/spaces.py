"""Coordinate spaces, cylinders and smooth maps given in coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Union

from .scalar import ScalarExpr, as_fraction, const, symbol

__all__ = [
    "Space",
    "CylinderSpace",
    "AnySpace",
    "SmoothMap",
    "SpaceMismatch",
    "identity",
    "projection_M",
    "projection_G",
    "slicing",
    "compose",
]


class SpaceMismatch(ValueError):
    pass


class _Coords:
    """Shared coordinate helpers for spaces and cylinders."""

    coords: tuple[str, ...]

    @cached_property
    def position(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.coords)}

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __contains__(self, coord: str) -> bool:
        return coord in self.position


@dataclass(frozen=True, eq=True)
class Space(_Coords):
    name: str
    coords: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError(f"space {self.name} needs at least one coordinate")
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"space {self.name} has duplicate coordinates")

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.coords)})"


@dataclass(frozen=True, eq=True)
class CylinderSpace(_Coords):
    """Product ``base x params`` with base coordinates ordered first."""

    base: "AnySpace"
    params: "AnySpace"
    name: str = ""

    def __post_init__(self):
        clash = set(self.base.coords) & set(self.params.coords)
        if clash:
            raise ValueError(f"cylinder factors share coordinates {sorted(clash)}")
        if not self.name:
            object.__setattr__(self, "name", f"{self.base.name}*{self.params.name}")

    @cached_property
    def coords(self) -> tuple[str, ...]:
        return tuple(self.base.coords) + tuple(self.params.coords)

    @cached_property
    def base_coords(self) -> frozenset[str]:
        return frozenset(self.base.coords)

    @cached_property
    def param_coords(self) -> frozenset[str]:
        return frozenset(self.params.coords)

    def __str__(self) -> str:
        return f"{self.name} = {self.base.name} x {self.params.name}"


AnySpace = Union[Space, CylinderSpace]


@dataclass(frozen=True)
class SmoothMap:
    """A map given by one expression per target coordinate."""

    source: AnySpace
    target: AnySpace
    components: Mapping[str, ScalarExpr] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        comps = {}
        for c, e in dict(self.components).items():
            if not isinstance(e, ScalarExpr):
                e = const(as_fraction(e))
            comps[c] = e
        if set(comps) != set(self.target.coords):
            missing = set(self.target.coords) - set(comps)
            extra = set(comps) - set(self.target.coords)
            raise SpaceMismatch(f"map components must match target coordinates (missing {sorted(missing)}, extra {sorted(extra)})")
        src = set(self.source.coords)
        for c, e in comps.items():
            stray = e.free_symbols - src
            if stray:
                raise SpaceMismatch(f"component {c} uses non-source coordinates {sorted(stray)}")
        object.__setattr__(self, "components", {c: comps[c] for c in self.target.coords})

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.components.items())))

    def __eq__(self, other):
        if not isinstance(other, SmoothMap):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.components == other.components

    def pull_scalar(self, f: ScalarExpr) -> ScalarExpr:
        """``f o F`` for a function ``f`` on the target."""
        return f.substitute(self.components)

    def __str__(self) -> str:
        body = ", ".join(f"{c} = {e}" for c, e in self.components.items())
        return f"{self.source.name} -> {self.target.name} {{ {body} }}"


def identity(space: AnySpace) -> SmoothMap:
    return SmoothMap(space, space, {c: symbol(c) for c in space.coords}, name=f"id_{space.name}")


def projection_M(cyl: CylinderSpace) -> SmoothMap:
    return SmoothMap(cyl, cyl.base, {c: symbol(c) for c in cyl.base.coords}, name="piM")


def projection_G(cyl: CylinderSpace) -> SmoothMap:
    return SmoothMap(cyl, cyl.params, {c: symbol(c) for c in cyl.params.coords}, name="piG")


def slicing(cyl: CylinderSpace, g: Mapping[str, object]) -> SmoothMap:
    """The embedding ``p -> (p, g)`` of the base into the cylinder."""
    point = parameter_point(cyl, g)
    comps = {c: symbol(c) for c in cyl.base.coords}
    comps.update({c: const(v) for c, v in point.items()})
    return SmoothMap(cyl.base, cyl, comps, name="iota")


def parameter_point(cyl: CylinderSpace, g: Mapping[str, object]) -> dict[str, Fraction]:
    missing = [c for c in cyl.params.coords if c not in g]
    if missing:
        raise ValueError(f"unbound parameter coordinate(s) {missing}")
    extra = [c for c in g if c not in cyl.param_coords]
    if extra:
        raise ValueError(f"{extra} are not parameter coordinates of {cyl.name}")
    return {c: as_fraction(g[c]) for c in cyl.params.coords}


def compose(f: SmoothMap, h: SmoothMap) -> SmoothMap:
    """The composite ``f o h`` (apply ``h`` first)."""
    if h.target != f.source:
        raise SpaceMismatch(f"cannot compose: {h.target.name} is not the source {f.source.name}")
    return SmoothMap(h.source, f.target, {c: e.substitute(h.components) for c, e in f.components.items()})
