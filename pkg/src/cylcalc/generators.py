"""Seeded random instances for property checks."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from .exterior import DiffForm, VectorField
from .scalar import ScalarExpr, const, cos, exp, sin, symbol
from .spaces import AnySpace, CylinderSpace, SmoothMap, Space

__all__ = [
    "random_polynomial",
    "random_transcendental",
    "random_form",
    "random_horizontal_form",
    "random_field",
    "random_map",
    "random_cylinder",
    "monomials",
    "monomial_forms",
]

BASE_NAMES = ("x", "y", "z", "w")
PARAM_NAMES = ("t", "s")
TARGET_NAMES = ("u", "v", "p", "q")


def _coef(rng: random.Random) -> Fraction:
    c = 0
    while c == 0:
        c = rng.randint(-3, 3)
    if rng.random() < 0.2:
        return Fraction(c, rng.choice((2, 3)))
    return Fraction(c)


def random_polynomial(rng: random.Random, coords: Sequence[str], max_degree: int = 2, max_terms: int = 4,
                      zero_chance: float = 0.0) -> ScalarExpr:
    if rng.random() < zero_chance:
        return ScalarExpr.ZERO
    out = ScalarExpr.ZERO
    for _ in range(rng.randint(1, max_terms)):
        term = const(_coef(rng))
        for _ in range(rng.randint(0, max_degree)):
            term = term * symbol(rng.choice(coords))
        out = out + term
    return out


def random_transcendental(rng: random.Random, coords: Sequence[str], max_degree: int = 2) -> ScalarExpr:
    """Polynomial plus one or two sin/cos/exp factors of small polynomial arguments."""
    out = random_polynomial(rng, coords, max_degree, 2)
    for _ in range(rng.randint(1, 2)):
        fn = rng.choice((sin, cos, exp))
        arg = random_polynomial(rng, coords, 2, 2) * Fraction(1, 2)
        out = out + fn(arg) * random_polynomial(rng, coords, 1, 2)
    return out


def random_form(rng: random.Random, space: AnySpace, degree: int, max_degree: int = 2, max_terms: int = 3,
                transcendental: bool = False) -> DiffForm:
    coords = space.coords
    indices = list(itertools.combinations(coords, degree))
    if not indices:
        return DiffForm.zero(space, degree)
    terms = {}
    for idx in rng.sample(indices, min(len(indices), rng.randint(1, max_terms))):
        if transcendental:
            terms[idx] = random_transcendental(rng, coords, max_degree)
        else:
            terms[idx] = random_polynomial(rng, coords, max_degree)
    return DiffForm(space, degree, terms)


def random_horizontal_form(rng: random.Random, cyl: CylinderSpace, degree: int, max_degree: int = 2,
                           max_terms: int = 3, transcendental: bool = False) -> DiffForm:
    indices = list(itertools.combinations(cyl.base.coords, degree))
    if not indices:
        return DiffForm.zero(cyl, degree)
    terms = {}
    for idx in rng.sample(indices, min(len(indices), rng.randint(1, max_terms))):
        gen = random_transcendental if transcendental else random_polynomial
        terms[idx] = gen(rng, cyl.coords, max_degree)
    return DiffForm(cyl, degree, terms)


def random_field(rng: random.Random, space: AnySpace, max_degree: int = 2, on: Sequence[str] | None = None,
                 coefficient_coords: Sequence[str] | None = None) -> VectorField:
    on = space.coords if on is None else on
    coefficient_coords = space.coords if coefficient_coords is None else coefficient_coords
    return VectorField(space, {c: random_polynomial(rng, coefficient_coords, max_degree, zero_chance=0.2) for c in on})


def random_map(rng: random.Random, source: AnySpace, target: AnySpace, max_degree: int = 2) -> SmoothMap:
    return SmoothMap(source, target, {c: random_polynomial(rng, source.coords, max_degree, 3) for c in target.coords})


def random_cylinder(rng: random.Random, base_dim: int | None = None, param_dim: int = 1) -> CylinderSpace:
    base_dim = base_dim if base_dim is not None else rng.randint(1, 3)
    return CylinderSpace(Space("M", BASE_NAMES[:base_dim]), Space("G", PARAM_NAMES[:param_dim]), "C")


def monomials(coords: Sequence[str], max_degree: int) -> list[ScalarExpr]:
    out = []
    for k in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(coords, k):
            m = ScalarExpr.ONE
            for c in combo:
                m = m * symbol(c)
            out.append(m)
    return out


def monomial_forms(space: AnySpace, max_form_degree: int, max_coef_degree: int = 1) -> list[DiffForm]:
    """Every ``m dx_I`` with ``m`` a coordinate monomial and ``|I| <= max_form_degree``."""
    out = []
    for k in range(max_form_degree + 1):
        for idx in itertools.combinations(space.coords, k):
            for m in monomials(space.coords, max_coef_degree):
                out.append(DiffForm(space, k, {idx: m}))
    return out
