"""Independent reference computations used to cross-check the engine.

Nothing here calls the engine's d / pullback / interior / quadrature code; the
formulas are written out from their coordinate definitions.
"""

from __future__ import annotations

import itertools
import math
import random

from cylcalc.exterior import DiffForm
from cylcalc.scalar import ScalarExpr


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct items), by counting inversions."""
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def coefficient_table(form: DiffForm) -> dict:
    """Fully antisymmetric coefficient lookup keyed by every ordered index tuple."""
    pos = form.space.position
    out = {}
    for idx, c in form.terms.items():
        for perm in itertools.permutations(idx):
            out[perm] = c if perm_sign([pos[x] for x in perm]) > 0 else -c
    return out


def d_oracle(form: DiffForm) -> dict:
    """``(d w)_J = sum_k (-1)^k d_{j_k} w_{J minus j_k}`` over increasing ``J``."""
    space = form.space
    table = coefficient_table(form)
    out = {}
    for J in itertools.combinations(space.coords, form.degree + 1):
        acc = ScalarExpr.ZERO
        for k, j in enumerate(J):
            rest = J[:k] + J[k + 1:]
            c = table.get(rest)
            if c is not None:
                term = c.partial(j)
                acc = acc + (term if k % 2 == 0 else -term)
        if acc:
            out[J] = acc
    return out


def interior_oracle(X, form: DiffForm) -> dict:
    """``(i_X w)_J = sum_c X^c w_{(c, J)}``."""
    table = coefficient_table(form)
    out = {}
    for J in itertools.combinations(form.space.coords, form.degree - 1):
        acc = ScalarExpr.ZERO
        for c, xc in X.components.items():
            w = table.get((c,) + J)
            if w is not None:
                acc = acc + xc * w
        if acc:
            out[J] = acc
    return out


def det(matrix) -> ScalarExpr:
    """Leibniz determinant of a square matrix of scalar expressions."""
    n = len(matrix)
    acc = ScalarExpr.ZERO
    for perm in itertools.permutations(range(n)):
        term = ScalarExpr.ONE
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
        acc = acc + (term if perm_sign(perm) > 0 else -term)
    return acc


def pullback_oracle(F, form: DiffForm) -> dict:
    """``F*(a du_I) = sum_J a(F) det(dF_I / dx_J) dx_J`` via Jacobian minors."""
    out = {}
    src = F.source.coords
    for idx, a in form.terms.items():
        pulled = F.pull_scalar(a)
        for J in itertools.combinations(src, form.degree):
            minor = [[F.components[u].partial(x) for x in J] for u in idx]
            term = pulled * det(minor) if idx else pulled
            if term:
                out[J] = out[J] + term if J in out else term
    return {k: v for k, v in out.items() if v}


def terms_equal(form: DiffForm, table: dict) -> bool:
    return {k: v for k, v in form.terms.items()} == {k: v for k, v in table.items() if v}


def fd5(f, x: float, h: float) -> float:
    """Five-point central difference ``f'(x)``; truncation error O(h^4)."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def simpson(f, a: float, b: float, n: int = 2000) -> float:
    """Composite Simpson rule with ``n`` (even) panels."""
    if n % 2:
        n += 1
    h = (b - a) / n
    s = f(a) + f(b)
    s += 4 * math.fsum(f(a + (2 * k - 1) * h) for k in range(1, n // 2 + 1))
    s += 2 * math.fsum(f(a + 2 * k * h) for k in range(1, n // 2))
    return s * h / 3


def random_points(rng: random.Random, coords, n: int, low: float = -1.0, high: float = 1.0):
    return [{c: rng.uniform(low, high) for c in coords} for _ in range(n)]


def numeric_d(coeffs, coords, degree: int, point: dict, h: float = 1e-3) -> dict:
    """Exterior derivative of a form given only numerically.

    ``coeffs(point)`` returns ``{increasing index: value}``; derivatives are
    five-point finite differences.
    """
    out = {}
    for J in itertools.combinations(coords, degree + 1):
        acc = 0.0
        for k, j in enumerate(J):
            rest = J[:k] + J[k + 1:]

            def g(v, j=j, rest=rest):
                p = dict(point)
                p[j] = v
                return coeffs(p).get(rest, 0.0)

            acc += (-1) ** k * fd5(g, point[j], h)
        out[J] = acc
    return out
