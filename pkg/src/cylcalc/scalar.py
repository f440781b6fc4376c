"""Exact scalar expressions in named coordinates.

Expressions are kept permanently in a canonical form: a finite sum of
rational multiples of monomials.  A monomial is a product of powers of
generators, where a generator is either a coordinate symbol or an opaque
transcendental atom ``sin(u)``, ``cos(u)`` or ``exp(u)`` whose argument ``u``
is itself canonical.  Two rewrite rules keep the atoms tidy:

* at most one ``exp`` atom per monomial, with exponent one
  (``exp(a)*exp(b) -> exp(a+b)``, ``exp(a)^n -> exp(n*a)``);
* odd/even symmetry, so the argument of ``sin``/``cos`` never has a
  negative leading coefficient.

Polynomials therefore reach a unique expanded normal form and zero testing is
a decision procedure for them.  Anything involving atoms is only tested
numerically (see :func:`zero_test`).
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

__all__ = [
    "ScalarExpr",
    "Atom",
    "Number",
    "EvaluationError",
    "UnboundCoordinate",
    "NonFiniteValue",
    "NotInvertible",
    "UnknownCoordinate",
    "Verdict",
    "ZeroTestConfig",
    "ZeroTest",
    "const",
    "symbol",
    "symbols",
    "sin",
    "cos",
    "exp",
    "as_fraction",
    "normalize",
    "partial",
    "substitute",
    "is_zero",
    "zero_test",
    "evaluate",
]

Number = Union[int, Fraction]


class EvaluationError(ValueError):
    pass


class UnboundCoordinate(EvaluationError, KeyError):
    def __str__(self) -> str:
        return f"unbound coordinate {self.args[0]!r}"


class NonFiniteValue(EvaluationError):
    pass


class NotInvertible(ValueError):
    """Division by an expression that has no inverse in the expression class."""


class UnknownCoordinate(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats.

    Floats go through their shortest ``repr`` so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NonFiniteValue(f"non-finite constant {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact constant")


# --------------------------------------------------------------------------
# generators and monomials

_FUNCS = ("sin", "cos", "exp")


class Atom:
    """Opaque transcendental generator ``func(arg)``."""

    __slots__ = ("func", "arg", "key", "_hash")

    def __init__(self, func: str, arg: "ScalarExpr"):
        self.func = func
        self.arg = arg
        self.key = (1, func, arg.sort_key())
        self._hash = hash(("atom", func, arg))

    def __eq__(self, other):
        return isinstance(other, Atom) and self.func == other.func and self.arg == other.arg

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{self.func}({self.arg})"


def _gkey(g):
    return (0, g) if isinstance(g, str) else g.key


def _mono_key(mono):
    return tuple((_gkey(g), e) for g, e in mono)


def _mono_degree(mono) -> int:
    return sum(e for _, e in mono)


def _make_mono(powers: dict) -> tuple:
    """Canonical monomial from a generator->exponent dict, merging exp atoms."""
    exps = [g for g in powers if isinstance(g, Atom) and g.func == "exp"]
    if len(exps) > 1 or (exps and powers[exps[0]] != 1):
        arg = ScalarExpr.ZERO
        for g in exps:
            arg = arg + g.arg * powers.pop(g)
        if arg:
            powers[Atom("exp", arg)] = 1
    items = [(g, e) for g, e in powers.items() if e != 0]
    if len(items) > 1:
        items.sort(key=lambda it: _gkey(it[0]))
    return tuple(items)


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for g, e in m2:
        powers[g] = powers.get(g, 0) + e
    return _make_mono(powers)


# --------------------------------------------------------------------------
# expressions


class ScalarExpr:
    """Immutable canonical scalar expression.

    ``terms`` maps monomials (tuples of ``(generator, exponent)``) to nonzero
    :class:`~fractions.Fraction` coefficients.  Construct expressions through
    :func:`const`, :func:`symbol`, the functions :func:`sin`, :func:`cos`,
    :func:`exp` and ordinary arithmetic operators.
    """

    __slots__ = ("_terms", "_hash", "_key", "_free", "_poly")

    ZERO: "ScalarExpr"
    ONE: "ScalarExpr"

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self._terms = {m: c for m, c in (terms or {}).items() if c != 0}
        self._hash = None
        self._key = None
        self._free = None
        self._poly = None

    # ---- structure

    @property
    def terms(self) -> Mapping[tuple, Fraction]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = tuple(sorted((_mono_key(m), c) for m, c in self._terms.items()))
        return self._key

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms in display order: higher total degree first, then lexicographic."""
        return sorted(self._terms.items(), key=lambda it: (-_mono_degree(it[0]), _mono_key(it[0])))

    @property
    def free_symbols(self) -> frozenset[str]:
        if self._free is None:
            out = set()
            for mono in self._terms:
                for g, _ in mono:
                    if isinstance(g, str):
                        out.add(g)
                    else:
                        out |= g.arg.free_symbols
            self._free = frozenset(out)
        return self._free

    @property
    def is_polynomial(self) -> bool:
        """True when no transcendental atom occurs."""
        if self._poly is None:
            self._poly = all(isinstance(g, str) for mono in self._terms for g, _ in mono)
        return self._poly

    @property
    def is_constant(self) -> bool:
        return all(not mono for mono in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not a rational constant")
        return self._terms.get((), Fraction(0))

    def atoms(self) -> set[Atom]:
        return {g for mono in self._terms for g, _ in mono if isinstance(g, Atom)}

    def degree_in(self, var: str) -> int:
        """Polynomial degree in ``var``; atoms depending on ``var`` are not counted."""
        best = 0
        for mono in self._terms:
            for g, e in mono:
                if g == var:
                    best = max(best, e)
        return best

    # ---- arithmetic

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr({m: -c for m, c in self._terms.items()})

    def __pos__(self) -> "ScalarExpr":
        return self

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return ScalarExpr(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return ScalarExpr.ZERO
            return ScalarExpr({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        if not self._terms or not other._terms:
            return ScalarExpr.ZERO
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return ScalarExpr(out)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarExpr":
        """Multiplicative inverse, defined only for ``c`` and ``c*exp(u)``."""
        if len(self._terms) == 1:
            (mono, c), = self._terms.items()
            if not mono:
                return ScalarExpr({(): 1 / c})
            if len(mono) == 1 and isinstance(mono[0][0], Atom) and mono[0][0].func == "exp":
                return exp(-mono[0][0].arg) * (1 / c)
        raise NotInvertible(f"cannot divide by {self}")

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "ScalarExpr":
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ScalarExpr.ONE
        if len(self._terms) == 1:
            (mono, c), = self._terms.items()
            return ScalarExpr({_make_mono({g: e * n for g, e in mono}): c**n})
        result = ScalarExpr.ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # ---- calculus and substitution

    def partial(self, c: str) -> "ScalarExpr":
        if c not in self.free_symbols:
            return ScalarExpr.ZERO
        direct: dict = {}
        chained = ScalarExpr.ZERO
        for mono, coef in self._terms.items():
            for i, (g, e) in enumerate(mono):
                if isinstance(g, str):
                    if g != c:
                        continue
                    rest = mono[:i] + ((g, e - 1),) + mono[i + 1:] if e > 1 else mono[:i] + mono[i + 1:]
                    direct[rest] = direct.get(rest, 0) + coef * e
                else:
                    dg = _atom_derivative(g, c)
                    if not dg:
                        continue
                    rest = mono[:i] + ((g, e - 1),) + mono[i + 1:] if e > 1 else mono[:i] + mono[i + 1:]
                    chained = chained + ScalarExpr({rest: coef * e}) * dg
        return ScalarExpr(direct) + chained

    def diff(self, *coords: str) -> "ScalarExpr":
        out = self
        for c in coords:
            out = out.partial(c)
        return out

    def substitute(self, bindings: Mapping[str, "ScalarExpr | Number"]) -> "ScalarExpr":
        """Simultaneous substitution of coordinates by expressions."""
        relevant = {k: _coerce_strict(v) for k, v in bindings.items() if k in self.free_symbols}
        if not relevant:
            return self
        cache: dict = {}

        def image(g, e):
            key = (g, e)
            if key not in cache:
                if isinstance(g, str):
                    base = relevant.get(g)
                    cache[key] = symbol(g) ** e if base is None else base**e
                else:
                    cache[key] = _apply_func(g.func, g.arg.substitute(relevant)) ** e
            return cache[key]

        out = ScalarExpr.ZERO
        for mono, coef in self._terms.items():
            term = ScalarExpr({(): coef})
            for g, e in mono:
                term = term * image(g, e)
            out = out + term
        return out

    def eval(self, point: Mapping[str, float]) -> float:
        """IEEE double value at ``point``; every free coordinate must be bound."""
        return _eval(self, point, {})

    def __call__(self, point: Mapping[str, float]) -> float:
        return self.eval(point)

    # ---- printing

    def __str__(self) -> str:
        return format_expr(self)

    def __repr__(self) -> str:
        return f"ScalarExpr({format_expr(self)!r})"


ScalarExpr.ZERO = ScalarExpr()
ScalarExpr.ONE = ScalarExpr({(): Fraction(1)})


def _coerce(value) -> ScalarExpr | None:
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return const(value)
    return None


def _coerce_strict(value) -> ScalarExpr:
    out = _coerce(value)
    if out is None:
        if isinstance(value, float):
            return const(as_fraction(value))
        raise TypeError(f"expected a scalar expression, got {type(value).__name__}")
    return out


def const(q) -> ScalarExpr:
    q = as_fraction(q)
    return ScalarExpr({(): q}) if q else ScalarExpr.ZERO


def symbol(name: str) -> ScalarExpr:
    return ScalarExpr({((name, 1),): Fraction(1)})


def symbols(names: str | Iterable[str]) -> tuple[ScalarExpr, ...]:
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(symbol(n) for n in names)


def _leading_negative(e: ScalarExpr) -> bool:
    return e.sort_key()[0][1] < 0


def sin(e) -> ScalarExpr:
    e = _coerce_strict(e)
    if not e:
        return ScalarExpr.ZERO
    if _leading_negative(e):
        return -sin(-e)
    return ScalarExpr({((Atom("sin", e), 1),): Fraction(1)})


def cos(e) -> ScalarExpr:
    e = _coerce_strict(e)
    if not e:
        return ScalarExpr.ONE
    if _leading_negative(e):
        e = -e
    return ScalarExpr({((Atom("cos", e), 1),): Fraction(1)})


def exp(e) -> ScalarExpr:
    e = _coerce_strict(e)
    if not e:
        return ScalarExpr.ONE
    return ScalarExpr({((Atom("exp", e), 1),): Fraction(1)})


_CONSTRUCTORS: dict[str, Callable[[ScalarExpr], ScalarExpr]] = {"sin": sin, "cos": cos, "exp": exp}
_FLOAT_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


def _apply_func(func: str, arg: ScalarExpr) -> ScalarExpr:
    return _CONSTRUCTORS[func](arg)


_DERIV_CACHE: dict = {}


def _atom_derivative(atom: Atom, c: str) -> ScalarExpr:
    key = (atom, c)
    hit = _DERIV_CACHE.get(key)
    if hit is not None:
        return hit
    du = atom.arg.partial(c)
    if not du:
        out = ScalarExpr.ZERO
    elif atom.func == "sin":
        out = cos(atom.arg) * du
    elif atom.func == "cos":
        out = -sin(atom.arg) * du
    else:
        out = exp(atom.arg) * du
    if len(_DERIV_CACHE) > 50_000:
        _DERIV_CACHE.clear()
    _DERIV_CACHE[key] = out
    return out


def _eval(e: ScalarExpr, point: Mapping[str, float], atoms: dict) -> float:
    parts = []
    for mono, coef in e._terms.items():
        v = float(coef)
        for g, k in mono:
            if isinstance(g, str):
                try:
                    base = float(point[g])
                except KeyError:
                    raise UnboundCoordinate(g) from None
            else:
                base = atoms.get(g)
                if base is None:
                    arg = _eval(g.arg, point, atoms)
                    try:
                        base = _FLOAT_FUNCS[g.func](arg)
                    except OverflowError:
                        raise NonFiniteValue(f"overflow evaluating {g}") from None
                    atoms[g] = base
            try:
                v *= base**k
            except OverflowError:
                raise NonFiniteValue(f"overflow evaluating {e}") from None
        parts.append(v)
    out = math.fsum(parts)
    if not math.isfinite(out):
        raise NonFiniteValue(f"non-finite value of {e}")
    return out


# --------------------------------------------------------------------------
# module-level operations


def normalize(e: ScalarExpr) -> ScalarExpr:
    """Canonical form.  Expressions are canonical on construction, so this is the identity."""
    return e


def partial(e: ScalarExpr, c: str, coords: Iterable[str] | None = None) -> ScalarExpr:
    """Partial derivative; ``coords`` (if given) lists the declared coordinates."""
    if coords is not None and c not in set(coords):
        raise UnknownCoordinate(f"unknown coordinate {c!r}")
    return e.partial(c)


def substitute(e: ScalarExpr, bindings: Mapping[str, ScalarExpr | Number]) -> ScalarExpr:
    return e.substitute(bindings)


def evaluate(e: ScalarExpr, point: Mapping[str, float]) -> float:
    return e.eval(point)


# --------------------------------------------------------------------------
# printing (DSL syntax, reparseable)


def _format_gen(g) -> str:
    if isinstance(g, str):
        return g
    return f"{g.func}({format_expr(g.arg)})"


def _format_mono(mono) -> str:
    parts = []
    for g, e in mono:
        s = _format_gen(g)
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def _format_abs_coef(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_expr(e: ScalarExpr) -> str:
    if not e:
        return "0"
    out = []
    for i, (mono, c) in enumerate(e.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = _format_abs_coef(a)
        elif a == 1:
            body = _format_mono(mono)
        else:
            body = f"{_format_abs_coef(a)}*{_format_mono(mono)}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# --------------------------------------------------------------------------
# zero testing


class Verdict(enum.Enum):
    PROVEN_ZERO = "proven_zero"
    PROVEN_NONZERO = "proven_nonzero"
    NUMERICALLY_ZERO = "numerically_zero"
    NUMERICALLY_NONZERO = "numerically_nonzero"

    @property
    def is_zero(self) -> bool:
        return self in (Verdict.PROVEN_ZERO, Verdict.NUMERICALLY_ZERO)

    @property
    def is_proven(self) -> bool:
        return self in (Verdict.PROVEN_ZERO, Verdict.PROVEN_NONZERO)


@dataclass(frozen=True)
class ZeroTestConfig:
    samples: int = 16
    tol: float = 1e-9
    seed: int | str = 0
    low: float = -2.0
    high: float = 2.0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")

    def with_seed(self, seed) -> "ZeroTestConfig":
        return ZeroTestConfig(self.samples, self.tol, seed, self.low, self.high)


DEFAULT_CONFIG = ZeroTestConfig()


@dataclass(frozen=True)
class ZeroTest:
    verdict: Verdict
    max_abs: float = 0.0
    nonfinite: str | None = None

    @property
    def is_zero(self) -> bool:
        return self.verdict.is_zero


def zero_test(coefficients: Iterable, config: ZeroTestConfig | None = None, *, fixed: Mapping[str, float] | None = None) -> ZeroTest:
    """Decide whether a collection of coefficients vanishes identically.

    Coefficients may be :class:`ScalarExpr` or any object exposing
    ``free_symbols``, ``eval(point)`` and truthiness (e.g. quadrature
    coefficients).  Empty normal forms prove zero; a nonzero polynomial normal
    form proves nonzero; everything else is sampled on ``[low, high]``.
    """
    config = config or DEFAULT_CONFIG
    live = [c for c in coefficients if c]
    if not live:
        return ZeroTest(Verdict.PROVEN_ZERO)
    if any(isinstance(c, ScalarExpr) and c.is_polynomial for c in live):
        return ZeroTest(Verdict.PROVEN_NONZERO)
    syms = sorted(set().union(*(c.free_symbols for c in live)) - set(fixed or ()))
    rng = random.Random(config.seed)
    worst = 0.0
    for _ in range(config.samples):
        point = {s: rng.uniform(config.low, config.high) for s in syms}
        if fixed:
            point.update(fixed)
        for c in live:
            try:
                v = c.eval(point)
            except NonFiniteValue as exc:
                return ZeroTest(Verdict.NUMERICALLY_NONZERO, math.inf, str(exc))
            worst = max(worst, abs(v))
    verdict = Verdict.NUMERICALLY_ZERO if worst <= config.tol else Verdict.NUMERICALLY_NONZERO
    return ZeroTest(verdict, worst)


def is_zero(e: ScalarExpr, samples: int = 16, tol: float = 1e-9, seed: int | str = 0) -> Verdict:
    return zero_test([e], ZeroTestConfig(samples=samples, tol=tol, seed=seed)).verdict
