"""Name resolution, static typing and evaluation of scenario programs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .. import cylinder as cylmod
from ..exterior import DiffForm, VectorField, apply_field, coordinate_field, d, interior, lie, pullback, wedge
from ..homotopy import Homotopy, homotopy_operator
from ..integration import Integral, LiftedFunctional, lift_apply_form
from ..scalar import ScalarExpr, const, cos, exp, sin, symbol
from ..spaces import CylinderSpace, SmoothMap, Space, compose, identity, projection_G, projection_M, slicing
from . import ast
from .errors import DslEvalError, DslSemanticError, DslSyntaxError
from .parser import KEYWORDS, parse_program

MAX_EXPONENT = 64
MAX_POWER_TERMS = 20000

SCALAR_FUNCS = {"sin": sin, "cos": cos, "exp": exp}
FORM_FUNCS = frozenset({"d", "hd", "p0", "proj", "vrep", "i", "lie", "act", "pull", "lift", "nabla", "slice",
                        "apply", "h", "start", "end"})
MAP_FUNCS = frozenset({"piM", "piG", "iota", "compose", "id"})
BUILTINS = frozenset(SCALAR_FUNCS) | FORM_FUNCS | MAP_FUNCS
RESERVED = KEYWORDS | BUILTINS


# ---- static types


@dataclass(frozen=True)
class FormT:
    space: object  # Space | CylinderSpace | None (constants)
    degree: int

    def describe(self) -> str:
        where = f" on {self.space.name}" if self.space is not None else ""
        return f"{self.degree}-form{where}" if self.degree else f"function{where}"


@dataclass(frozen=True)
class FieldT:
    space: object

    def describe(self) -> str:
        return f"vector field on {self.space.name}"


@dataclass(frozen=True)
class MapT:
    source: object
    target: object

    def describe(self) -> str:
        return f"map {self.source.name} -> {self.target.name}"


@dataclass(frozen=True)
class HomotopyT:
    source: CylinderSpace
    target: object

    def describe(self) -> str:
        return f"homotopy {self.source.name} -> {self.target.name}"


@dataclass(frozen=True)
class FunctionalT:
    variables: tuple

    def describe(self) -> str:
        return "functional"


@dataclass(frozen=True)
class SpaceT:
    space: object

    def describe(self) -> str:
        return f"space {self.space.name}"


class Unresolved(Exception):
    """A coordinate literal was met before its space was known."""

    def __init__(self, node):
        super().__init__(node)
        self.node = node


@dataclass
class Entity:
    name: str
    node: object
    type: object
    value: object = None
    evaluated: bool = False
    error: Optional[Exception] = None


def _describe(t) -> str:
    return t.describe()


def _parse_number(node) -> Optional[Fraction]:
    """Value of a literal rational expression built from numbers, unary minus and ``/``."""
    if isinstance(node, ast.Num):
        return node.value
    if isinstance(node, ast.Unary):
        v = _parse_number(node.operand)
        return None if v is None else -v
    if isinstance(node, ast.Binary) and node.op == "/":
        a, b = _parse_number(node.left), _parse_number(node.right)
        if a is None or b is None or b == 0:
            return None
        return a / b
    return None


def _int_literal(node) -> Optional[int]:
    v = _parse_number(node)
    if v is None or v.denominator != 1 or isinstance(node, ast.Binary):
        return None
    return int(v)


class Scenario:
    """A parsed, validated scenario ready to run."""

    def __init__(self, program: ast.Program, source: str = ""):
        self.program = program
        self.source = source
        self.entities: dict[str, Entity] = {}
        self.hints: dict[int, object] = {}
        self.types: dict[int, object] = {}
        self.statements: list = []  # validated statements in order
        self.strict_horizontal = False
        self._validate()

    # ------------------------------------------------------------------
    # validation

    def err(self, node, message: str, expected: str | None = None, found: str | None = None) -> DslSemanticError:
        return DslSemanticError(message, getattr(node, "line", 0), getattr(node, "col", 0), expected, found)

    @property
    def declarations(self) -> list:
        return [s for s in self.statements if not isinstance(s, (ast.Directive, ast.Check))]

    @property
    def checks(self) -> list:
        return [s for s in self.statements if isinstance(s, ast.Check)]

    def _define(self, node, name: str, type_):
        if name in RESERVED:
            raise self.err(node, f"{name!r} is reserved")
        if name in self.entities:
            raise self.err(node, f"{name!r} is already defined")
        if self._clashes_with_coordinate(name):
            raise self.err(node, f"{name!r} clashes with a coordinate or its differential")
        self.entities[name] = Entity(name, node, type_)

    def _space(self, node, name: str, cylinder: bool = False):
        ent = self.entities.get(name)
        if ent is None:
            raise self.err(node, f"unknown space {name}")
        if not isinstance(ent.type, SpaceT):
            raise self.err(node, f"{name} is not a space", "a space", _describe(ent.type))
        if cylinder and not isinstance(ent.type.space, CylinderSpace):
            raise self.err(node, f"{name} is not a cylinder", "a cylinder", _describe(ent.type))
        return ent.type.space

    def _entity(self, node, name: str, kinds: tuple, what: str):
        ent = self.entities.get(name)
        if ent is None:
            raise self.err(node, f"unknown name {name}")
        if not isinstance(ent.type, kinds):
            raise self.err(node, f"{name} is not {what}", what, _describe(ent.type))
        return ent

    def _clashes_with_coordinate(self, name: str) -> bool:
        coords = self._coord_names()
        return name in coords or (name.startswith("d") and name[1:] in coords)

    def _coord_names(self) -> set:
        out = set()
        for ent in self.entities.values():
            if isinstance(ent.type, SpaceT):
                out.update(ent.type.space.coords)
        return out

    def _validate(self):
        for s in self.program.statements:
            getattr(self, "_v_" + type(s).__name__)(s)
            self.statements.append(s)

    def _v_SpaceDecl(self, s):
        coords = self._coord_names()
        for c in s.coords:
            if c in RESERVED:
                raise self.err(s, f"coordinate name {c!r} is reserved")
            if c in self.entities or "d" + c in self.entities:
                raise self.err(s, f"coordinate {c!r} clashes with a declared name")
            if c in coords:
                raise self.err(s, f"coordinate {c!r} is already used by another space")
            clash = (c.startswith("d") and c[1:] in coords) or ("d" + c) in coords
            if clash or (c.startswith("d") and c[1:] in s.coords):
                raise self.err(s, f"coordinate {c!r} is ambiguous with a coordinate differential")
        if s.name in s.coords or (s.name.startswith("d") and s.name[1:] in s.coords):
            raise self.err(s, f"space name {s.name!r} clashes with its coordinates")
        try:
            space = Space(s.name, tuple(s.coords))
        except ValueError as exc:
            raise self.err(s, str(exc))
        self._define(s, s.name, SpaceT(space))

    def _v_CylinderDecl(self, s):
        base = self._space(s, s.base)
        params = self._space(s, s.params)
        if isinstance(params, CylinderSpace):
            raise self.err(s, "the parameter factor must be a plain space")
        try:
            cyl = CylinderSpace(base, params, s.name)
        except ValueError as exc:
            raise self.err(s, str(exc))
        self._define(s, s.name, SpaceT(cyl))

    def _v_MapDecl(self, s):
        source = self._space(s, s.source)
        target = self._space(s, s.target)
        seen = set()
        for c, e in s.components:
            if c not in target.coords:
                raise self.err(s, f"{c} is not a coordinate of {target.name}")
            if c in seen:
                raise self.err(s, f"component {c} given twice")
            seen.add(c)
            self._expect_form(e, source, 0)
        missing = [c for c in target.coords if c not in seen]
        if missing:
            raise self.err(s, f"missing components {', '.join(missing)} for {target.name}")
        self._define(s, s.name, MapT(source, target))

    def _v_MapAlias(self, s):
        t = self.tc(s.expr, None)
        if not isinstance(t, MapT):
            raise self.err(s, "map alias needs a map expression", "a map", _describe(t))
        self._define(s, s.name, t)

    def _v_FormDecl(self, s):
        space = self._space(s, s.space)
        t = self._expect_form(s.expr, space, None)
        self._define(s, s.name, FormT(space, t.degree))

    def _v_FieldDecl(self, s):
        space = self._space(s, s.space)
        t = self.tc(s.expr, space)
        if not isinstance(t, FieldT) or t.space != space:
            raise self.err(s, "field declaration needs a vector field", f"a vector field on {space.name}", _describe(t))
        self._define(s, s.name, t)

    def _v_FunctionalDecl(self, s):
        names = [b[0] for b in s.bounds]
        if len(set(names)) != len(names):
            raise self.err(s, "repeated variable in functional")
        if s.kind == "integrate":
            for var, a, b in s.bounds:
                if not a < b:
                    raise self.err(s, f"empty interval for {var}: need a < b")
        self._define(s, s.name, FunctionalT(tuple(sorted(names))))

    def _v_HomotopyDecl(self, s):
        ent = self._entity(s, s.map, (MapT,), "a map")
        src = ent.type.source
        if not isinstance(src, CylinderSpace) or src.params.dim != 1:
            raise self.err(s, f"{s.map} must be defined on a cylinder with one parameter", "M * G with dim G = 1",
                           src.name)
        if not s.a < s.b:
            raise self.err(s, "homotopy interval needs a < b")
        self._define(s, s.name, HomotopyT(src, ent.type.target))

    def _v_Directive(self, s):
        v = s.verb
        if v == "lift":
            fld = self._entity(s, s.field_name, (FieldT,), "a vector field")
            cyl = self._space(s, s.target, cylinder=True)
            if fld.type.space not in (cyl.base, cyl.params):
                raise self.err(s, f"{s.field_name} does not live on a factor of {cyl.name}")
            return
        if v == "show":
            hint = self._space(s, s.target) if s.target else None
            t = self._tc_top(s.expr, hint)
            if isinstance(t, FormT) and t.space is None and hint is None and not self._is_constant(s.expr):
                raise self.err(s, "cannot determine the space; add 'on S'")
            return
        if v in ("split", "hd"):
            t = self._tc_top(s.expr, None)
            if not isinstance(t, FormT) or not isinstance(t.space, CylinderSpace):
                raise self.err(s, f"{v} needs a form on a cylinder", "a form on a cylinder", _describe(t))
            return
        if v == "slice":
            t = self._tc_top(s.expr, None)
            space = getattr(t, "space", None)
            if not isinstance(t, (FormT, FieldT)) or not isinstance(space, CylinderSpace):
                raise self.err(s, "slice needs a form or field on a cylinder", "a form on a cylinder", _describe(t))
            self._check_point(s, space, s.bindings)
            return
        if v == "apply":
            fn = self._entity(s, s.target, (FunctionalT,), "a functional")
            t = self._tc_top(s.expr, None)
            self._check_apply(s, fn.type, t)
            return
        raise self.err(s, f"unknown directive {v}")

    def _check_point(self, node, cyl, bindings):
        names = [b[0] for b in bindings]
        if sorted(names) != sorted(cyl.params.coords) or len(set(names)) != len(names):
            raise self.err(node, "slice point must bind every parameter exactly once",
                           ", ".join(cyl.params.coords), ", ".join(names))

    def _check_apply(self, node, fnt: FunctionalT, t):
        if not isinstance(t, FormT) or not isinstance(t.space, CylinderSpace):
            raise self.err(node, "functionals apply to forms on a cylinder", "a form on a cylinder", _describe(t))
        if tuple(sorted(t.space.params.coords)) != fnt.variables:
            raise self.err(node, "functional variables must be the parameters of the cylinder",
                           ", ".join(t.space.params.coords), ", ".join(fnt.variables))

    def _v_Check(self, s):
        w = s.what
        if w == "horizontal":
            t = self._tc_top(s.expr, None)
            if not isinstance(t, FormT) or not isinstance(t.space, CylinderSpace):
                raise self.err(s, "horizontality needs a form on a cylinder", "a form on a cylinder", _describe(t))
        elif w == "equal":
            hint = self._space(s, s.space) if s.space else None
            lhs = self._tc_pair(s, s.expr, s.other, hint)
            if isinstance(lhs, FormT) and lhs.space is None:
                if not (self._is_constant(s.expr) and self._is_constant(s.other)):
                    raise self.err(s, "cannot determine the space; add 'on S'")
        elif w == "NL":
            ent = self._entity(s, s.subject, (MapT, HomotopyT), "a map or homotopy")
            src = ent.type.source
            if not isinstance(src, CylinderSpace) or src.params.dim != 1:
                raise self.err(s, f"{s.subject} must be defined on a cylinder with one parameter")
            if s.interval and not s.interval[0] < s.interval[1]:
                raise self.err(s, "interval needs a < b")
            self._expect_form(s.expr, ent.type.target, 0)
        elif w == "nl_form":
            t = self._tc_top(s.expr, None)
            if not isinstance(t, FormT) or not isinstance(t.space, CylinderSpace) or t.space.params.dim != 1:
                raise self.err(s, "nl_form needs a form on a cylinder with one parameter", "a form on M * G",
                               _describe(t))
            if not s.interval[0] < s.interval[1]:
                raise self.err(s, "interval needs a < b")
        elif w in ("homotopy_formula", "universal_nl"):
            ent = self._entity(s, s.subject, (HomotopyT,), "a homotopy")
            self._expect_form(s.expr, ent.type.target, None)
        elif w == "flow":
            ent = self._entity(s, s.subject, (MapT,), "a map")
            fld = self._entity(s, s.field_name, (FieldT,), "a vector field")
            src = ent.type.source
            if not isinstance(src, CylinderSpace) or src.params.dim != 1 or ent.type.target != src.base:
                raise self.err(s, f"{s.subject} must be a flow M * G -> M with dim G = 1")
            if fld.type.space != src.base:
                raise self.err(s, f"{s.field_name} must live on {src.base.name}", src.base.name, fld.type.space.name)
        else:
            raise self.err(s, f"unknown check {w}")

    # ------------------------------------------------------------------
    # typing

    def _is_constant(self, node) -> bool:
        if isinstance(node, ast.Num):
            return True
        if isinstance(node, ast.Unary):
            return self._is_constant(node.operand)
        if isinstance(node, ast.Binary):
            return self._is_constant(node.left) and self._is_constant(node.right)
        if isinstance(node, ast.Call) and node.func in SCALAR_FUNCS:
            return all(self._is_constant(a) for a in node.args)
        return False

    def _tc_top(self, node, hint):
        try:
            return self.tc(node, hint)
        except Unresolved as exc:
            # fall back to the only declared space holding every coordinate used
            only = self._unique_space(node) if hint is None else None
            if only is None:
                raise self.err(exc.node, f"cannot determine the space of {_show(exc.node)!r}; add 'on S'")
            return self.tc(node, only)

    def _unique_space(self, node):
        coords = self._coord_names()
        used = set()
        for n in ast.walk(node):
            if isinstance(n, ast.FieldBasis):
                used.add(n.coord)
            elif isinstance(n, ast.Name) and n.id not in self.entities:
                if n.id in coords:
                    used.add(n.id)
                elif n.id.startswith("d") and n.id[1:] in coords:
                    used.add(n.id[1:])
        if not used:
            return None
        spaces = [e.type.space for e in self.entities.values()
                  if isinstance(e.type, SpaceT) and used <= set(e.type.space.coords)]
        return spaces[0] if len(spaces) == 1 else None

    def _tc_pair(self, stmt, a, b, hint):
        try:
            ta = self.tc(a, hint)
        except Unresolved:
            ta = None
        tb = self._tc_top(b, hint or getattr(ta, "space", None))
        if ta is None:
            ta = self._tc_top(a, getattr(tb, "space", None))
        # a literal 0 stands for the zero of whatever the other side is
        if _parse_number(b) == 0 and isinstance(ta, (FormT, FieldT, MapT)):
            return ta
        if _parse_number(a) == 0 and isinstance(tb, (FormT, FieldT, MapT)):
            return tb
        if type(ta) is not type(tb):
            raise self.err(stmt, "both sides must have the same kind", _describe(ta), _describe(tb))
        if isinstance(ta, FormT):
            if ta.degree != tb.degree:
                raise self.err(stmt, "degree mismatch", _describe(ta), _describe(tb))
            self._unify(stmt, ta.space, tb.space)
            if ta.space is None and tb.space is not None:
                self._tc_top(a, tb.space)
            if tb.space is None and ta.space is not None:
                self._tc_top(b, ta.space)
            return FormT(ta.space or tb.space, ta.degree)
        if ta != tb:
            raise self.err(stmt, "both sides must have the same type", _describe(ta), _describe(tb))
        return ta

    def _expect_form(self, node, space, degree):
        t = self._tc_top(node, space)
        if not isinstance(t, FormT):
            raise self.err(node, "expected a form", "a form", _describe(t))
        if t.space is not None and t.space != space:
            raise self.err(node, "form lives on the wrong space", space.name, t.space.name)
        if degree is not None and t.degree != degree:
            raise self.err(node, "wrong degree", f"degree {degree}", f"degree {t.degree}")
        return FormT(space, t.degree)

    def _unify(self, node, a, b):
        if a is None:
            return b
        if b is None or a == b:
            return a
        raise self.err(node, "space mismatch", a.name, b.name)

    def tc(self, node, hint):
        t = getattr(self, "_t_" + type(node).__name__)(node, hint)
        self.hints[id(node)] = hint
        self.types[id(node)] = t
        return t

    def _t_Num(self, node, hint):
        return FormT(None, 0)

    def _t_Name(self, node, hint):
        ent = self.entities.get(node.id)
        if ent is not None:
            return ent.type
        if hint is not None:
            if node.id in hint.position:
                return FormT(hint, 0)
            if node.id.startswith("d") and node.id[1:] in hint.position:
                return FormT(hint, 1)
        coords = self._coord_names()
        if node.id in coords or (node.id.startswith("d") and node.id[1:] in coords):
            if hint is None:
                raise Unresolved(node)
            raise self.err(node, f"{node.id} is not a coordinate of {hint.name}")
        if node.id in BUILTINS:
            raise self.err(node, f"{node.id} is a function; call it with arguments")
        raise self.err(node, f"unknown name {node.id}")

    def _t_FieldBasis(self, node, hint):
        if hint is None:
            if node.coord in self._coord_names():
                raise Unresolved(node)
            raise self.err(node, f"unknown coordinate {node.coord}")
        if node.coord not in hint.position:
            raise self.err(node, f"{node.coord} is not a coordinate of {hint.name}")
        return FieldT(hint)

    def _t_Unary(self, node, hint):
        t = self.tc(node.operand, hint)
        if not isinstance(t, (FormT, FieldT)):
            raise self.err(node, "cannot negate this", "a form or field", _describe(t))
        return t

    def _t_Binary(self, node, hint):
        if node.op == "^":
            n = _int_literal(node.right)
            if n is not None:
                lt = self.tc(node.left, hint)
                if isinstance(lt, FormT) and lt.degree == 0:
                    if abs(n) > MAX_EXPONENT:
                        raise self.err(node, f"exponent {n} is too large (limit {MAX_EXPONENT})")
                    self.tc(node.right, hint)
                    return lt
        try:
            lt = self.tc(node.left, hint)
        except Unresolved:
            lt = None
        rt = self.tc(node.right, hint if hint is not None else getattr(lt, "space", None))
        if lt is None:
            rspace = getattr(rt, "space", None)
            if rspace is None:
                self.tc(node.left, None)  # re-raises Unresolved
            lt = self.tc(node.left, rspace)
        elif hint is None and getattr(lt, "space", 1) is None and getattr(rt, "space", None) is not None:
            lt = self.tc(node.left, rt.space)
        return self._binary_type(node, lt, rt)

    def _binary_type(self, node, lt, rt):
        op = node.op
        for t in (lt, rt):
            if not isinstance(t, (FormT, FieldT)):
                raise self.err(node, f"operator {op} does not apply to a {_describe(t)}", "a form or field",
                               _describe(t))
        if op in "+-":
            if type(lt) is not type(rt):
                raise self.err(node, f"cannot combine a {_describe(lt)} and a {_describe(rt)} with {op}")
            space = self._unify(node, lt.space, rt.space)
            if isinstance(lt, FormT):
                if lt.degree != rt.degree:
                    raise self.err(node, "cannot add forms of different degree", _describe(lt), _describe(rt))
                return FormT(space, lt.degree)
            return FieldT(space)
        if op == "*":
            if isinstance(lt, FieldT) and isinstance(rt, FieldT):
                raise self.err(node, "cannot multiply two vector fields")
            if isinstance(lt, FieldT) or isinstance(rt, FieldT):
                f, other = (lt, rt) if isinstance(lt, FieldT) else (rt, lt)
                if other.degree != 0:
                    raise self.err(node, "fields can only be scaled by functions", "a function", _describe(other))
                return FieldT(self._unify(node, f.space, other.space))
            space = self._unify(node, lt.space, rt.space)
            if lt.degree and rt.degree:
                raise self.err(node, "use ^ to multiply forms of positive degree")
            return FormT(space, lt.degree + rt.degree)
        if op == "/":
            if not isinstance(rt, FormT) or rt.degree != 0:
                raise self.err(node, "can only divide by a function", "a function", _describe(rt))
            space = self._unify(node, lt.space, rt.space)
            return FieldT(space) if isinstance(lt, FieldT) else FormT(space, lt.degree)
        if op == "^":
            if not isinstance(lt, FormT) or not isinstance(rt, FormT):
                raise self.err(node, "wedge needs two forms")
            space = self._unify(node, lt.space, rt.space)
            return FormT(space, lt.degree + rt.degree)
        raise self.err(node, f"unknown operator {op}")

    def _t_Call(self, node, hint):
        fn = node.func
        if fn not in BUILTINS:
            raise self.err(node, f"unknown function {fn}")
        if fn not in ("iota", "slice") and node.kwargs:
            raise self.err(node, f"{fn} takes no keyword arguments")
        return getattr(self, "_f_" + fn)(node, hint)

    def _arity(self, node, n):
        if len(node.args) != n:
            raise self.err(node, f"{node.func} takes {n} argument(s)", str(n), str(len(node.args)))

    def _form_arg(self, node, arg, hint, *, cylinder=False, min_degree=0):
        t = self.tc(arg, hint)
        if not isinstance(t, FormT):
            raise self.err(arg, f"{node.func} needs a form", "a form", _describe(t))
        if t.space is None:
            if hint is None:
                raise Unresolved(arg)
            t = FormT(hint, t.degree)
        if cylinder and not isinstance(t.space, CylinderSpace):
            raise self.err(arg, f"{node.func} needs a form on a cylinder", "a cylinder", t.space.name)
        if t.degree < min_degree:
            raise self.err(arg, f"{node.func} needs a form of degree >= {min_degree}", f"degree >= {min_degree}",
                           f"degree {t.degree}")
        return t

    def _named(self, node, arg, kinds, what):
        if not isinstance(arg, ast.Name):
            t = self.tc(arg, None)
            if isinstance(t, kinds):
                return t
            raise self.err(arg, f"{node.func} needs {what}", what, _describe(t))
        ent = self._entity(arg, arg.id, kinds, what)
        self.tc(arg, None)
        return ent.type

    def _space_arg(self, node, arg, cylinder=False):
        if not isinstance(arg, ast.Name):
            raise self.err(arg, f"{node.func} needs a space name")
        return self._space(arg, arg.id, cylinder)

    def _f_sin(self, node, hint):
        self._arity(node, 1)
        t = self.tc(node.args[0], hint)
        if not isinstance(t, FormT) or t.degree != 0:
            raise self.err(node, f"{node.func} needs a function", "a function", _describe(t))
        return t

    _f_cos = _f_exp = _f_sin

    def _f_d(self, node, hint):
        self._arity(node, 1)
        t = self._form_arg(node, node.args[0], hint)
        return FormT(t.space, t.degree + 1)

    def _f_hd(self, node, hint):
        self._arity(node, 1)
        t = self._form_arg(node, node.args[0], hint, cylinder=True)
        return FormT(t.space, t.degree + 1)

    def _f_p0(self, node, hint):
        self._arity(node, 1)
        return self._form_arg(node, node.args[0], hint, cylinder=True)

    def _f_proj(self, node, hint):
        self._arity(node, 3)
        t = self._form_arg(node, node.args[0], hint, cylinder=True)
        p, q = _int_literal(node.args[1]), _int_literal(node.args[2])
        if p is None or q is None or p < 0 or q < 0:
            raise self.err(node, "proj needs literal non-negative integers p, q")
        if p + q != t.degree:
            raise self.err(node, "bidegree does not match the degree of the form", f"p + q = {t.degree}",
                           f"p + q = {p + q}")
        return t

    def _f_vrep(self, node, hint):
        self._arity(node, 2)
        t = self._form_arg(node, node.args[0], hint, cylinder=True)
        over = node.args[1]
        if not isinstance(over, ast.Name) or over.id not in ("piM", "piG"):
            raise self.err(over, "vrep needs piM or piG as second argument")
        return t

    def _field_and_form(self, node, hint):
        self._arity(node, 2)
        fa, wa = node.args
        try:
            ft = self.tc(fa, hint)
        except Unresolved:
            ft = None
        wt = self._form_arg(node, wa, hint if hint is not None else getattr(ft, "space", None))
        if ft is None:
            ft = self.tc(fa, wt.space)
        if not isinstance(ft, FieldT):
            raise self.err(fa, f"{node.func} needs a vector field", "a vector field", _describe(ft))
        if ft.space != wt.space:
            raise self.err(node, "field and form live on different spaces", ft.space.name, wt.space.name)
        return ft, wt

    def _f_i(self, node, hint):
        _, wt = self._field_and_form(node, hint)
        if wt.degree == 0:
            raise self.err(node, "interior product needs a form of degree >= 1")
        return FormT(wt.space, wt.degree - 1)

    def _f_lie(self, node, hint):
        return self._field_and_form(node, hint)[1]

    def _f_act(self, node, hint):
        _, wt = self._field_and_form(node, hint)
        if wt.degree != 0:
            raise self.err(node, "vector fields act on functions", "a function", _describe(wt))
        return wt

    def _mapish(self, node, arg):
        t = self._named(node, arg, (MapT, HomotopyT), "a map")
        if isinstance(t, HomotopyT):
            return MapT(t.source, t.target)
        return t

    def _f_pull(self, node, hint):
        self._arity(node, 2)
        mt = self._mapish(node, node.args[0])
        wt = self._form_arg(node, node.args[1], mt.target)
        if wt.space != mt.target:
            raise self.err(node, "form does not live on the target of the map", mt.target.name, wt.space.name)
        return FormT(mt.source, wt.degree)

    def _f_lift(self, node, hint):
        self._arity(node, 2)
        cyl = self._space_arg(node, node.args[1], cylinder=True)
        fa = node.args[0]
        t = None
        for h in (None, cyl.base, cyl.params):
            try:
                t = self.tc(fa, h)
                break
            except Unresolved:
                continue
            except DslSemanticError:
                if h is cyl.params:
                    raise
        if t is None:
            raise self.err(fa, "cannot determine the space of the field")
        if not isinstance(t, FieldT) or t.space not in (cyl.base, cyl.params):
            raise self.err(fa, f"lift needs a field on a factor of {cyl.name}", "a field", _describe(t))
        return FieldT(cyl)

    def _f_nabla(self, node, hint):
        self._arity(node, 2)
        wt = self._form_arg(node, node.args[1], hint, cylinder=True)
        cyl = wt.space
        try:
            ft = self.tc(node.args[0], cyl)
        except DslSemanticError:
            ft = self.tc(node.args[0], cyl.params)
        if not isinstance(ft, FieldT) or ft.space not in (cyl, cyl.params):
            raise self.err(node, "nabla needs a field on the parameters", "a parameter field",
                           _describe(ft) if hasattr(ft, "describe") else "?")
        return wt

    def _f_slice(self, node, hint):
        self._arity(node, 1)
        t = self.tc(node.args[0], None)
        space = getattr(t, "space", None)
        if not isinstance(t, (FormT, FieldT)) or not isinstance(space, CylinderSpace):
            raise self.err(node, "slice needs a form or field on a cylinder", "a cylinder", _describe(t))
        points = []
        for k, v in node.kwargs:
            q = _parse_number(v)
            if q is None:
                raise self.err(v, "slice point must be a rational literal")
            points.append((k, q))
        self._check_point(node, space, points)
        return FormT(space.base, t.degree) if isinstance(t, FormT) else FieldT(space.base)

    def _f_apply(self, node, hint):
        self._arity(node, 2)
        ft = self._named(node, node.args[0], (FunctionalT,), "a functional")
        wt = self._form_arg(node, node.args[1], None)
        self._check_apply(node, ft, wt)
        return FormT(wt.space.base, wt.degree)

    def _homotopy_form(self, node, min_degree):
        self._arity(node, 2)
        ht = self._named(node, node.args[0], (HomotopyT,), "a homotopy")
        wt = self._form_arg(node, node.args[1], ht.target, min_degree=min_degree)
        if wt.space != ht.target:
            raise self.err(node, "form does not live on the target of the homotopy", ht.target.name, wt.space.name)
        return ht, wt

    def _f_h(self, node, hint):
        ht, wt = self._homotopy_form(node, 1)
        return FormT(ht.source.base, wt.degree - 1)

    def _f_start(self, node, hint):
        ht, wt = self._homotopy_form(node, 0)
        return FormT(ht.source.base, wt.degree)

    _f_end = _f_start

    def _f_piM(self, node, hint):
        self._arity(node, 1)
        cyl = self._space_arg(node, node.args[0], cylinder=True)
        return MapT(cyl, cyl.base)

    def _f_piG(self, node, hint):
        self._arity(node, 1)
        cyl = self._space_arg(node, node.args[0], cylinder=True)
        return MapT(cyl, cyl.params)

    def _f_iota(self, node, hint):
        self._arity(node, 1)
        cyl = self._space_arg(node, node.args[0], cylinder=True)
        points = []
        for k, v in node.kwargs:
            q = _parse_number(v)
            if q is None:
                raise self.err(v, "iota point must be a rational literal")
            points.append((k, q))
        self._check_point(node, cyl, points)
        return MapT(cyl.base, cyl)

    def _f_compose(self, node, hint):
        self._arity(node, 2)
        f = self._mapish(node, node.args[0])
        g = self._mapish(node, node.args[1])
        if g.target != f.source:
            raise self.err(node, "maps are not composable", f.source.name, g.target.name)
        return MapT(g.source, f.target)

    def _f_id(self, node, hint):
        self._arity(node, 1)
        space = self._space_arg(node, node.args[0])
        return MapT(space, space)

    # ------------------------------------------------------------------
    # evaluation

    def value_of(self, name: str):
        ent = self.entities[name]
        if not ent.evaluated:
            ent.evaluated = True
            try:
                ent.value = self._eval_entity(ent)
            except Exception as exc:  # cached so dependent checks report the same cause
                ent.error = exc
        if ent.error is not None:
            raise DslEvalError(f"{name}: {ent.error}", ent.node.line, ent.node.col)
        return ent.value

    def _eval_entity(self, ent: Entity):
        s = ent.node
        if isinstance(s, (ast.SpaceDecl, ast.CylinderDecl)):
            return ent.type.space
        if isinstance(s, ast.MapDecl):
            comps = {c: self.as_scalar(self.ev(e)) for c, e in s.components}
            return SmoothMap(ent.type.source, ent.type.target, comps, name=s.name)
        if isinstance(s, ast.MapAlias):
            return self.ev(s.expr)
        if isinstance(s, ast.FormDecl):
            return self.as_form(self.ev(s.expr), ent.type.space)
        if isinstance(s, ast.FieldDecl):
            return self.ev(s.expr)
        if isinstance(s, ast.FunctionalDecl):
            functional_nodes = self.quad_nodes
            if s.kind == "integrate":
                if len(s.bounds) == 1:
                    var, a, b = s.bounds[0]
                    return LiftedFunctional.integral(var, a, b, nodes=functional_nodes)
                return LiftedFunctional(Integral.box(*s.bounds), nodes=functional_nodes)
            return LiftedFunctional.point(**dict(s.bounds))
        if isinstance(s, ast.HomotopyDecl):
            return Homotopy(self.value_of(s.map), s.a, s.b)
        raise TypeError(s)

    quad_nodes = 32

    @staticmethod
    def as_scalar(v) -> ScalarExpr:
        if isinstance(v, ScalarExpr):
            return v
        if isinstance(v, DiffForm) and v.degree == 0:
            return v.scalar
        raise DslEvalError(f"expected a function, got {v}")

    @staticmethod
    def as_form(v, space) -> DiffForm:
        if isinstance(v, DiffForm):
            return v
        if isinstance(v, ScalarExpr):
            if space is None:
                raise DslEvalError("cannot place a constant on an unknown space")
            return DiffForm.function(space, v)
        raise DslEvalError(f"expected a form, got {v}")

    def space_of(self, node):
        t = self.types.get(id(node))
        return getattr(t, "space", None) or self.hints.get(id(node))

    def ev(self, node):
        return getattr(self, "_e_" + type(node).__name__)(node)

    def _e_Num(self, node):
        return const(node.value)

    def _e_Name(self, node):
        if node.id in self.entities:
            return self.value_of(node.id)
        hint = self.hints[id(node)]
        if node.id in hint.position:
            return symbol(node.id)
        return DiffForm.basis(hint, node.id[1:])

    def _e_FieldBasis(self, node):
        return coordinate_field(self.hints[id(node)], node.coord)

    def _e_Unary(self, node):
        return -self.ev(node.operand)

    def _e_Binary(self, node):
        op = node.op
        a = self.ev(node.left)
        if op == "^" and isinstance(self.types[id(node.left)], FormT) and self.types[id(node.left)].degree == 0:
            n = _int_literal(node.right)
            if n is not None:
                base = self.as_scalar(a)
                k = len(base.terms)
                if k > 1 and math.comb(k - 1 + abs(n), k - 1) > MAX_POWER_TERMS:
                    raise DslEvalError("power would expand to too many terms", node.line, node.col)
                return base ** n
        b = self.ev(node.right)
        space = self.space_of(node)
        if op in "+-":
            if isinstance(a, VectorField) or isinstance(b, VectorField):
                return a + b if op == "+" else a - b
            if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
                return a + b if op == "+" else a - b
            a, b = self.as_form(a, space), self.as_form(b, space)
            return a + b if op == "+" else a - b
        if op == "*":
            if isinstance(a, DiffForm) and isinstance(b, DiffForm):
                return a * b
            if isinstance(a, ScalarExpr) and isinstance(b, (DiffForm, VectorField)):
                return b * a
            if isinstance(a, DiffForm) and isinstance(b, VectorField):
                return b * a.scalar
            return a * b
        if op == "/":
            if isinstance(a, VectorField):
                return a * self.as_scalar(b).inverse()
            return a / self.as_scalar(b)
        # wedge
        if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
            return a * b
        return wedge(self.as_form(a, space), self.as_form(b, space))

    def _arg_form(self, node):
        return self.as_form(self.ev(node), self.space_of(node))

    def _e_Call(self, node):
        fn = node.func
        if fn in SCALAR_FUNCS:
            return SCALAR_FUNCS[fn](self.as_scalar(self.ev(node.args[0])))
        return getattr(self, "_c_" + fn)(node)

    def _c_d(self, node):
        return d(self._arg_form(node.args[0]))

    def _c_hd(self, node):
        return cylmod.horizontal_d(self._arg_form(node.args[0]))

    def _c_p0(self, node):
        return cylmod.horizontalize(self._arg_form(node.args[0]))

    def _c_proj(self, node):
        return cylmod.projector(self._arg_form(node.args[0]), _int_literal(node.args[1]), _int_literal(node.args[2]))

    def _c_vrep(self, node):
        return cylmod.vertical_representative(self._arg_form(node.args[0]), node.args[1].id)

    def _c_i(self, node):
        return interior(self.ev(node.args[0]), self._arg_form(node.args[1]))

    def _c_lie(self, node):
        return lie(self.ev(node.args[0]), self._arg_form(node.args[1]))

    def _c_act(self, node):
        return apply_field(self.ev(node.args[0]), self._arg_form(node.args[1]))

    def _map_value(self, node):
        v = self.ev(node)
        return v.map if isinstance(v, Homotopy) else v

    def _c_pull(self, node):
        return pullback(self._map_value(node.args[0]), self._arg_form(node.args[1]))

    def _c_lift(self, node):
        return cylmod.canonical_lift(self.ev(node.args[0]), self.value_of(node.args[1].id))

    def _c_nabla(self, node):
        return cylmod.nabla(self.ev(node.args[0]), self._arg_form(node.args[1]))

    def _c_slice(self, node):
        v = self.ev(node.args[0])
        point = {k: _parse_number(e) for k, e in node.kwargs}
        if isinstance(v, VectorField):
            fs = cylmod.slice_field(v, point)
            if not fs.sliceable:
                raise DslEvalError("field has parameter components and does not slice to the base", node.line,
                                   node.col)
            return fs.field
        return cylmod.slice_form(self.as_form(v, self.space_of(node.args[0])), point, self.strict_horizontal)

    def _c_apply(self, node):
        return lift_apply_form(self.ev(node.args[0]), self._arg_form(node.args[1]))

    def _c_h(self, node):
        H = self.ev(node.args[0])
        return homotopy_operator(H, self._arg_form(node.args[1]), nodes=self.quad_nodes)

    def _c_start(self, node):
        return pullback(self.ev(node.args[0]).start(), self._arg_form(node.args[1]))

    def _c_end(self, node):
        return pullback(self.ev(node.args[0]).end(), self._arg_form(node.args[1]))

    def _c_piM(self, node):
        return projection_M(self.value_of(node.args[0].id))

    def _c_piG(self, node):
        return projection_G(self.value_of(node.args[0].id))

    def _c_iota(self, node):
        return slicing(self.value_of(node.args[0].id), {k: _parse_number(e) for k, e in node.kwargs})

    def _c_compose(self, node):
        return compose(self._map_value(node.args[0]), self._map_value(node.args[1]))

    def _c_id(self, node):
        return identity(self.value_of(node.args[0].id))


def _show(node) -> str:
    try:
        return ast.print_expr(node)
    except TypeError:
        return "?"


def decode_source(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        prefix = data[:exc.start]
        line = prefix.count(b"\n") + 1
        col = exc.start - (prefix.rfind(b"\n") + 1) + 1
        raise DslSyntaxError("input is not valid UTF-8", line, col) from None


def parse(text: str | bytes) -> Scenario:
    """Parse and statically validate scenario text (``bytes`` are decoded as UTF-8)."""
    if isinstance(text, bytes):
        text = decode_source(text)
    program = parse_program(text)
    return Scenario(program, text)
