"""Scenario syntax tree and its canonical printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


@dataclass(eq=False)
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


# ---- expressions


@dataclass(eq=False)
class Num(Node):
    value: Fraction
    text: str


@dataclass(eq=False)
class Name(Node):
    id: str


@dataclass(eq=False)
class FieldBasis(Node):
    coord: str


@dataclass(eq=False)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(eq=False)
class Call(Node):
    func: str
    args: list
    kwargs: list  # [(name, Expr)]


Expr = Union[Num, Name, FieldBasis, Unary, Binary, Call]


# ---- statements


@dataclass(eq=False)
class SpaceDecl(Node):
    name: str
    coords: list[str]


@dataclass(eq=False)
class CylinderDecl(Node):
    name: str
    base: str
    params: str


@dataclass(eq=False)
class MapDecl(Node):
    name: str
    source: str
    target: str
    components: list  # [(coord, Expr)]


@dataclass(eq=False)
class MapAlias(Node):
    name: str
    expr: Expr


@dataclass(eq=False)
class FormDecl(Node):
    name: str
    space: str
    expr: Expr


@dataclass(eq=False)
class FieldDecl(Node):
    name: str
    space: str
    expr: Expr


@dataclass(eq=False)
class FunctionalDecl(Node):
    name: str
    kind: str  # "integrate" | "evaluate"
    bounds: list  # integrate: [(var, a, b)]; evaluate: [(var, value)]


@dataclass(eq=False)
class HomotopyDecl(Node):
    name: str
    map: str
    a: Fraction
    b: Fraction


@dataclass(eq=False)
class Directive(Node):
    """Evaluation directive: lift / split / hd / slice / apply / show."""

    verb: str
    expr: Optional[Expr] = None
    target: Optional[str] = None  # lift: cylinder name; apply: functional name; show: space name
    bindings: list = field(default_factory=list)  # slice: [(var, value)]
    field_name: Optional[str] = None  # lift: field name


@dataclass(eq=False)
class Check(Node):
    """check <what> ...; fields used depend on ``what``."""

    what: str  # horizontal | equal | NL | nl_form | homotopy_formula | universal_nl | flow
    expr: Optional[Expr] = None
    other: Optional[Expr] = None
    subject: Optional[str] = None  # map / homotopy / flow name
    field_name: Optional[str] = None
    over: Optional[str] = None
    interval: Optional[tuple] = None
    space: Optional[str] = None


Statement = Union[SpaceDecl, CylinderDecl, MapDecl, MapAlias, FormDecl, FieldDecl, FunctionalDecl, HomotopyDecl, Directive, Check]


@dataclass(eq=False)
class Program(Node):
    statements: list


# --------------------------------------------------------------------------
# printing

PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def walk(e):
    """Yield ``e`` and every sub-expression below it."""
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Unary):
            stack.append(n.operand)
        elif isinstance(n, Binary):
            stack.extend((n.left, n.right))
        elif isinstance(n, Call):
            stack.extend(n.args)
            stack.extend(v for _, v in n.kwargs)


def fmt_number(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _signed(q: Fraction) -> str:
    return fmt_number(q)


def print_expr(e: Expr, parent: int = 0, right_side: bool = False) -> str:
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Name):
        return e.id
    if isinstance(e, FieldBasis):
        return f"d/d{e.coord}"
    if isinstance(e, Unary):
        text = "-" + print_expr(e.operand, PREC["neg"])
        return f"({text})" if parent > PREC["neg"] or (right_side and parent >= 1) else text
    if isinstance(e, Binary):
        p = PREC[e.op]
        if e.op == "^":
            # right associative
            text = f"{print_expr(e.left, p + 1)}^{print_expr(e.right, p, True)}"
        else:
            text = f"{print_expr(e.left, p)} {e.op} {print_expr(e.right, p + 1, True)}"
        return f"({text})" if p < parent else text
    if isinstance(e, Call):
        parts = [print_expr(a) for a in e.args] + [f"{k}={print_expr(v)}" for k, v in e.kwargs]
        return f"{e.func}({', '.join(parts)})"
    raise TypeError(f"not an expression: {e!r}")


def _interval(iv) -> str:
    return f"[{_signed(iv[0])}, {_signed(iv[1])}]"


def print_statement(s: Statement) -> str:
    if isinstance(s, SpaceDecl):
        return f"space {s.name}({', '.join(s.coords)});"
    if isinstance(s, CylinderDecl):
        return f"cylinder {s.name} = {s.base} * {s.params};"
    if isinstance(s, MapDecl):
        body = ", ".join(f"{c} = {print_expr(e)}" for c, e in s.components)
        return f"map {s.name}: {s.source} -> {s.target} {{ {body} }};"
    if isinstance(s, MapAlias):
        return f"map {s.name} = {print_expr(s.expr)};"
    if isinstance(s, FormDecl):
        return f"form {s.name} on {s.space} = {print_expr(s.expr)};"
    if isinstance(s, FieldDecl):
        return f"field {s.name} on {s.space} = {print_expr(s.expr)};"
    if isinstance(s, FunctionalDecl):
        if s.kind == "integrate":
            body = " ".join(f"integrate {v} from {_signed(a)} to {_signed(b)}" for v, a, b in s.bounds)
            body = body.replace(" integrate ", " and ")
            return f"functional {s.name} = {body};"
        pts = ", ".join(f"{v}={_signed(q)}" for v, q in s.bounds)
        return f"functional {s.name} = evaluate at {pts};"
    if isinstance(s, HomotopyDecl):
        return f"homotopy {s.name} = {s.map} on {_interval((s.a, s.b))};"
    if isinstance(s, Directive):
        if s.verb == "lift":
            return f"lift {s.field_name} to {s.target};"
        if s.verb == "apply":
            return f"apply {s.target} to {print_expr(s.expr)};"
        if s.verb == "slice":
            pts = ", ".join(f"{v}={_signed(q)}" for v, q in s.bindings)
            return f"slice {print_expr(s.expr)} at {pts};"
        if s.verb == "show" and s.target:
            return f"show {print_expr(s.expr)} on {s.target};"
        return f"{s.verb} {print_expr(s.expr)};"
    if isinstance(s, Check):
        return f"check {check_label(s)};"
    raise TypeError(f"not a statement: {s!r}")


def check_label(s: Check) -> str:
    w = s.what
    if w == "horizontal":
        return f"horizontal {print_expr(s.expr)} over {s.over}"
    if w == "equal":
        text = f"{print_expr(s.expr)} == {print_expr(s.other)}"
        return f"{text} on {s.space}" if s.space else text
    if w == "NL":
        iv = f" on {_interval(s.interval)}" if s.interval else ""
        return f"NL for {s.subject}{iv} with {print_expr(s.expr)}"
    if w == "nl_form":
        return f"nl_form {print_expr(s.expr)} on {_interval(s.interval)}"
    if w in ("homotopy_formula", "universal_nl"):
        return f"{w} {s.subject} with {print_expr(s.expr)}"
    if w == "flow":
        return f"flow {s.subject} generates {s.field_name}"
    raise TypeError(f"unknown check {w!r}")


def print_program(p: Program) -> str:
    return "".join(print_statement(s) + "\n" for s in p.statements)
