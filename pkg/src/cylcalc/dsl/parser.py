"""Recursive-descent parser for scenario files."""

from __future__ import annotations

from fractions import Fraction

from . import ast
from .errors import DslSyntaxError
from .lexer import Token, tokenize

STATEMENT_KEYWORDS = frozenset({
    "space", "cylinder", "map", "form", "field", "functional", "homotopy",
    "lift", "split", "hd", "slice", "apply", "show", "check",
})
SOFT_KEYWORDS = frozenset({
    "on", "to", "from", "at", "with", "over", "generates", "for", "and", "integrate", "evaluate",
    "horizontal", "NL", "nl_form", "homotopy_formula", "universal_nl", "flow",
})
KEYWORDS = STATEMENT_KEYWORDS | SOFT_KEYWORDS
# statement keywords that double as built-in functions when followed by "("
CALLABLE_KEYWORDS = frozenset({"hd", "slice", "apply", "lift"})

MAX_DEPTH = 64

BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.depth = 0

    # ---- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def error(self, message: str, expected: str | None = None, tok: Token | None = None) -> DslSyntaxError:
        tok = tok or self.tok
        return DslSyntaxError(message, tok.line, tok.col, expected, str(tok) if expected else None)

    def at_op(self, value: str) -> bool:
        return self.tok.kind == "OP" and self.tok.value == value

    def at_word(self, value: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.value == value

    def expect_op(self, value: str) -> Token:
        if not self.at_op(value):
            raise self.error("unexpected token", repr(value))
        return self.advance()

    def expect_word(self, value: str) -> Token:
        if not self.at_word(value):
            raise self.error("unexpected token", repr(value))
        return self.advance()

    def expect_name(self, what: str = "a name") -> str:
        t = self.tok
        if t.kind != "IDENT":
            raise self.error("unexpected token", what)
        if t.value in KEYWORDS:
            raise self.error(f"keyword {t.value!r} cannot be used here", what)
        self.advance()
        return t.value

    # ---- literals

    def rational(self) -> Fraction:
        neg = False
        if self.at_op("-"):
            self.advance()
            neg = True
        t = self.tok
        if t.kind != "NUMBER":
            raise self.error("unexpected token", "a number")
        self.advance()
        q = Fraction(t.value)
        if self.at_op("/"):
            self.advance()
            d = self.tok
            if d.kind != "NUMBER":
                raise self.error("unexpected token", "a denominator")
            self.advance()
            den = Fraction(d.value)
            if den == 0:
                raise DslSyntaxError("zero denominator", d.line, d.col)
            q = q / den
        return -q if neg else q

    def bindings(self) -> list[tuple[str, Fraction]]:
        out = [self.binding()]
        while self.at_op(","):
            self.advance()
            out.append(self.binding())
        return out

    def binding(self) -> tuple[str, Fraction]:
        name = self.expect_name("a parameter name")
        self.expect_op("=")
        return name, self.rational()

    def interval(self) -> tuple[Fraction, Fraction]:
        self.expect_op("[")
        a = self.rational()
        self.expect_op(",")
        b = self.rational()
        self.expect_op("]")
        return a, b

    # ---- program

    def program(self) -> ast.Program:
        stmts = []
        while self.tok.kind != "EOF":
            if self.at_op(";"):
                self.advance()
                continue
            stmts.append(self.statement())
        return ast.Program(stmts, line=1, col=1)

    def statement(self):
        t = self.tok
        if t.kind != "IDENT" or t.value not in STATEMENT_KEYWORDS:
            raise self.error("expected a statement", "a statement keyword")
        self.advance()
        node = getattr(self, "stmt_" + t.value)()
        node.line, node.col = t.line, t.col
        self.expect_op(";")
        return node

    def stmt_space(self):
        name = self.expect_name("a space name")
        self.expect_op("(")
        coords = [self.expect_name("a coordinate name")]
        while self.at_op(","):
            self.advance()
            coords.append(self.expect_name("a coordinate name"))
        self.expect_op(")")
        return ast.SpaceDecl(name, coords)

    def stmt_cylinder(self):
        name = self.expect_name("a cylinder name")
        self.expect_op("=")
        base = self.expect_name("a space name")
        self.expect_op("*")
        params = self.expect_name("a space name")
        return ast.CylinderDecl(name, base, params)

    def stmt_map(self):
        name = self.expect_name("a map name")
        if self.at_op("="):
            self.advance()
            return ast.MapAlias(name, self.expr())
        self.expect_op(":")
        source = self.expect_name("a space name")
        self.expect_op("->")
        target = self.expect_name("a space name")
        self.expect_op("{")
        comps = []
        if not self.at_op("}"):
            while True:
                c = self.expect_name("a coordinate name")
                self.expect_op("=")
                comps.append((c, self.expr()))
                if not self.at_op(","):
                    break
                self.advance()
        self.expect_op("}")
        return ast.MapDecl(name, source, target, comps)

    def _decl_on(self, cls):
        name = self.expect_name("a name")
        self.expect_word("on")
        space = self.expect_name("a space name")
        self.expect_op("=")
        return cls(name, space, self.expr())

    def stmt_form(self):
        return self._decl_on(ast.FormDecl)

    def stmt_field(self):
        return self._decl_on(ast.FieldDecl)

    def stmt_functional(self):
        name = self.expect_name("a functional name")
        self.expect_op("=")
        if self.at_word("integrate"):
            self.advance()
            bounds = [self._bound()]
            while self.at_word("and"):
                self.advance()
                bounds.append(self._bound())
            return ast.FunctionalDecl(name, "integrate", bounds)
        if self.at_word("evaluate"):
            self.advance()
            self.expect_word("at")
            return ast.FunctionalDecl(name, "evaluate", self.bindings())
        raise self.error("unexpected token", "'integrate' or 'evaluate'")

    def _bound(self):
        var = self.expect_name("a parameter name")
        self.expect_word("from")
        a = self.rational()
        self.expect_word("to")
        return var, a, self.rational()

    def stmt_homotopy(self):
        name = self.expect_name("a homotopy name")
        self.expect_op("=")
        smap = self.expect_name("a map name")
        a, b = Fraction(0), Fraction(1)
        if self.at_word("on"):
            self.advance()
            a, b = self.interval()
        return ast.HomotopyDecl(name, smap, a, b)

    def stmt_lift(self):
        field_name = self.expect_name("a field name")
        self.expect_word("to")
        return ast.Directive("lift", field_name=field_name, target=self.expect_name("a cylinder name"))

    def stmt_split(self):
        return ast.Directive("split", self.expr())

    def stmt_hd(self):
        return ast.Directive("hd", self.expr())

    def stmt_slice(self):
        e = self.expr()
        self.expect_word("at")
        return ast.Directive("slice", e, bindings=self.bindings())

    def stmt_apply(self):
        target = self.expect_name("a functional name")
        self.expect_word("to")
        return ast.Directive("apply", self.expr(), target=target)

    def stmt_show(self):
        e = self.expr()
        target = None
        if self.at_word("on"):
            self.advance()
            target = self.expect_name("a space name")
        return ast.Directive("show", e, target=target)

    def stmt_check(self):
        t = self.tok
        w = t.value if t.kind == "IDENT" else None
        if w == "horizontal":
            self.advance()
            e = self.expr()
            self.expect_word("over")
            over = self.tok.value if self.tok.kind == "IDENT" else None
            if over not in ("piM", "piG"):
                raise self.error("unexpected token", "'piM' or 'piG'")
            self.advance()
            return ast.Check("horizontal", e, over=over)
        if w == "NL":
            self.advance()
            self.expect_word("for")
            subject = self.expect_name("a map or homotopy name")
            interval = None
            if self.at_word("on"):
                self.advance()
                interval = self.interval()
            self.expect_word("with")
            return ast.Check("NL", self.expr(), subject=subject, interval=interval)
        if w == "nl_form":
            self.advance()
            e = self.expr()
            self.expect_word("on")
            return ast.Check("nl_form", e, interval=self.interval())
        if w in ("homotopy_formula", "universal_nl"):
            self.advance()
            subject = self.expect_name("a homotopy name")
            self.expect_word("with")
            return ast.Check(w, self.expr(), subject=subject)
        if w == "flow":
            self.advance()
            subject = self.expect_name("a map name")
            self.expect_word("generates")
            return ast.Check("flow", subject=subject, field_name=self.expect_name("a field name"))
        lhs = self.expr()
        self.expect_op("==")
        rhs = self.expr()
        space = None
        if self.at_word("on"):
            self.advance()
            space = self.expect_name("a space name")
        return ast.Check("equal", lhs, rhs, space=space)

    # ---- expressions

    def expr(self, min_prec: int = 1):
        self._enter()
        left = self.unary()
        while self.tok.kind == "OP" and self.tok.value in BINARY_PREC and BINARY_PREC[self.tok.value] >= min_prec:
            op = self.advance()
            right = self.expr(BINARY_PREC[op.value] + 1)
            left = ast.Binary(op.value, left, right, line=op.line, col=op.col)
        self.depth -= 1
        return left

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")

    def unary(self):
        if self.at_op("-"):
            op = self.advance()
            self._enter()
            operand = self.unary()
            self.depth -= 1
            return ast.Unary("-", operand, line=op.line, col=op.col)
        return self.power()

    def power(self):
        base = self.primary()
        if self.at_op("^"):
            op = self.advance()
            self._enter()
            exponent = self.unary()
            self.depth -= 1
            return ast.Binary("^", base, exponent, line=op.line, col=op.col)
        return base

    def primary(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return ast.Num(Fraction(t.value), t.value, line=t.line, col=t.col)
        if self.at_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        if t.kind == "IDENT":
            is_call = self.peek().kind == "OP" and self.peek().value == "("
            if t.value in KEYWORDS and not (is_call and t.value in CALLABLE_KEYWORDS):
                raise self.error(f"keyword {t.value!r} cannot start an expression", "an expression")
            nxt = self.peek()
            if t.value == "d" and nxt.kind == "OP" and nxt.value == "/":
                basis = self.peek(2)
                if basis.kind == "IDENT" and basis.value.startswith("d") and len(basis.value) > 1:
                    self.advance(), self.advance(), self.advance()
                    return ast.FieldBasis(basis.value[1:], line=t.line, col=t.col)
            self.advance()
            if self.at_op("("):
                return self.call(t)
            return ast.Name(t.value, line=t.line, col=t.col)
        raise self.error("unexpected token", "an expression")

    def call(self, fn: Token):
        self.expect_op("(")
        args, kwargs = [], []
        if not self.at_op(")"):
            while True:
                if self.tok.kind == "IDENT" and self.peek().kind == "OP" and self.peek().value == "=":
                    key = self.expect_name("a keyword argument")
                    self.advance()
                    kwargs.append((key, self.expr()))
                else:
                    if kwargs:
                        raise self.error("positional argument after keyword argument")
                    args.append(self.expr())
                if not self.at_op(","):
                    break
                self.advance()
        self.expect_op(")")
        return ast.Call(fn.value, args, kwargs, line=fn.line, col=fn.col)


def parse_program(text: str) -> ast.Program:
    """Parse scenario text into a syntax tree (no name resolution)."""
    return Parser(text).program()


def parse_expression(text: str):
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "EOF":
        raise p.error("unexpected trailing input", "end of input")
    return e
