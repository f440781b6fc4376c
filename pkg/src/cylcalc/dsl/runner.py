"""Execute validated scenarios and render reports."""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

from .. import cylinder as cylmod
from ..exterior import DiffForm, VectorField, format_basis
from ..homotopy import Homotopy, flow_check, universal_nl_check, verify_homotopy_formula
from ..integration import CheckResult, QuadratureFallback, lift_apply_form, newton_leibniz_scalar, nl_form_identity
from ..scalar import ScalarExpr, Verdict, ZeroTestConfig, zero_test
from ..spaces import SmoothMap
from . import ast
from .errors import DslError
from .semantics import Scenario, parse

REPORT_VERSION = "1"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-9
    samples: int = 16
    quad_nodes: int = 32
    strict_horizontal: bool = False

    def zero_config(self, index: int) -> ZeroTestConfig:
        return ZeroTestConfig(samples=self.samples, tol=self.tol, seed=f"{self.seed}:{index}")

    def as_dict(self) -> dict:
        return {"seed": self.seed, "tol": self.tol, "samples": self.samples, "quad_nodes": self.quad_nodes,
                "strict_horizontal": self.strict_horizontal}


@dataclass
class CheckRecord:
    index: int
    line: int
    kind: str
    name: str
    verdict: str  # proven_zero | numerically_zero | failed
    residual: Optional[list] = None
    message: Optional[str] = None
    max_abs: Optional[float] = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict != "failed"

    def as_dict(self) -> dict:
        max_abs = self.max_abs
        if max_abs is not None and not math.isfinite(max_abs):
            max_abs = str(max_abs)
        return {"index": self.index, "line": self.line, "kind": self.kind, "name": self.name,
                "verdict": self.verdict, "residual": self.residual, "message": self.message, "max_abs": max_abs}


@dataclass
class OutputRecord:
    index: int
    line: int
    kind: str
    text: Optional[str] = None
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {"index": self.index, "line": self.line, "kind": self.kind, "text": self.text, "error": self.error}


@dataclass
class Report:
    config: RunConfig
    checks: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and not any(o.error for o in self.outputs)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def summary(self) -> dict:
        counts = {"proven_zero": 0, "numerically_zero": 0, "failed": 0}
        for c in self.checks:
            counts[c.verdict] += 1
        return {"checks": len(self.checks), **counts,
                "directive_errors": sum(1 for o in self.outputs if o.error), "passed": self.passed}

    def as_dict(self) -> dict:
        return {"version": REPORT_VERSION, "config": self.config.as_dict(),
                "checks": [c.as_dict() for c in self.checks], "outputs": [o.as_dict() for o in self.outputs],
                "summary": self.summary()}


# --------------------------------------------------------------------------
# residual rendering


def render_terms(obj) -> list:
    """Sorted ``{basis, coefficient}`` term list with exact coefficients as strings."""
    if isinstance(obj, DiffForm):
        return [{"basis": format_basis(idx) if idx else "1", "coefficient": str(c)} for idx, c in obj.terms.items()]
    if isinstance(obj, VectorField):
        return [{"basis": f"d/d{c}", "coefficient": str(v)} for c, v in obj.components.items()]
    if isinstance(obj, SmoothMap):
        return [{"basis": c, "coefficient": str(v)} for c, v in obj.components.items() if v]
    if isinstance(obj, dict):
        return [{"basis": k, "coefficient": str(v)} for k, v in obj.items() if v]
    if isinstance(obj, (list, tuple)):
        return [{"basis": str(i), "coefficient": str(v)} for i, v in enumerate(obj) if v]
    if obj is None:
        return []
    return [{"basis": "1", "coefficient": str(obj)}] if obj else []


def _coefficients(obj) -> list:
    if isinstance(obj, (DiffForm, VectorField)):
        return obj.coefficients()
    if isinstance(obj, SmoothMap):
        return list(obj.components.values())
    if isinstance(obj, dict):
        return list(obj.values())
    if isinstance(obj, (list, tuple)):
        return list(obj)
    return [obj]


# --------------------------------------------------------------------------
# running


class Runner:
    def __init__(self, scenario: Scenario, config: RunConfig):
        self.scenario = scenario
        self.config = config
        scenario.quad_nodes = config.quad_nodes
        scenario.strict_horizontal = config.strict_horizontal
        for ent in scenario.entities.values():
            ent.evaluated, ent.value, ent.error = False, None, None
        self.report = Report(config)

    def run(self, statements=None) -> Report:
        start = time.perf_counter()
        for s in self.scenario.statements if statements is None else statements:
            if isinstance(s, ast.Check):
                self.report.checks.append(self._check(s, len(self.report.checks)))
            elif isinstance(s, ast.Directive):
                self.report.outputs.append(self._directive(s, len(self.report.outputs)))
        self.report.seconds = time.perf_counter() - start
        return self.report

    # ---- checks

    def _check(self, s: ast.Check, index: int) -> CheckRecord:
        label = ast.check_label(s)
        start = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", QuadratureFallback)
            try:
                result, residual = self._evaluate_check(s, self.config.zero_config(index))
            except Exception as exc:  # any runtime failure is a failed check, never a crash
                return CheckRecord(index, s.line, s.what, label, "failed", None, _message(exc), None,
                                   time.perf_counter() - start)
        notes = []
        if any(issubclass(w.category, QuadratureFallback) for w in caught):
            notes.append("quadrature fallback used")
        test = result.test
        if test.verdict == Verdict.PROVEN_ZERO:
            verdict = "proven_zero"
        elif test.verdict == Verdict.NUMERICALLY_ZERO:
            verdict = "numerically_zero"
        else:
            verdict = "failed"
            if test.nonfinite:
                notes.append(f"non-finite value: {test.nonfinite}")
            elif test.verdict == Verdict.PROVEN_NONZERO:
                notes.append("residual is provably nonzero")
            else:
                notes.append(f"residual is numerically nonzero (max |r| = {test.max_abs:.3e})")
        max_abs = None if test.verdict.is_proven else test.max_abs
        return CheckRecord(index, s.line, s.what, label, verdict,
                           render_terms(residual) if verdict == "failed" else None,
                           "; ".join(notes) or None, max_abs, time.perf_counter() - start)

    def _evaluate_check(self, s: ast.Check, zc: ZeroTestConfig):
        sc = self.scenario
        nodes = self.config.quad_nodes
        w = s.what
        if w == "horizontal":
            form = sc._arg_form(s.expr)
            residual = cylmod.transverse_part(form, s.over)
            return CheckResult(zero_test(residual.coefficients(), zc), residual), residual
        if w == "equal":
            a, b = sc.ev(s.expr), sc.ev(s.other)
            residual = self._difference(a, b, sc.space_of(s.expr) or sc.space_of(s.other))
            return CheckResult(zero_test(_coefficients(residual), zc), residual), residual
        if w == "NL":
            subject = sc.value_of(s.subject)
            if isinstance(subject, Homotopy):
                smap, (a, b) = subject.map, (subject.a, subject.b)
            else:
                smap, (a, b) = subject, (0, 1)
            if s.interval:
                a, b = s.interval
            f = sc.as_scalar(sc.ev(s.expr))
            res = newton_leibniz_scalar(smap, f, a, b, nodes=nodes, config=zc)
            return res, res.residual
        if w == "nl_form":
            res = nl_form_identity(sc._arg_form(s.expr), s.interval[0], s.interval[1], nodes=nodes, config=zc)
            return res, res.residual
        if w == "homotopy_formula":
            res = verify_homotopy_formula(sc.value_of(s.subject), sc._arg_form(s.expr), nodes=nodes, config=zc)
            return res, res.residual
        if w == "universal_nl":
            res = universal_nl_check(sc.value_of(s.subject), sc._arg_form(s.expr), nodes=nodes, config=zc)
            return res, res.residual
        if w == "flow":
            A = sc.value_of(s.subject)
            X = sc.value_of(s.field_name)
            fc = flow_check(A, X, zc)
            coords = A.target.coords
            residual = {f"d/dt A*{c} - A*X({c})": r for c, r in zip(coords, fc.derivation.residual)}
            residual.update({f"A_0*{c} - {c}": r for c, r in zip(coords, fc.initial.residual)})
            worst = fc.derivation if not fc.derivation.passed else fc.initial
            if fc.derivation.passed and fc.initial.passed:
                worst = max((fc.derivation, fc.initial), key=lambda r: _verdict_rank(r.verdict))
            return worst, residual
        raise DslError(f"unknown check {w}", s.line, s.col)

    @staticmethod
    def _difference(a, b, space):
        if isinstance(b, ScalarExpr) and not b and not isinstance(a, ScalarExpr):
            return a
        if isinstance(a, ScalarExpr) and not a and not isinstance(b, ScalarExpr):
            return -b if not isinstance(b, SmoothMap) else b
        if isinstance(a, SmoothMap) and isinstance(b, SmoothMap):
            if a.source != b.source or a.target != b.target:
                raise DslError("maps have different source or target")
            return {c: a.components[c] - b.components[c] for c in a.target.coords}
        if isinstance(a, VectorField) or isinstance(b, VectorField):
            return a - b
        if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
            return a - b
        return Scenario.as_form(a, space) - Scenario.as_form(b, space)

    # ---- directives

    def _directive(self, s: ast.Directive, index: int) -> OutputRecord:
        sc = self.scenario
        rec = OutputRecord(index, s.line, s.verb)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QuadratureFallback)
            try:
                rec.text = self._directive_text(s, sc)
            except Exception as exc:
                rec.error = _message(exc)
        return rec

    def _directive_text(self, s: ast.Directive, sc: Scenario) -> str:
        v = s.verb
        if v == "lift":
            return str(cylmod.canonical_lift(sc.value_of(s.field_name), sc.value_of(s.target)))
        if v == "split":
            return str(cylmod.bidegree_split(sc._arg_form(s.expr)))
        if v == "hd":
            return str(cylmod.horizontal_d(sc._arg_form(s.expr)))
        if v == "slice":
            value = sc.ev(s.expr)
            point = dict(s.bindings)
            if isinstance(value, VectorField):
                fs = cylmod.slice_field(value, point)
                if not fs.sliceable:
                    raise DslError("field has parameter components and does not slice to the base")
                return str(fs.field)
            return str(cylmod.slice_form(sc.as_form(value, sc.space_of(s.expr)), point,
                                         self.config.strict_horizontal))
        if v == "apply":
            return str(lift_apply_form(sc.value_of(s.target), sc._arg_form(s.expr)))
        if v == "show":
            return str(sc.ev(s.expr))
        raise DslError(f"unknown directive {v}", s.line, s.col)


def _verdict_rank(v: Verdict) -> int:
    return {Verdict.PROVEN_ZERO: 0, Verdict.NUMERICALLY_ZERO: 1}.get(v, 2)


def _message(exc: Exception) -> str:
    if isinstance(exc, DslError):
        return exc.message
    text = str(exc) or type(exc).__name__
    return f"{type(exc).__name__}: {text}"


def run(scenario: Scenario, config: RunConfig | None = None) -> Report:
    return Runner(scenario, config or RunConfig()).run()


def run_text(text: str, config: RunConfig | None = None) -> Report:
    return run(parse(text), config)


# --------------------------------------------------------------------------
# rendering


def render_json(report: Report) -> bytes:
    return (json.dumps(report.as_dict(), indent=2, ensure_ascii=True) + "\n").encode("ascii")


def render_text(report: Report) -> bytes:
    lines = []
    events = [(o.line, 0, o) for o in report.outputs] + [(c.line, 1, c) for c in report.checks]
    for _, _, ev in sorted(events, key=lambda e: (e[0], e[1])):
        if isinstance(ev, OutputRecord):
            body = ev.text if ev.error is None else f"ERROR {ev.error}"
            lines.append(f"  {ev.kind:<8} line {ev.line:<4} {body}")
            continue
        mark = "PASS" if ev.passed else "FAIL"
        lines.append(f"{mark} {ev.verdict:<17} line {ev.line:<4} {ev.name}  ({ev.seconds * 1000:.1f} ms)")
        if ev.message:
            lines.append(f"       {ev.message}")
        if ev.residual:
            rendered = " + ".join(f"({t['coefficient']})*{t['basis']}" for t in ev.residual)
            lines.append(f"       residual: {rendered}")
    s = report.summary()
    lines.append(f"{s['checks']} checks: {s['proven_zero']} proven zero, {s['numerically_zero']} numerically zero, "
                 f"{s['failed']} failed; {s['directive_errors']} directive errors "
                 f"(seed {report.config.seed}, tol {report.config.tol:g}, {report.seconds:.2f} s)")
    return ("\n".join(lines) + "\n").encode("utf-8")


def render(report: Report, fmt: str = "text") -> bytes:
    if fmt == "json":
        return render_json(report)
    if fmt == "text":
        return render_text(report)
    raise ValueError(f"unknown format {fmt!r}")
