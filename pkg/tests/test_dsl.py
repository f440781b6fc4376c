import json
import random

import pytest
from hypothesis import given, strategies as st

from cylcalc.dsl import (
    DslError,
    DslSemanticError,
    DslSyntaxError,
    RunConfig,
    parse,
    parse_expression,
    parse_program,
    print_expr,
    print_program,
    render_json,
    render_text,
    run,
    run_text,
)
from cylcalc.dsl import ast
from cylcalc.cli import builtin_scenarios, builtin_text
from cylcalc.exterior import DiffForm
from cylcalc.generators import random_form, random_transcendental
from cylcalc.scalar import symbol
from cylcalc.spaces import CylinderSpace, Space

HEADER = "space M(x, y); space G(t); cylinder C = M * G;\n"
C = CylinderSpace(Space("M", ("x", "y")), Space("G", ("t",)), "C")


# ---- parsing


def test_three_declarations():
    s = parse("space M(x); space G(t); cylinder C = M*G;")
    assert len(s.program.statements) == 3
    assert [type(st).__name__ for st in s.program.statements] == ["SpaceDecl", "SpaceDecl", "CylinderDecl"]


def test_form_declaration_has_degree_one():
    s = parse("space M(x); space G(t); cylinder C = M*G; form w on C = x*dx + dt;")
    w = s.value_of("w")
    assert isinstance(w, DiffForm) and w.degree == 1 and w.space.name == "C"


def test_unknown_space_is_a_semantic_error():
    with pytest.raises(DslSemanticError, match="unknown space Q") as info:
        parse("space M(x); space G(t); cylinder C = M*G; form w on Q = dx;")
    assert (info.value.line, info.value.col) == (1, 43)


@pytest.mark.parametrize(
    "src, line, col",
    [
        ("space M(x)\nspace G(t);", 2, 1),
        ("space M(x);\nform 3 on M = 1;", 2, 6),
        ("space M(x);\nform w on M = x^^2;", 2, 17),
        ("space M(x);\nform w on M = (x + 1;", 2, 21),
        ("space M(x); check;", 1, 18),
    ],
)
def test_syntax_errors_carry_positions(src, line, col):
    with pytest.raises(DslSyntaxError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == (line, col)


@pytest.mark.parametrize(
    "src, needle",
    [
        ("space M(x); form w on M = dy;", "unknown name dy"),
        ("space M(x); space M(y);", "already defined"),
        ("space M(x); space N(x);", "already used"),
        ("space M(x); form w on M = dx + x;", "degree"),
        ("space M(x); space G(t); cylinder C = M*G; field X on C = d/dx; check flow X generates X;", "map"),
        ("space M(x); form w on M = x^100;", "exponent"),
    ],
)
def test_semantic_errors(src, needle):
    with pytest.raises(DslSemanticError, match=needle):
        parse(src)


def test_invalid_utf8_is_a_syntax_error():
    with pytest.raises(DslSyntaxError):
        parse(b"space M(x);\xff")


def test_deep_nesting_is_rejected_not_crashing():
    with pytest.raises(DslSyntaxError):
        parse_expression("(" * 500 + "x" + ")" * 500)


def test_power_versus_wedge():
    s = parse(HEADER + "form a on C = x^2*dx ^ dy; form b on C = (x^2)*dx^dt;")
    assert s.value_of("a").degree == 2 and s.value_of("b").degree == 2
    assert s.value_of("a").coefficient("x", "y") == symbol("x") ** 2


def test_keywords_cannot_be_names():
    with pytest.raises(DslSyntaxError):
        parse("space check(x);")


# ---- running


def test_failing_horizontal_differential_reports_failed_with_message():
    report = run_text(HEADER + "check hd(dt) == 0 on C;")
    (check,) = report.checks
    assert check.verdict == "failed" and "horizontal" in check.message
    assert report.exit_code == 1


def test_failing_equality_shows_residual():
    report = run_text(HEADER + "form w on C = x*t*dx; check w == t*dx;")
    data = json.loads(render_json(report))
    (check,) = data["checks"]
    assert check["verdict"] == "failed"
    assert check["residual"] == [{"basis": "dx", "coefficient": "t*x - t"}]


def test_empty_scenario_passes():
    report = run_text("")
    assert report.checks == [] and report.exit_code == 0
    assert json.loads(render_json(report))["summary"]["checks"] == 0


def test_one_passing_check_json():
    data = json.loads(render_json(run_text(HEADER + "check d(x*y) == y*dx + x*dy on M;")))
    assert set(data) >= {"version", "config", "checks", "summary"}
    assert data["checks"][0]["verdict"] == "proven_zero"


def test_numeric_verdict_for_trig_identity():
    report = run_text(HEADER + "check sin(x)^2 + cos(x)^2 == 1 on M;")
    assert report.checks[0].verdict == "numerically_zero"


def test_strict_horizontal_mode():
    src = HEADER + "form w on C = x*dt + t*dx; check slice(w, t=1) == dx;"
    assert run_text(src).exit_code == 0
    strict = run_text(src, RunConfig(strict_horizontal=True))
    assert strict.checks[0].verdict == "failed"


def test_space_inferred_from_coordinates():
    report = run_text(HEADER + "hd x*y*t*dx; show t*dy on C;")
    assert [o.text for o in report.outputs] == ["-t*x*dx^dy", "t*dy"]
    with pytest.raises(DslSemanticError, match="cannot determine"):
        parse(HEADER + "show dt;")


def test_directives_produce_outputs():
    src = HEADER + "form w on C = x*t*dx + dt; split w; hd x*t*dx; slice w at t=2; show d(w);"
    report = run_text(src)
    texts = [o.text for o in report.outputs]
    assert texts[2] == "2*x*dx"
    assert all(o.error is None for o in report.outputs)


def test_json_is_deterministic_and_seeded():
    text = builtin_text("newton_leibniz")
    a = render_json(run(parse(text), RunConfig(seed=5)))
    b = render_json(run(parse(text), RunConfig(seed=5)))
    assert a == b
    assert json.loads(a)["config"]["seed"] == 5


def test_text_report_lists_every_check():
    report = run(parse(builtin_text("bidegree")))
    lines = render_text(report).decode().splitlines()
    assert sum(line.startswith("PASS") for line in lines) == len(report.checks)


@pytest.mark.parametrize("name", builtin_scenarios())
def test_builtin_scenarios_pass(name):
    report = run(parse(builtin_text(name)))
    assert report.checks and report.exit_code == 0
    assert not report.summary()["directive_errors"]


# ---- printing and round trips


@pytest.mark.parametrize("name", builtin_scenarios())
def test_fmt_is_idempotent_and_preserves_meaning(name):
    text = builtin_text(name)
    once = print_program(parse_program(text))
    assert print_program(parse_program(once)) == once
    original = [(c.verdict, c.name) for c in run(parse(text)).checks]
    assert [(c.verdict, c.name) for c in run(parse(once)).checks] == original


@given(st.integers(0, 2**32 - 1))
def test_rendered_forms_reparse_to_equal_forms(seed):
    rng = random.Random(seed)
    w = random_form(rng, C, rng.randint(0, 3), max_degree=3, transcendental=rng.random() < 0.4)
    s = parse(HEADER + f"form w on C = {w};")
    assert s.value_of("w") == w


@given(st.integers(0, 2**32 - 1))
def test_printed_expressions_reparse_identically(seed):
    rng = random.Random(seed)
    e = random_transcendental(rng, ("x", "y", "t"))
    node = parse_expression(str(e))
    again = parse_expression(print_expr(node))
    assert print_expr(again) == print_expr(node)


def test_fuzzed_inputs_only_raise_dsl_errors():
    rng = random.Random(0)
    pieces = ["space", "form", "check", "M", "(", ")", "x", "dx", "^", "*", ";", "==", "on", "=", "1/0", "d/dx"]
    for _ in range(500):
        text = " ".join(rng.choice(pieces) for _ in range(rng.randint(0, 25)))
        try:
            run(parse(text), RunConfig(samples=2))
        except DslError:
            pass


def test_check_labels_round_trip():
    prog = parse_program(HEADER + "check NL for F on [0, 1/2] with u^2;")
    check = prog.statements[-1]
    assert isinstance(check, ast.Check)
    assert ast.check_label(check) == "NL for F on [0, 1/2] with u^2"
