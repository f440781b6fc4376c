"""Scenario language: parsing, validation, execution and reports."""

from .ast import print_expr, print_program
from .errors import DslError, DslEvalError, DslSemanticError, DslSyntaxError
from .parser import parse_expression, parse_program
from .runner import Report, RunConfig, render, render_json, render_text, run, run_text
from .semantics import Scenario, parse

__all__ = [
    "DslError",
    "DslEvalError",
    "DslSemanticError",
    "DslSyntaxError",
    "Report",
    "RunConfig",
    "Scenario",
    "parse",
    "parse_expression",
    "parse_program",
    "print_expr",
    "print_program",
    "render",
    "render_json",
    "render_text",
    "run",
    "run_text",
]
