"""Command line entry point: ``cylcalc check | fmt | repl | scenarios``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .dsl import ast
from .dsl.errors import DslError
from .dsl.parser import parse_program
from .dsl.runner import RunConfig, Runner, render
from .dsl.semantics import Scenario, decode_source, parse

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def builtin_scenarios() -> list[str]:
    root = resources.files("cylcalc.scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cyl"))


def builtin_text(name: str) -> str:
    name = name[:-4] if name.endswith(".cyl") else name
    return resources.files("cylcalc.scenarios").joinpath(name + ".cyl").read_text(encoding="utf-8")


def load_source(target: str) -> str:
    path = Path(target)
    if path.is_file():
        return decode_source(path.read_bytes())
    stem = target[:-4] if target.endswith(".cyl") else target
    if stem in builtin_scenarios():
        return builtin_text(stem)
    raise FileNotFoundError(f"no such scenario file or built-in scenario: {target}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cylcalc", description="Check identities of forms on cylinders.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run the checks of a scenario file")
    c.add_argument("scenario", help="path to a .cyl file or the name of a built-in scenario")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=_positive_float, default=1e-9)
    c.add_argument("--samples", type=_positive_int, default=16)
    c.add_argument("--quad-nodes", type=_positive_int, default=32)
    c.add_argument("--strict-horizontal", action="store_true")

    f = sub.add_parser("fmt", help="pretty-print a scenario file")
    f.add_argument("scenario")

    r = sub.add_parser("repl", help="read statements from stdin and print evaluations")
    r.add_argument("--seed", type=int, default=0)

    sub.add_parser("scenarios", help="list the built-in scenarios")
    return p


def _write(data: bytes):
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def cmd_check(args) -> int:
    try:
        text = load_source(args.scenario)
        scenario = parse(text)
    except OSError as exc:
        print(f"cylcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DslError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    config = RunConfig(args.seed, args.tol, args.samples, args.quad_nodes, args.strict_horizontal)
    report = Runner(scenario, config).run()
    _write(render(report, args.format))
    return report.exit_code


def cmd_fmt(args) -> int:
    try:
        program = parse_program(load_source(args.scenario))
    except OSError as exc:
        print(f"cylcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DslError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(ast.print_program(program).encode("utf-8"))
    return EXIT_OK


def cmd_repl(args, stdin=None, stdout=None) -> int:
    """Accumulate statements line by line; print results of new directives and checks."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    scenario = Scenario(ast.Program([]))
    config = RunConfig(seed=args.seed)
    pending = ""
    failed = False
    for line in stdin:
        pending += line
        if ";" not in line:
            continue
        try:
            program = parse_program(pending)
        except DslError as exc:
            if exc.found == "end of input":
                continue
            print(exc, file=stdout)
            pending = ""
            continue
        pending = ""
        new = []
        try:
            for s in program.statements:
                getattr(scenario, "_v_" + type(s).__name__)(s)
                scenario.statements.append(s)
                new.append(s)
        except DslError as exc:
            print(exc, file=stdout)
        runner = Runner(scenario, config)
        report = runner.run(new)
        for o in report.outputs:
            print(o.text if o.error is None else f"error: {o.error}", file=stdout)
        for c in report.checks:
            failed |= not c.passed
            tail = f" ({c.message})" if c.message else ""
            print(f"{c.verdict}: {c.name}{tail}", file=stdout)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_scenarios(args) -> int:
    for name in builtin_scenarios():
        print(name)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handler = {"check": cmd_check, "fmt": cmd_fmt, "repl": cmd_repl, "scenarios": cmd_scenarios}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
