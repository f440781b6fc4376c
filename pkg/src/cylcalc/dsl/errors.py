from __future__ import annotations


class DslError(Exception):
    """Base class for scenario errors carrying a source position."""

    kind = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0, expected: str | None = None, found: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found

    def __str__(self) -> str:
        text = f"{self.kind} at {self.line}:{self.col}: {self.message}"
        if self.expected is not None:
            text += f" (expected {self.expected}, found {self.found})"
        return text


class DslSyntaxError(DslError):
    kind = "syntax error"


class DslSemanticError(DslError):
    kind = "semantic error"


class DslEvalError(DslError):
    """A runtime failure while evaluating a check (precondition violated, etc.)."""

    kind = "evaluation error"
