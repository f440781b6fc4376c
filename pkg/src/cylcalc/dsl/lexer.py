from __future__ import annotations

from dataclasses import dataclass

from .errors import DslSyntaxError

PUNCT2 = ("==", "->")
PUNCT1 = ";(){}[],:=+-*/^"


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUMBER, OP, EOF
    value: str
    line: int
    col: int

    def __str__(self) -> str:
        return "end of input" if self.kind == "EOF" else repr(self.value)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#" or text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("IDENT", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isascii() and ch.isdigit():
            j = i + 1
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isascii() and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isascii() and text[j].isdigit():
                    j += 1
            if j - i > 200:
                raise DslSyntaxError("numeric literal too long", line, start_col)
            out.append(Token("NUMBER", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in PUNCT2:
            out.append(Token("OP", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in PUNCT1:
            out.append(Token("OP", ch, line, start_col))
            i += 1
            col += 1
            continue
        raise DslSyntaxError(f"unexpected character {ch!r}", line, start_col)
    out.append(Token("EOF", "", line, col))
    return out
