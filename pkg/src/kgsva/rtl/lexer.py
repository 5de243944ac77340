"""Tokenizer for the supported Verilog subset and for SVA property text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

# Directives consumed together with the rest of their line.
_LINE_DIRECTIVES = {
    "define", "undef", "timescale", "include", "ifdef", "ifndef", "elsif",
    "default_nettype", "resetall", "celldefine", "endcelldefine", "line",
}
_BARE_DIRECTIVES = {"else", "endif"}

OPERATORS = sorted(
    [
        "<<<", ">>>", "===", "!==", "|->", "|=>",
        "##", "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "**", "~&", "~|", "~^", "^~",
        "->", "+:", "-:", "::",
        "(", ")", "[", "]", "{", "}", ";", ",", ".", ":", "?", "@", "#", "=",
        "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "'", "$",
    ],
    key=len,
    reverse=True,
)

_NUMBER_RE = re.compile(
    r"(?:\d[\d_]*\s*)?'[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ?_]+"
    r"|'[01xXzZ](?![\w])"
    r"|\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?\d+)?"
)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYS_RE = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, sysident, number, string, op, macro, eof
    value: str
    line: int
    col: int
    offset: int = 0


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int, offset: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.offset = offset


def tokenize(text: str, warnings: Optional[List[str]] = None, source: str = "<text>") -> List[Token]:
    toks: List[Token] = []
    i, n = 0, len(text)
    line, line_start = 1, 0

    def warn(msg: str) -> None:
        if warnings is not None:
            warnings.append(f"{source}:{line}: {msg}")

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise LexError("unterminated block comment", line, i - line_start + 1, i)
            line += text.count("\n", i, j)
            nl = text.rfind("\n", i, j)
            if nl >= 0:
                line_start = nl + 1
            i = j + 2
            continue
        col = i - line_start + 1
        if c == "`":
            m = _IDENT_RE.match(text, i + 1)
            if not m:
                raise LexError("stray backtick", line, col, i)
            name = m.group(0)
            if name in _LINE_DIRECTIVES:
                if name not in ("include", "timescale", "default_nettype", "resetall"):
                    warn(f"preprocessor directive `{name} is not interpreted")
                j = text.find("\n", i)
                i = n if j < 0 else j
            elif name in _BARE_DIRECTIVES:
                warn(f"preprocessor directive `{name} is not interpreted")
                i = m.end()
            else:
                toks.append(Token("macro", "`" + name, line, col, i))
                i = m.end()
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise LexError("unterminated string", line, col, i)
            toks.append(Token("string", text[i : j + 1], line, col, i))
            i = j + 1
            continue
        if c.isdigit() or c == "'":
            m = _NUMBER_RE.match(text, i)
            if m and m.group(0) != "'":
                toks.append(Token("number", re.sub(r"\s+", "", m.group(0)), line, col, i))
                i = m.end()
                continue
        if c == "$":
            m = _SYS_RE.match(text, i)
            if m:
                toks.append(Token("sysident", m.group(0), line, col, i))
                i = m.end()
                continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(text, i)
            toks.append(Token("ident", m.group(0), line, col, i))
            i = m.end()
            continue
        if c == "\\":
            raise LexError("escaped identifiers are not supported", line, col, i)
        for op in OPERATORS:
            if text.startswith(op, i):
                toks.append(Token("op", op, line, col, i))
                i += len(op)
                break
        else:
            raise LexError(f"unexpected character {c!r}", line, col, i)
    toks.append(Token("eof", "", line, i - line_start + 1, n))
    return toks


def number_value(literal: str) -> Optional[int]:
    """Integer value of a Verilog literal, or None when it has x/z digits."""
    lit = literal.replace("_", "")
    if "'" not in lit:
        try:
            return int(lit)
        except ValueError:
            return None
    _, rest = lit.split("'", 1)
    if rest and rest[0] in "sS":
        rest = rest[1:]
    if len(rest) == 1:
        return {"0": 0, "1": 1}.get(rest)
    base = {"b": 2, "o": 8, "d": 10, "h": 16}[rest[0].lower()]
    try:
        return int(rest[1:], base)
    except ValueError:
        return None
