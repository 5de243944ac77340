"""Syntactic validation of generated SystemVerilog assertions.

The accepted language is a practical subset of concurrent properties:

    [label ':'] [assert property '('] [property NAME ';']
    '@' '(' event {('or' | ',') event} ')'
    [disable iff '(' expr ')']
    sequence [('|->' | '|=>') sequence]
    [endproperty] [')'] [';']

where an event is ``[posedge|negedge] name`` and a sequence is a chain of
boolean expressions joined by ``##N`` or ``##[m:n]`` delays.  The whole
implication may sit inside one pair of parentheses.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .contexts import SvaRecord
from .rtl.lexer import LexError, Token, tokenize

IMPLICATIONS = ("|->", "|=>")
EDGES = ("posedge", "negedge")
SYSTEM_FUNCTIONS = ("$rose", "$fell", "$stable", "$isunknown", "$past", "$onehot", "$onehot0", "$countones", "$changed")

# lowest to highest binding
BINARY_LEVELS: Tuple[Tuple[str, ...], ...] = (
    ("||",),
    ("&&",),
    ("|",),
    ("^", "~^", "^~"),
    ("&",),
    ("==", "!=", "===", "!=="),
    ("<", "<=", ">", ">="),
    ("<<", ">>", "<<<", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
    ("**",),
)
UNARY_OPS = ("!", "~", "-", "+", "&", "|", "^", "~&", "~|", "~^")


class SvaSyntaxError(Exception):
    def __init__(self, message: str, tok: Token, expected: str = ""):
        hint = f" (expected {expected})" if expected else ""
        found = tok.value or "end of input"
        super().__init__(f"{tok.line}:{tok.col}: {message}; found {found!r}{hint}")
        self.line = tok.line
        self.col = tok.col
        self.offset = tok.offset
        self.expected = expected


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Number:
    text: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class Select:
    base: "Expr"
    msb: "Expr"
    lsb: Optional["Expr"] = None


@dataclass(frozen=True)
class Concat:
    items: Tuple["Expr", ...]


Expr = Union[Ident, Number, Unary, Binary, Ternary, Call, Select, Concat]


@dataclass(frozen=True)
class Delay:
    lo: int
    hi: Optional[Union[int, str]] = None  # None for ##N, "$" for unbounded

    def render(self) -> str:
        if self.hi is None:
            return f"##{self.lo}"
        return f"##[{self.lo}:{self.hi}]"


@dataclass(frozen=True)
class SeqStep:
    delay: Optional[Delay]
    expr: Expr


@dataclass(frozen=True)
class ClockEvent:
    edge: Optional[str]
    signal: str


@dataclass(frozen=True)
class SvaAst:
    clocking: Tuple[ClockEvent, ...]
    disable_iff: Optional[Expr]
    antecedent: Tuple[SeqStep, ...]
    operator: Optional[str]
    consequent: Optional[Tuple[SeqStep, ...]]
    referenced_signals: FrozenSet[str] = field(default=frozenset())


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *values: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.value in values

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, value: str, what: str = "") -> Token:
        if not self.at(value):
            raise SvaSyntaxError(f"unexpected token{' in ' + what if what else ''}", self.tok, repr(value))
        return self.take()

    def ident(self, what: str) -> str:
        if self.tok.kind != "ident":
            raise SvaSyntaxError(f"expected {what}", self.tok, "identifier")
        return self.take().value

    # -- top level

    def assertion(self) -> SvaAst:
        close_assert = False
        if self.tok.kind == "ident" and self.peek().value == ":" and self.peek(2).value == "assert":
            self.i += 2
        if self.at("assert"):
            self.take()
            self.expect("property", "assert statement")
            self.expect("(", "assert statement")
            close_assert = True
        named = False
        if self.at("property"):
            self.take()
            self.ident("property name")
            if self.at("("):
                raise SvaSyntaxError("property arguments are not supported", self.tok)
            self.expect(";", "property header")
            named = True
        clocking = self.clocking()
        disable = None
        if self.at("disable"):
            self.take()
            self.expect("iff", "disable clause")
            self.expect("(", "disable clause")
            disable = self.expr()
            self.expect(")", "disable clause")
        antecedent, op, consequent = self.property_body()
        if named:
            if self.at(";"):
                self.take()
            self.expect("endproperty", "property declaration")
        if close_assert:
            self.expect(")", "assert statement")
        if self.at(";"):
            self.take()
        if self.tok.kind != "eof":
            raise SvaSyntaxError("unexpected trailing input", self.tok, "end of assertion")
        ast = SvaAst(clocking, disable, antecedent, op, consequent)
        return SvaAst(clocking, disable, antecedent, op, consequent, frozenset(referenced(ast)))

    def clocking(self) -> Tuple[ClockEvent, ...]:
        self.expect("@", "clocking event")
        self.expect("(", "clocking event")
        events = [self.event()]
        while self.at("or", ","):
            self.take()
            events.append(self.event())
        self.expect(")", "clocking event")
        return tuple(events)

    def event(self) -> ClockEvent:
        edge = self.take().value if self.at(*EDGES) else None
        return ClockEvent(edge, self.dotted_name("clock signal"))

    def dotted_name(self, what: str) -> str:
        parts = [self.ident(what)]
        while self.at(".") and self.peek().kind == "ident":
            self.take()
            parts.append(self.take().value)
        return ".".join(parts)

    def property_body(self):
        if self.at("(") and self._wraps_implication():
            self.take()
            body = self.implication()
            self.expect(")", "parenthesised property")
            return body
        return self.implication()

    def _wraps_implication(self) -> bool:
        """True when the '(' at the cursor closes around a top-level implication."""
        depth = 0
        for j in range(self.i, len(self.toks)):
            t = self.toks[j]
            if t.kind != "op":
                if t.kind == "eof":
                    return False
                continue
            if t.value in ("(", "[", "{"):
                depth += 1
            elif t.value in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return False
            elif depth == 1 and t.value in IMPLICATIONS:
                return True
        return False

    def implication(self):
        antecedent = self.sequence()
        if self.at(*IMPLICATIONS):
            op = self.take().value
            if self.at(*IMPLICATIONS):
                raise SvaSyntaxError("implication operator cannot follow an implication", self.tok, "expression")
            return antecedent, op, self.sequence()
        return antecedent, None, None

    def sequence(self) -> Tuple[SeqStep, ...]:
        steps = []
        delay = self.delay() if self.at("##") else None
        steps.append(SeqStep(delay, self.expr()))
        while self.at("##"):
            delay = self.delay()
            steps.append(SeqStep(delay, self.expr()))
        return tuple(steps)

    def delay(self) -> Delay:
        self.expect("##")
        if self.tok.kind == "number":
            self._split_sized_literal()
            return Delay(self._int(self.take()))
        if self.at("["):
            self.take()
            if self.tok.kind != "number":
                raise SvaSyntaxError("bad delay range", self.tok, "cycle count")
            lo = self._int(self.take())
            self.expect(":", "delay range")
            if self.at("$"):
                self.take()
                hi: Union[int, str] = "$"
            elif self.tok.kind == "number":
                hi = self._int(self.take())
            else:
                raise SvaSyntaxError("bad delay range", self.tok, "cycle count or '$'")
            self.expect("]", "delay range")
            return Delay(lo, hi)
        raise SvaSyntaxError("bad cycle delay", self.tok, "number or '['")

    def _split_sized_literal(self) -> None:
        """Treat ``##1 'hFF`` as a one-cycle delay followed by ``'hFF``.

        The Verilog lexer reads "1 'hFF" as one sized literal, but straight
        after ``##`` a sized literal makes no sense as a cycle count.
        """
        t = self.tok
        m = re.match(r"(\d[\d_]*)('.*)", t.value, re.S)
        if not m:
            return
        size, rest = m.groups()
        tick = t.col + max(len(size), 1)
        tail = Token("number", rest, t.line, tick, t.offset + tick - t.col)
        self.toks[self.i : self.i + 1] = [Token("number", size, t.line, t.col, t.offset), tail]

    def _int(self, t: Token) -> int:
        try:
            return int(t.value.replace("_", ""))
        except ValueError:
            raise SvaSyntaxError("cycle delay must be a plain integer", t) from None

    # -- expressions

    def expr(self) -> Expr:
        cond = self.binary(0)
        if self.at("?"):
            self.take()
            then = self.expr()
            self.expect(":", "conditional expression")
            return Ternary(cond, then, self.expr())
        return cond

    def binary(self, level: int) -> Expr:
        if level == len(BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.value in ops:
            op = self.take().value
            left = Binary(op, left, self.binary(level + 1))
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.value in UNARY_OPS:
            op = self.take().value
            return Unary(op, self.unary())
        return self.postfix(self.primary())

    def postfix(self, base: Expr) -> Expr:
        while self.at("["):
            self.take()
            msb = self.expr()
            lsb = None
            if self.at(":"):
                self.take()
                lsb = self.expr()
            self.expect("]", "bit select")
            base = Select(base, msb, lsb)
        return base

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.take()
            return Number(t.value)
        if t.kind == "sysident":
            if t.value not in SYSTEM_FUNCTIONS:
                raise SvaSyntaxError("unknown system function", t, ", ".join(SYSTEM_FUNCTIONS))
            self.take()
            args: List[Expr] = []
            if self.at("("):
                self.take()
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.take()
                        args.append(self.expr())
                self.expect(")", f"call to {t.value}")
            return Call(t.value, tuple(args))
        if t.kind == "ident":
            if t.value in ("posedge", "negedge", "disable", "iff", "property", "endproperty", "assert"):
                raise SvaSyntaxError("keyword is not allowed here", t, "expression")
            return Ident(self.dotted_name("signal"))
        if self.at("("):
            self.take()
            inner = self.expr()
            self.expect(")", "parenthesised expression")
            return inner
        if self.at("{"):
            self.take()
            items = [self.expr()]
            while self.at(","):
                self.take()
                items.append(self.expr())
            self.expect("}", "concatenation")
            return Concat(tuple(items))
        raise SvaSyntaxError("expected an expression", t, "signal, literal, '(' or system function")


def parse_sva(text: str) -> SvaAst:
    """Parse one assertion; raises SvaSyntaxError with line and column."""
    try:
        tokens = tokenize(text, source="<sva>")
    except LexError as exc:
        raise SvaSyntaxError(str(exc).split(": ", 1)[-1], Token("op", "", exc.line, exc.col, exc.offset)) from None
    if tokens[0].kind == "eof":
        raise SvaSyntaxError("empty assertion", tokens[0], "'@'")
    return _Parser(tokens).assertion()


# ---------------------------------------------------------------- walking / printing


def _expr_names(e: Expr) -> Iterable[str]:
    if isinstance(e, Ident):
        yield e.name
    elif isinstance(e, Unary):
        yield from _expr_names(e.operand)
    elif isinstance(e, Binary):
        yield from _expr_names(e.left)
        yield from _expr_names(e.right)
    elif isinstance(e, Ternary):
        for part in (e.cond, e.then, e.other):
            yield from _expr_names(part)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _expr_names(a)
    elif isinstance(e, Select):
        yield from _expr_names(e.base)
        yield from _expr_names(e.msb)
        if e.lsb is not None:
            yield from _expr_names(e.lsb)
    elif isinstance(e, Concat):
        for a in e.items:
            yield from _expr_names(a)


def referenced(ast: SvaAst) -> List[str]:
    names = [ev.signal for ev in ast.clocking]
    if ast.disable_iff is not None:
        names.extend(_expr_names(ast.disable_iff))
    for step in ast.antecedent + (ast.consequent or ()):
        names.extend(_expr_names(step.expr))
    return list(dict.fromkeys(names))


def format_expr(e: Expr) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Number):
        return e.text
    if isinstance(e, Unary):
        return f"{e.op}{format_expr(e.operand) if _atomic(e.operand) else '(' + format_expr(e.operand) + ')'}"
    if isinstance(e, Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, Ternary):
        return f"({format_expr(e.cond)} ? {format_expr(e.then)} : {format_expr(e.other)})"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Select):
        inner = format_expr(e.msb) + (f":{format_expr(e.lsb)}" if e.lsb is not None else "")
        return f"{format_expr(e.base)}[{inner}]"
    if isinstance(e, Concat):
        return "{" + ", ".join(format_expr(a) for a in e.items) + "}"
    raise TypeError(f"not an expression: {e!r}")


def _atomic(e: Expr) -> bool:
    return isinstance(e, (Ident, Number, Call, Select, Concat, Binary, Ternary))


def _format_seq(steps: Sequence[SeqStep]) -> str:
    parts = []
    for s in steps:
        parts.append(f"{s.delay.render()} {format_expr(s.expr)}" if s.delay else format_expr(s.expr))
    return " ".join(parts)


def format_sva(ast: SvaAst) -> str:
    events = " or ".join(f"{ev.edge} {ev.signal}" if ev.edge else ev.signal for ev in ast.clocking)
    out = [f"@({events})"]
    if ast.disable_iff is not None:
        out.append(f"disable iff ({format_expr(ast.disable_iff)})")
    out.append(_format_seq(ast.antecedent))
    if ast.operator:
        out.append(ast.operator)
        out.append(_format_seq(ast.consequent or ()))
    return " ".join(out) + ";"


# ---------------------------------------------------------------- checking


@dataclass
class CheckVerdict:
    syntax_ok: bool
    unknown_signals: List[str] = field(default_factory=list)
    diagnostics: List[Tuple[str, str]] = field(default_factory=list)  # (line:col, message)
    warnings: List[str] = field(default_factory=list)


def check(ast: SvaAst, valid_signals: Iterable[str], known_scopes: Iterable[str] = ()) -> CheckVerdict:
    """Compare referenced names against the valid set.

    Hierarchical references whose first component names a known module or
    instance produce a warning instead of an unknown-signal entry.
    """
    valid = set(valid_signals)
    scopes = set(known_scopes)
    unknown, warnings = [], []
    for name in sorted(ast.referenced_signals):
        if name in valid:
            continue
        head = name.split(".", 1)[0]
        if "." in name and head in scopes:
            warnings.append(f"hierarchical reference {name!r}")
        else:
            unknown.append(name)
    return CheckVerdict(True, unknown, [], warnings)


def check_text(text: str, valid_signals: Iterable[str], known_scopes: Iterable[str] = ()) -> CheckVerdict:
    try:
        ast = parse_sva(text)
    except SvaSyntaxError as exc:
        return CheckVerdict(False, [], [(f"{exc.line}:{exc.col}", str(exc))])
    return check(ast, valid_signals, known_scopes)


def apply_check(rec: SvaRecord, valid_signals: Iterable[str], known_scopes: Iterable[str] = ()) -> SvaRecord:
    """Fill in the verdict fields of ``rec`` (missing assertions count as failures)."""
    if rec.missing or not rec.sva_text.strip():
        rec.syntax_ok = False
        rec.diagnostics = ["no assertion text"]
        return rec
    v = check_text(rec.sva_text, valid_signals, known_scopes)
    rec.syntax_ok = v.syntax_ok
    rec.unknown_signals = list(v.unknown_signals)
    rec.diagnostics = [msg for _, msg in v.diagnostics] + v.warnings
    return rec


@dataclass
class BatchReport:
    total: int = 0
    syntactically_correct: int = 0
    unknown_signal_count: int = 0
    per_signal: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "syntactically_correct": self.syntactically_correct,
            "unknown_signal_count": self.unknown_signal_count,
            "per_signal": {k: self.per_signal[k] for k in sorted(self.per_signal)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BatchReport":
        return cls(d["total"], d["syntactically_correct"], d["unknown_signal_count"], dict(d.get("per_signal", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        rows = [("signal", "#SVA", "#SynC", "unknown")]
        for sig in sorted(self.per_signal):
            c = self.per_signal[sig]
            rows.append((sig, str(c["total"]), str(c["syntactically_correct"]), str(c["unknown_signals"])))
        rows.append(("TOTAL", str(self.total), str(self.syntactically_correct), str(self.unknown_signal_count)))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = []
        for n, r in enumerate(rows):
            lines.append("  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(r, widths))))
            if n == 0 or n == len(rows) - 2:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def batch_report(
    records: Sequence[SvaRecord], valid_signals: Iterable[str], known_scopes: Iterable[str] = ()
) -> BatchReport:
    valid, scopes = set(valid_signals), set(known_scopes)
    rep = BatchReport()
    for rec in records:
        if rec.syntax_ok is None:
            apply_check(rec, valid, scopes)
        row = rep.per_signal.setdefault(rec.signal, {"total": 0, "syntactically_correct": 0, "unknown_signals": 0})
        row["total"] += 1
        rep.total += 1
        if rec.syntax_ok:
            row["syntactically_correct"] += 1
            rep.syntactically_correct += 1
        row["unknown_signals"] += len(rec.unknown_signals)
        rep.unknown_signal_count += len(rec.unknown_signals)
    return rep
