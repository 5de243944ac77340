"""Recursive-descent parser for a structural/behavioral Verilog subset.

Supported: module/endmodule with ANSI or non-ANSI ports, parameter and
localparam, wire/reg/integer declarations, assign, always blocks with edge or
star sensitivity, begin/end, if/else, case/casez/casex, for/while loops and
module instantiation.  Other constructs are skipped with a warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .lexer import LexError, Token, number_value, tokenize
from .model import (
    AlwaysBlock,
    AssignmentFact,
    ControlFlowFact,
    InstanceFact,
    ModuleFact,
    PortDecl,
    SignalDecl,
)

logger = logging.getLogger(__name__)

KEYWORDS = frozenset(
    """
    module macromodule endmodule input output inout wire reg logic integer real time tri tri0 tri1
    supply0 supply1 wand wor signed unsigned parameter localparam defparam genvar assign always
    always_ff always_comb always_latch initial begin end if else case casez casex endcase default
    for while repeat forever posedge negedge or and not nand nor xor xnor buf bufif0 bufif1 notif0
    notif1 generate endgenerate function endfunction task endtask automatic disable wait fork join
    assert assume cover property endproperty sequence endsequence specify endspecify primitive
    endprimitive table endtable event force release deassign unique priority
    """.split()
)
DIRECTIONS = ("input", "output", "inout")
NET_KINDS = ("wire", "reg", "logic", "tri", "tri0", "tri1", "supply0", "supply1", "wand", "wor")
GATES = ("and", "or", "nand", "nor", "xor", "xnor", "not", "buf", "bufif0", "bufif1", "notif0", "notif1")
SKIP_BLOCKS = {
    "generate": "endgenerate",
    "function": "endfunction",
    "task": "endtask",
    "specify": "endspecify",
    "property": "endproperty",
    "sequence": "endsequence",
    "primitive": "endprimitive",
}
_CLOSERS = {"(": ")", "[": "]", "{": "}"}


class RtlParseError(Exception):
    def __init__(self, message: str, file: str, line: int, col: int, token: str = ""):
        where = f"{file}:{line}:{col}"
        super().__init__(f"{where}: {message}" + (f" (at {token!r})" if token else ""))
        self.file = file
        self.line = line
        self.col = col
        self.token = token


# Statement tree used only inside the parser.
@dataclass
class _Assign:
    lhs: List[str]
    rhs: List[Token]
    blocking: bool
    span: str


@dataclass
class _If:
    cond: List[Token]
    then: object
    other: object
    span: str


@dataclass
class _Case:
    subject: List[Token]
    items: List[Tuple[List[Token], object]]
    span: str


@dataclass
class _Loop:
    header: List[Token]
    body: object
    span: str


@dataclass
class _Block:
    stmts: List[object] = field(default_factory=list)


class _ModuleParser:
    def __init__(self, toks: Sequence[Token], pos: int, file: str, warnings: List[str]):
        self.toks = toks
        self.pos = pos
        self.file = file
        self.warnings = warnings
        self.m: Optional[ModuleFact] = None
        self.header_order: List[str] = []

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *values: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.value in values

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None) -> RtlParseError:
        t = tok or self.tok
        return RtlParseError(message, self.file, t.line, t.col, t.value)

    def expect(self, value: str) -> Token:
        if not self.at(value):
            raise self.error(f"expected {value!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind != "ident" or t.value in KEYWORDS:
            raise self.error("expected identifier")
        return self.advance()

    def span(self, t: Optional[Token] = None) -> str:
        return f"{self.file}:{(t or self.tok).line}"

    def warn(self, message: str, t: Optional[Token] = None) -> None:
        msg = f"{self.span(t)}: {message}"
        self.warnings.append(msg)
        logger.warning(msg)

    def collect(self, stops: Tuple[str, ...]) -> List[Token]:
        """Tokens up to (not including) a stop operator at nesting depth 0."""
        out: List[Token] = []
        depth: List[str] = []
        while True:
            t = self.tok
            if t.kind == "eof":
                raise self.error("unexpected end of file")
            if not depth and t.kind in ("op", "ident") and t.value in stops:
                return out
            if t.kind == "op":
                if t.value in _CLOSERS:
                    depth.append(_CLOSERS[t.value])
                elif depth and t.value == depth[-1]:
                    depth.pop()
                elif t.value in (")", "]", "}"):
                    raise self.error("unbalanced bracket")
            elif not depth and t.kind == "ident" and t.value in ("endmodule",):
                raise self.error("unexpected 'endmodule'")
            out.append(self.advance())

    def skip_to_semicolon(self) -> None:
        self.collect((";",))
        self.expect(";")

    def skip_block(self, opener: Token) -> None:
        closer = SKIP_BLOCKS[opener.value]
        while not self.at(closer):
            if self.tok.kind == "eof":
                raise self.error(f"missing {closer!r}", opener)
            self.advance()
        self.advance()

    # -- expressions -----------------------------------------------------
    def const_eval(self, toks: List[Token]) -> Optional[int]:
        return _ConstEval(toks, self.m.params if self.m else {}).run()

    def parse_range(self) -> Tuple[bool, Optional[int], Optional[int]]:
        if not self.at("["):
            return False, None, None
        self.advance()
        msb_t = self.collect((":",))
        self.expect(":")
        lsb_t = self.collect(("]",))
        self.expect("]")
        return True, self.const_eval(msb_t), self.const_eval(lsb_t)

    # -- module ----------------------------------------------------------
    def parse_module(self) -> ModuleFact:
        kw = self.advance()
        name = self.expect_ident()
        self.m = ModuleFact(name=name.value, file=self.file, line=kw.line)
        if self.at("#"):
            self.advance()
            self.expect("(")
            self.parse_param_list()
            self.expect(")")
        if self.at("("):
            self.advance()
            self.parse_port_list()
            self.expect(")")
        self.expect(";")
        while not self.at("endmodule"):
            if self.tok.kind == "eof":
                raise self.error(f"missing 'endmodule' for module {name.value!r}", kw)
            self.parse_item()
        self.advance()
        self.finish()
        return self.m

    def parse_param_list(self) -> None:
        while not self.at(")"):
            if self.at("parameter", "localparam"):
                self.advance()
            self.parse_param_assign((",", ")"))
            if self.at(","):
                self.advance()

    def parse_param_assign(self, stops: Tuple[str, ...]) -> None:
        while self.at("integer", "signed", "unsigned", "real"):
            self.advance()
        self.parse_range()
        name = self.expect_ident()
        value = None
        if self.at("="):
            self.advance()
            value = self.const_eval(self.collect(stops))
        self.m.params[name.value] = value

    def parse_port_list(self) -> None:
        if self.at(")"):
            return
        if self.at(*DIRECTIONS):
            direction, kind, rng = None, "unspecified", (False, None, None)
            while True:
                if self.at(*DIRECTIONS):
                    direction = self.advance().value
                    kind, rng = "unspecified", (False, None, None)
                    if self.at(*NET_KINDS):
                        kind = _net_kind(self.advance().value)
                    if self.at("signed", "unsigned"):
                        self.advance()
                    rng = self.parse_range()
                if direction is None:
                    raise self.error("expected port direction")
                name = self.expect_ident()
                self.add_port(name, direction, kind, rng)
                if self.at("="):
                    self.advance()
                    self.collect((",", ")"))
                if not self.at(","):
                    break
                self.advance()
        else:
            while True:
                if self.at("."):
                    self.warn("explicit port expressions are not supported")
                    self.collect((",", ")"))
                else:
                    self.header_order.append(self.expect_ident().value)
                if not self.at(","):
                    break
                self.advance()

    def add_port(self, name: Token, direction: str, kind: str, rng) -> None:
        if self.m.port(name.value):
            raise self.error(f"duplicate port {name.value!r}", name)
        ranged, msb, lsb = rng
        self.m.ports.append(PortDecl(name.value, direction, msb, lsb, kind, ranged))

    def parse_item(self) -> None:
        t = self.tok
        v = t.value
        if t.kind == "op" and v == ";":
            self.advance()
        elif t.kind == "ident" and v in DIRECTIONS:
            self.parse_direction_decl()
        elif t.kind == "ident" and v in NET_KINDS + ("integer", "genvar", "real", "time"):
            self.parse_net_decl()
        elif t.kind == "ident" and v in ("parameter", "localparam"):
            self.advance()
            while True:
                self.parse_param_assign((",", ";"))
                if not self.at(","):
                    break
                self.advance()
            self.expect(";")
        elif t.kind == "ident" and v == "assign":
            self.advance()
            while True:
                self.parse_continuous(t)
                if not self.at(","):
                    break
                self.advance()
            self.expect(";")
        elif t.kind == "ident" and v in ("always", "always_ff", "always_comb", "always_latch"):
            self.parse_always()
        elif t.kind == "ident" and v == "initial":
            self.warn("initial block skipped")
            self.advance()
            self.parse_stmt()
        elif t.kind == "ident" and v in SKIP_BLOCKS:
            self.warn(f"unsupported construct '{v}' skipped")
            self.skip_block(self.advance())
        elif t.kind == "ident" and v in GATES + ("defparam", "assert", "assume", "cover"):
            self.warn(f"unsupported construct '{v}' skipped")
            self.skip_to_semicolon()
        elif t.kind == "ident" and v not in KEYWORDS:
            self.parse_instantiation()
        elif t.kind == "macro":
            self.warn(f"macro {v} at module level skipped")
            self.skip_to_semicolon()
        else:
            raise self.error("unexpected token in module body")

    def parse_direction_decl(self) -> None:
        direction = self.advance().value
        kind = "unspecified"
        if self.at(*NET_KINDS):
            kind = _net_kind(self.advance().value)
        if self.at("signed", "unsigned"):
            self.advance()
        rng = self.parse_range()
        while True:
            name = self.expect_ident()
            existing = self.m.port(name.value)
            if existing is None:
                if self.header_order and name.value not in self.header_order:
                    self.warn(f"port {name.value!r} declared but not in the port list", name)
                self.add_port(name, direction, kind, rng)
            else:
                existing.direction = direction
                existing.ranged, existing.msb, existing.lsb = rng
                if kind != "unspecified":
                    existing.kind = kind
            if not self.at(","):
                break
            self.advance()
        self.expect(";")

    def parse_net_decl(self) -> None:
        kw = self.advance()
        kind = "integer" if kw.value in ("integer", "genvar", "time") else _net_kind(kw.value)
        if kw.value == "real":
            kind = "reg"
        if self.at("signed", "unsigned"):
            self.advance()
        rng = self.parse_range()
        while True:
            name = self.expect_ident()
            while self.at("["):  # unpacked dimensions
                self.advance()
                self.collect(("]",))
                self.expect("]")
            port = self.m.port(name.value)
            if port is not None:
                if kind in ("reg", "wire"):
                    port.kind = kind
                if rng[0] and not port.ranged:
                    port.ranged, port.msb, port.lsb = rng
            elif kw.value != "genvar":
                if self.m.signal(name.value):
                    self.warn(f"signal {name.value!r} redeclared", name)
                else:
                    ranged, msb, lsb = rng
                    self.m.internal_signals.append(SignalDecl(name.value, kind, msb, lsb, ranged))
            else:
                self.m.params.setdefault(name.value, None)
            if self.at("="):
                self.advance()
                rhs = self.collect((",", ";"))
                if kind != "integer":
                    self.m.assignments.append(
                        AssignmentFact(name.value, self.idents(rhs), False, True, self.m.name, self.span(name))
                    )
            if not self.at(","):
                break
            self.advance()
        self.expect(";")

    def parse_continuous(self, kw: Token) -> None:
        if self.at("#"):
            self.advance()
            self.advance()
        lhs = self.collect(("=",))
        self.expect("=")
        rhs = self.collect((",", ";"))
        names = self.lvalue_names(lhs)
        if not names:
            raise self.error("assignment without a target", kw)
        for lname in names:
            self.m.assignments.append(
                AssignmentFact(lname, self.idents(rhs), False, True, self.m.name, self.span(lhs[0]))
            )

    def parse_always(self) -> None:
        kw = self.advance()
        edges: List[Tuple[str, str]] = []
        star = kw.value in ("always_comb", "always_latch")
        if self.at("@"):
            self.advance()
            if self.at("*"):
                self.advance()
                star = True
            else:
                self.expect("(")
                if self.at("*"):
                    self.advance()
                    star = True
                else:
                    while True:
                        edge = None
                        if self.at("posedge", "negedge"):
                            edge = self.advance().value
                        sig = self.collect((",", ")")) if edge is None else self.collect((",", ")", "or"))
                        sig_names = self.idents(sig)
                        if edge is not None and sig_names:
                            edges.append((edge, sig_names[0]))
                        if self.at(",") or self.at("or"):
                            self.advance()
                            continue
                        break
                self.expect(")")
        start = len(self.m.assignments)
        body = self.parse_stmt()
        subjects: List[Tuple[str, str]] = []
        self.walk(body, subjects)
        assigned = []
        for a in self.m.assignments[start:]:
            if a.lhs not in assigned:
                assigned.append(a.lhs)
        self.m.always_blocks.append(AlwaysBlock(self.span(kw), edges, star, subjects, assigned))

    # -- statements ------------------------------------------------------
    def parse_stmt(self) -> object:
        t = self.tok
        v = t.value
        if t.kind == "op" and v == ";":
            self.advance()
            return None
        if t.kind == "op" and v == "#":
            self.advance()
            self.advance()
            return self.parse_stmt()
        if t.kind == "op" and v == "@":
            self.advance()
            if self.at("*"):
                self.advance()
            else:
                self.expect("(")
                self.collect((")",))
                self.expect(")")
            return self.parse_stmt()
        if t.kind == "ident":
            if v == "begin":
                self.advance()
                if self.at(":"):
                    self.advance()
                    self.expect_ident()
                block = _Block()
                while not self.at("end"):
                    if self.tok.kind == "eof" or self.at("endmodule"):
                        raise self.error("missing 'end'", t)
                    block.stmts.append(self.parse_stmt())
                self.advance()
                if self.at(":"):
                    self.advance()
                    self.expect_ident()
                return block
            if v in ("unique", "priority"):
                self.advance()
                return self.parse_stmt()
            if v == "if":
                self.advance()
                self.expect("(")
                cond = self.collect((")",))
                self.expect(")")
                then = self.parse_stmt()
                other = None
                if self.at("else"):
                    self.advance()
                    other = self.parse_stmt()
                return _If(cond, then, other, self.span(t))
            if v in ("case", "casez", "casex"):
                return self.parse_case()
            if v in ("for", "while", "repeat"):
                self.advance()
                self.expect("(")
                header = self.collect((")",))
                self.expect(")")
                return _Loop(header, self.parse_stmt(), self.span(t))
            if v == "forever":
                self.advance()
                return _Loop([], self.parse_stmt(), self.span(t))
            if v in ("disable", "force", "release", "assign", "deassign", "wait"):
                self.warn(f"procedural '{v}' skipped", t)
                self.skip_to_semicolon()
                return None
            if v in KEYWORDS:
                raise self.error("unexpected keyword in statement")
        if t.kind == "sysident":
            self.skip_to_semicolon()
            return None
        if t.kind in ("ident", "macro") or (t.kind == "op" and v == "{"):
            lhs = self.collect(("=", "<=", ";"))
            if self.at(";"):
                self.advance()  # task call
                return None
            blocking = self.advance().value == "="
            if self.at("#"):
                self.advance()
                self.advance()
            rhs = self.collect((";",))
            self.expect(";")
            names = self.lvalue_names(lhs)
            if not names:
                raise self.error("assignment without a target", t)
            return _Assign(names, rhs, blocking, self.span(t))
        raise self.error("unexpected token in statement")

    def parse_case(self) -> _Case:
        kw = self.advance()
        self.expect("(")
        subject = self.collect((")",))
        self.expect(")")
        items: List[Tuple[List[Token], object]] = []
        while not self.at("endcase"):
            if self.tok.kind == "eof" or self.at("endmodule"):
                raise self.error("missing 'endcase'", kw)
            if self.at("default"):
                self.advance()
                if self.at(":"):
                    self.advance()
                labels: List[Token] = []
            else:
                labels = self.collect((":",))
                self.expect(":")
            items.append((labels, self.parse_stmt()))
        self.advance()
        return _Case(subject, items, self.span(kw))

    def walk(self, stmt: object, subjects: List[Tuple[str, str]]) -> List[str]:
        """Record facts for ``stmt``; return the names it assigns."""
        if stmt is None:
            return []
        if isinstance(stmt, _Block):
            out: List[str] = []
            for s in stmt.stmts:
                _extend(out, self.walk(s, subjects))
            return out
        if isinstance(stmt, _Assign):
            rhs = self.idents(stmt.rhs)
            for name in stmt.lhs:
                self.m.assignments.append(AssignmentFact(name, rhs, stmt.blocking, False, self.m.name, stmt.span))
            return list(stmt.lhs)
        if isinstance(stmt, _If):
            governed = self.walk(stmt.then, subjects)
            _extend(governed, self.walk(stmt.other, subjects))
            cond = self.idents(stmt.cond)
            if cond:
                self.m.control_flows.append(ControlFlowFact("if_else", cond, governed, self.m.name, stmt.span))
            return governed
        if isinstance(stmt, _Case):
            subj = self.idents(stmt.subject)
            if subj:
                subjects.append((subj[0], stmt.span))
            governed: List[str] = []
            for _, body in stmt.items:
                _extend(governed, self.walk(body, subjects))
            if subj:
                self.m.control_flows.append(ControlFlowFact("case", subj, governed, self.m.name, stmt.span))
            return governed
        if isinstance(stmt, _Loop):
            governed = self.walk(stmt.body, subjects)
            self.m.control_flows.append(
                ControlFlowFact("loop", self.idents(stmt.header), governed, self.m.name, stmt.span)
            )
            return governed
        return []

    # -- instances -------------------------------------------------------
    def parse_instantiation(self) -> None:
        mod = self.advance()
        if self.at("#"):
            self.advance()
            if self.at("("):
                self.advance()
                self.collect((")",))
                self.expect(")")
            else:
                self.advance()
        if self.tok.kind != "ident" or self.tok.value in KEYWORDS:
            self.warn(f"unsupported statement starting with {mod.value!r} skipped", mod)
            self.skip_to_semicolon()
            return
        while True:
            inst = self.expect_ident()
            if self.at("["):
                self.advance()
                self.collect(("]",))
                self.expect("]")
            self.expect("(")
            conns: Dict[str, str] = {}
            pos = 0
            while not self.at(")"):
                if self.at(".") and self.peek().value == "*":
                    self.warn("wildcard port connections unsupported", inst)
                    self.advance()
                    self.advance()
                elif self.at("."):
                    self.advance()
                    formal = self.expect_ident().value
                    if self.at("("):
                        self.advance()
                        actual = self.collect((")",))
                        self.expect(")")
                    else:
                        actual = [Token("ident", formal, 0, 0)]
                    conns[formal] = _text(actual)
                else:
                    actual = self.collect((",", ")"))
                    conns[f"#{pos}"] = _text(actual)
                pos += 1
                if self.at(","):
                    self.advance()
            self.advance()
            if any(i.instance_name == inst.value for i in self.m.instances):
                raise self.error(f"duplicate instance name {inst.value!r}", inst)
            self.m.instances.append(InstanceFact(inst.value, mod.value, conns, self.span(inst)))
            if not self.at(","):
                break
            self.advance()
        self.expect(";")

    # -- identifiers -----------------------------------------------------
    def idents(self, toks: Sequence[Token]) -> List[str]:
        """Signal names referenced in an expression (no literals, params or calls)."""
        out: List[str] = []
        params = self.m.params if self.m else {}
        for i, t in enumerate(toks):
            if t.kind != "ident" or t.value in KEYWORDS or t.value in params:
                continue
            if i > 0 and toks[i - 1].kind == "op" and toks[i - 1].value == ".":
                continue
            if i + 1 < len(toks) and toks[i + 1].kind == "op" and toks[i + 1].value == "(":
                continue
            if t.value not in out:
                out.append(t.value)
        return out

    def lvalue_names(self, toks: Sequence[Token]) -> List[str]:
        """Base names written by an lvalue (selects dropped, concatenations split)."""
        out: List[str] = []
        depth = 0
        for i, t in enumerate(toks):
            if t.kind == "op" and t.value == "[":
                depth += 1
            elif t.kind == "op" and t.value == "]":
                depth -= 1
            elif depth == 0 and t.kind == "ident" and t.value not in KEYWORDS:
                if i > 0 and toks[i - 1].value == ".":
                    continue
                if t.value not in out:
                    out.append(t.value)
        return out

    def finish(self) -> None:
        m = self.m
        for name in self.header_order:
            if not m.port(name):
                self.warn(f"port {name!r} has no direction declaration; assuming input")
                m.ports.append(PortDecl(name, "input"))
        if self.header_order:
            order = {n: i for i, n in enumerate(self.header_order)}
            m.ports.sort(key=lambda p: order.get(p.name, len(order)))
        known = set(m.declared_names()) | set(m.params)
        referenced: List[str] = []
        for a in m.assignments:
            _extend(referenced, [a.lhs] + a.rhs_signals)
        for c in m.control_flows:
            _extend(referenced, c.condition_signals)
        for b in m.always_blocks:
            _extend(referenced, [s for _, s in b.edges])
        for name in referenced:
            if name not in known:
                m.internal_signals.append(SignalDecl(name, "wire", implicit=True))
                known.add(name)


class _ConstEval:
    """Integer evaluation of constant expressions; None when not reducible."""

    def __init__(self, toks: List[Token], params: Dict[str, Optional[int]]):
        self.toks = toks
        self.params = params
        self.i = 0

    def run(self) -> Optional[int]:
        if not self.toks:
            return None
        try:
            v = self.expr()
        except (_NotConst, ZeroDivisionError, IndexError):
            return None
        return v if self.i == len(self.toks) else None

    def peek(self) -> Optional[str]:
        return self.toks[self.i].value if self.i < len(self.toks) else None

    def expr(self) -> int:
        v = self.term()
        while self.peek() in ("+", "-", "<<", ">>"):
            op = self.toks[self.i].value
            self.i += 1
            r = self.term()
            v = {"+": v + r, "-": v - r, "<<": v << r, ">>": v >> r}[op]
        return v

    def term(self) -> int:
        v = self.unary()
        while self.peek() in ("*", "/", "%", "**"):
            op = self.toks[self.i].value
            self.i += 1
            r = self.unary()
            v = {"*": v * r, "/": int(v / r) if r else 1 // r, "%": v % r if r else 1 // r, "**": v**r}[op]
        return v

    def unary(self) -> int:
        if self.peek() == "-":
            self.i += 1
            return -self.unary()
        if self.peek() == "+":
            self.i += 1
            return self.unary()
        return self.atom()

    def atom(self) -> int:
        t = self.toks[self.i]
        self.i += 1
        if t.kind == "number":
            v = number_value(t.value)
            if v is None:
                raise _NotConst()
            return v
        if t.kind == "ident" and self.params.get(t.value) is not None:
            return self.params[t.value]
        if t.kind == "sysident" and t.value == "$clog2" and self.peek() == "(":
            self.i += 1
            v = self.expr()
            if self.peek() != ")":
                raise _NotConst()
            self.i += 1
            return max(0, (v - 1).bit_length())
        if t.kind == "op" and t.value == "(":
            v = self.expr()
            if self.peek() != ")":
                raise _NotConst()
            self.i += 1
            return v
        raise _NotConst()


class _NotConst(Exception):
    pass


def _net_kind(word: str) -> str:
    return "reg" if word in ("reg", "logic") else "wire"


def _extend(out: List[str], names: Sequence[str]) -> None:
    for n in names:
        if n not in out:
            out.append(n)


def _text(toks: Sequence[Token]) -> str:
    out = ""
    prev: Optional[Token] = None
    for t in toks:
        if prev is not None and prev.kind != "op" and t.kind != "op":
            out += " "
        out += t.value
        prev = t
    return out


def parse_rtl(text: str, file: str = "<text>", warnings: Optional[List[str]] = None) -> List[ModuleFact]:
    """Parse every module in ``text``.

    Raises :class:`RtlParseError` with line/column on malformed input;
    out-of-subset constructs are appended to ``warnings`` and skipped.
    """
    sink = warnings if warnings is not None else []
    try:
        toks = tokenize(text, sink, file)
    except LexError as exc:
        raise RtlParseError(str(exc).split(": ", 1)[-1], file, exc.line, exc.col) from exc
    modules: List[ModuleFact] = []
    pos = 0
    while toks[pos].kind != "eof":
        t = toks[pos]
        if t.kind == "ident" and t.value in ("module", "macromodule"):
            p = _ModuleParser(toks, pos, file, sink)
            modules.append(p.parse_module())
            pos = p.pos
        else:
            if t.kind == "ident" and t.value in SKIP_BLOCKS:
                p = _ModuleParser(toks, pos, file, sink)
                p.warn(f"unsupported top-level construct '{t.value}' skipped", t)
                p.advance()
                p.skip_block(t)
                pos = p.pos
                continue
            if t.kind == "ident" and t.value in ("endmodule",):
                raise RtlParseError("'endmodule' without 'module'", file, t.line, t.col, t.value)
            pos += 1
    return modules

