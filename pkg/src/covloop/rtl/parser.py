"""Recursive-descent parser for the synthesizable RTL subset.

Supported: module headers with ANSI or non-ANSI ports, parameter/localparam,
wire/reg/logic/integer declarations, continuous assign, always_ff,
always_comb, ``always @(...)``, if/else, case/casez with default,
blocking/nonblocking assignment and the usual expression operators.
Anything else raises UnsupportedConstruct instead of being skipped.
"""

from __future__ import annotations

import re
from typing import Optional

from ..errors import HdlSyntaxError, UnsupportedConstruct
from .ast import (
    Assign, Binary, Block, Case, CaseArm, Cast, ClockSpec, Concat, ContinuousAssign,
    DesignUnit, Event, Expr, Ident, If, Index, NetDecl, Number, Param, Past, PortDecl,
    ProcBlock, Range, Repeat, ResetSpec, Slice, SourceSpan, Stmt, Ternary, TimingClass,
    Unary,
)
from .exprs import BINARY_PREC, const_value
from .lexer import LineIndex, Tok, Token, number_value, to_internal, tokenize

DEFAULT_RESET_PATTERN = r"^(rst|reset)"

UNARY_OPS = ("!", "~", "-", "+", "&", "|", "^", "~&", "~|", "~^", "^~")
DIRECTIONS = {"input": "in", "output": "out", "inout": "inout"}
NET_KEYWORDS = ("wire", "reg", "logic", "integer")
UNSUPPORTED_ITEMS = {
    "initial": "initial block", "function": "function", "task": "task",
    "generate": "generate block", "genvar": "genvar", "for": "for loop",
    "always_latch": "always_latch", "typedef": "typedef", "enum": "enum",
    "struct": "struct", "interface": "interface", "class": "class",
    "package": "package", "property": "property in RTL", "assert": "assertion in RTL",
    "assume": "assumption in RTL", "cover": "cover in RTL", "sequence": "sequence",
}
SKIPPED_DIRECTIVES = ("`timescale", "`default_nettype", "`resetall")


def _span(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.start_line, a.start_col, b.end_line, b.end_col)


class TokenStream:
    """Token cursor with the expression grammar; reused by the SVA parser."""

    def __init__(self, tokens: list[Token], params: Optional[dict[str, tuple[int, int]]] = None,
                 allow_past: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.params: dict[str, tuple[int, int]] = params if params is not None else {}
        self.allow_past = allow_past

    # ---- navigation ----

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind is not Tok.EOF:
            self.pos += 1
        return tok

    def error(self, msg: str, *expected: str):
        tok = self.cur
        got = tok.text or "end of input"
        raise HdlSyntaxError(f"{msg} (got {got!r})", tok.span, expected)

    def expect_op(self, op: str) -> Token:
        if not self.cur.is_op(op):
            self.error(f"expected {op!r}", op)
        return self.advance()

    def expect_kw(self, kw: str) -> Token:
        if not self.cur.is_kw(kw):
            self.error(f"expected {kw!r}", kw)
        return self.advance()

    def expect_ident(self) -> Token:
        if self.cur.kind is not Tok.ID:
            self.error("expected identifier", "identifier")
        return self.advance()

    def accept_op(self, op: str) -> Optional[Token]:
        return self.advance() if self.cur.is_op(op) else None

    def accept_kw(self, kw: str) -> Optional[Token]:
        return self.advance() if self.cur.is_kw(kw) else None

    # ---- expressions ----

    def expression(self) -> Expr:
        cond = self.binary(1)
        if self.cur.is_op("?"):
            self.advance()
            then = self.expression()
            self.expect_op(":")
            other = self.expression()
            return Ternary(cond, then, other, _span(cond.span, other.span))
        return cond

    def binary(self, min_prec: int) -> Expr:
        left = self.unary()
        while True:
            tok = self.cur
            if tok.kind is not Tok.OP or tok.text not in BINARY_PREC:
                return left
            prec = BINARY_PREC[tok.text]
            if prec < min_prec:
                return left
            self.advance()
            right = self.binary(prec + 1)
            left = Binary(tok.text, left, right, _span(left.span, right.span))

    def unary(self) -> Expr:
        tok = self.cur
        if tok.kind is Tok.OP and tok.text in UNARY_OPS:
            self.advance()
            operand = self.unary()
            return Unary(tok.text, operand, _span(tok.span, operand.span))
        return self.primary()

    def primary(self) -> Expr:
        tok = self.cur
        if tok.kind is Tok.NUM:
            self.advance()
            if self.cur.is_op("'") and self.peek().is_op("("):
                if not tok.text.isdigit():
                    self.error("bad cast width")
                self.advance()
                self.advance()
                inner = self.expression()
                close = self.expect_op(")")
                return Cast(int(tok.text), inner, _span(tok.span, close.span))
            try:
                value, width, wild = number_value(tok.text)
            except ValueError:
                raise HdlSyntaxError(f"malformed number {tok.text!r}", tok.span) from None
            return Number(value, width, wild, tok.text, tok.span)
        if tok.kind is Tok.ID:
            self.advance()
            ident = Ident(tok.text, tok.span)
            if self.cur.is_op("["):
                return self.select(ident)
            if self.cur.is_op("("):
                raise UnsupportedConstruct("function call", tok.span)
            return ident
        if tok.is_op("("):
            self.advance()
            inner = self.expression()
            self.expect_op(")")
            return inner
        if tok.is_op("{"):
            return self.concat()
        if tok.kind is Tok.SYS:
            if tok.text == "$past" and self.allow_past:
                self.advance()
                self.expect_op("(")
                arg = self.expression()
                if self.cur.is_op(","):
                    raise UnsupportedConstruct("$past with a cycle count", self.cur.span)
                close = self.expect_op(")")
                return Past(arg, _span(tok.span, close.span))
            raise UnsupportedConstruct(f"system function {tok.text}", tok.span)
        if tok.kind is Tok.DIRECTIVE:
            raise UnsupportedConstruct(f"macro use {tok.text}", tok.span)
        self.error("expected expression", "expression")

    def select(self, ident: Ident) -> Expr:
        self.expect_op("[")
        first = self.expression()
        if self.accept_op(":"):
            second = self.expression()
            close = self.expect_op("]")
            msb, lsb = self.fold_const(first), self.fold_const(second)
            if not isinstance(msb, Number) or not isinstance(lsb, Number):
                raise UnsupportedConstruct("non-constant part select", ident.span)
            return Slice(ident, msb, lsb, _span(ident.span, close.span))
        if self.cur.is_op("+") and self.peek().is_op(":") or self.cur.is_op("-") and self.peek().is_op(":"):
            raise UnsupportedConstruct("indexed part select", self.cur.span)
        close = self.expect_op("]")
        return Index(ident, self.fold_const(first), _span(ident.span, close.span))

    def fold_const(self, e: Expr) -> Expr:
        if isinstance(e, Number):
            return e
        v = const_value(e, self.params)
        if v is None:
            return e
        return Number(v, None, 0, str(v), e.span)

    def concat(self) -> Expr:
        open_ = self.expect_op("{")
        first = self.expression()
        if self.cur.is_op("{"):
            self.advance()
            parts = [self.expression()]
            while self.accept_op(","):
                parts.append(self.expression())
            self.expect_op("}")
            close = self.expect_op("}")
            count = self.fold_const(first)
            if not isinstance(count, Number):
                raise UnsupportedConstruct("non-constant replication count", first.span)
            return Repeat(count, tuple(parts), _span(open_.span, close.span))
        parts = [first]
        while self.accept_op(","):
            parts.append(self.expression())
        close = self.expect_op("}")
        return Concat(tuple(parts), _span(open_.span, close.span))

    def const_expr(self) -> int:
        e = self.expression()
        v = const_value(e, self.params)
        if v is None:
            raise HdlSyntaxError("expected a constant expression", e.span)
        return v


class RtlParser(TokenStream):
    def __init__(self, text: str, origin: str = "<string>", reset_pattern: str = DEFAULT_RESET_PATTERN):
        self.raw = to_internal(text)
        self.index = LineIndex(self.raw)
        super().__init__(tokenize(self.raw, self.index))
        self.origin = origin
        self.reset_rx = re.compile(reset_pattern)

    def parse(self) -> list[DesignUnit]:
        units = []
        while self.cur.kind is not Tok.EOF:
            tok = self.cur
            if tok.kind is Tok.DIRECTIVE:
                self.skip_directive()
            elif tok.is_kw("module"):
                units.append(self.module())
            elif tok.kind is Tok.KW and tok.text in UNSUPPORTED_ITEMS:
                raise UnsupportedConstruct(UNSUPPORTED_ITEMS[tok.text], tok.span)
            else:
                self.error("expected 'module'", "module")
        return units

    def skip_directive(self):
        tok = self.advance()
        if tok.text not in SKIPPED_DIRECTIVES:
            raise UnsupportedConstruct(f"compiler directive {tok.text}", tok.span)
        line = tok.span.start_line
        while self.cur.kind is not Tok.EOF and self.cur.span.start_line == line:
            self.advance()

    # ---- module ----

    def module(self) -> DesignUnit:
        start = self.expect_kw("module")
        name = self.expect_ident().text
        self.params = {}
        unit = DesignUnit(name, origin=self.origin, source=self.raw)
        if self.accept_op("#"):
            self.expect_op("(")
            if not self.cur.is_op(")"):
                self.accept_kw("parameter")
                unit.params.append(self.param_assignment(local=False, rng=self.opt_range()))
                while self.accept_op(","):
                    kw = self.accept_kw("parameter") or self.accept_kw("localparam")
                    rng = self.opt_range() if kw else None
                    unit.params.append(self.param_assignment(local=bool(kw and kw.text == "localparam"), rng=rng))
            self.expect_op(")")
        non_ansi: list[Token] = []
        if self.accept_op("("):
            if not self.cur.is_op(")"):
                if self.cur.kind is Tok.KW and self.cur.text in DIRECTIONS:
                    self.ansi_ports(unit)
                else:
                    non_ansi.append(self.expect_ident())
                    while self.accept_op(","):
                        non_ansi.append(self.expect_ident())
            self.expect_op(")")
        self.expect_op(";")
        pending = {t.text: t for t in non_ansi}
        while not self.cur.is_kw("endmodule"):
            if self.cur.kind is Tok.EOF:
                self.error("missing 'endmodule'", "endmodule")
            self.module_item(unit, pending)
        end = self.expect_kw("endmodule")
        if self.accept_op(":"):
            end = self.expect_ident()
        if pending:
            tok = next(iter(pending.values()))
            raise HdlSyntaxError(f"port {tok.text!r} has no direction declaration", tok.span)
        if non_ansi:
            order = {t.text: i for i, t in enumerate(non_ansi)}
            unit.ports.sort(key=lambda p: order[p.name])
        names = [p.name for p in unit.ports]
        if len(set(names)) != len(names):
            raise HdlSyntaxError(f"duplicate port in module {name}", start.span)
        unit.span = _span(start.span, end.span)
        return unit

    def opt_range(self) -> Optional[Range]:
        if not self.cur.is_op("["):
            return None
        self.advance()
        msb = self.fold_const(self.expression())
        self.expect_op(":")
        lsb = self.fold_const(self.expression())
        self.expect_op("]")
        return Range(msb, lsb)

    def range_width(self, rng: Optional[Range], at: Token) -> int:
        if rng is None:
            return 1
        msb, lsb = const_value(rng.msb, self.params), const_value(rng.lsb, self.params)
        if msb is None or lsb is None:
            raise HdlSyntaxError("range bounds must be constant", at.span)
        return abs(msb - lsb) + 1

    def param_assignment(self, local: bool, rng: Optional[Range]) -> Param:
        if self.cur.is_kw("signed") or self.cur.is_kw("integer"):
            raise UnsupportedConstruct("typed parameter", self.cur.span)
        name = self.expect_ident()
        self.expect_op("=")
        expr = self.expression()
        value = const_value(expr, self.params)
        if value is None:
            raise HdlSyntaxError(f"parameter {name.text!r} is not constant", expr.span)
        if rng is not None:
            width = self.range_width(rng, name)
        elif isinstance(expr, Number) and expr.width is not None:
            width = expr.width
        else:
            width = 32
        value &= (1 << width) - 1
        self.params[name.text] = (value, width)
        return Param(name.text, value, width, expr, local, rng, _span(name.span, expr.span))

    def ansi_ports(self, unit: DesignUnit):
        direction = kind = keyword = None
        rng = None
        while True:
            tok = self.cur
            if tok.kind is Tok.KW and tok.text in DIRECTIONS:
                self.advance()
                direction = DIRECTIONS[tok.text]
                keyword, rng = self.net_type()
                kind = "reg" if keyword in ("reg", "logic", "integer") else "wire"
            elif direction is None:
                self.error("expected port direction", *DIRECTIONS)
            name = self.expect_ident()
            self.no_unpacked_dims()
            width = 32 if keyword == "integer" else self.range_width(rng, name)
            unit.ports.append(PortDecl(name.text, direction, kind, width, rng, keyword,
                                       _span(tok.span, name.span)))
            if not self.accept_op(","):
                return

    def net_type(self) -> tuple[Optional[str], Optional[Range]]:
        keyword = None
        if self.cur.kind is Tok.KW and self.cur.text in NET_KEYWORDS:
            keyword = self.advance().text
        if self.cur.is_kw("signed"):
            raise UnsupportedConstruct("signed declaration", self.cur.span)
        rng = None if keyword == "integer" else self.opt_range()
        return keyword, rng

    def no_unpacked_dims(self):
        if self.cur.is_op("["):
            raise UnsupportedConstruct("unpacked array", self.cur.span)

    def module_item(self, unit: DesignUnit, pending: dict[str, Token]):
        tok = self.cur
        if tok.kind is Tok.KW:
            if tok.text in DIRECTIONS:
                self.port_declaration(unit, pending)
            elif tok.text in NET_KEYWORDS:
                self.net_declaration(unit)
            elif tok.text in ("parameter", "localparam"):
                self.advance()
                rng = self.opt_range()
                unit.params.append(self.param_assignment(tok.text == "localparam", rng))
                while self.accept_op(","):
                    unit.params.append(self.param_assignment(tok.text == "localparam", rng))
                self.expect_op(";")
            elif tok.text == "assign":
                self.continuous_assign(unit)
            elif tok.text in ("always", "always_ff", "always_comb"):
                unit.items.append(self.always())
            elif tok.text in UNSUPPORTED_ITEMS:
                raise UnsupportedConstruct(UNSUPPORTED_ITEMS[tok.text], tok.span)
            else:
                self.error("unexpected keyword in module body")
        elif tok.kind is Tok.ID and self.peek().kind in (Tok.ID,) or tok.kind is Tok.ID and self.peek().is_op("#"):
            raise UnsupportedConstruct("module instantiation", tok.span)
        elif tok.kind is Tok.DIRECTIVE:
            self.skip_directive()
        elif tok.is_op(";"):
            self.advance()
        else:
            self.error("expected module item")

    def port_declaration(self, unit: DesignUnit, pending: dict[str, Token]):
        tok = self.advance()
        direction = DIRECTIONS[tok.text]
        keyword, rng = self.net_type()
        kind = "reg" if keyword in ("reg", "logic", "integer") else "wire"
        while True:
            name = self.expect_ident()
            self.no_unpacked_dims()
            if name.text not in pending:
                raise HdlSyntaxError(f"{name.text!r} is not in the port list", name.span)
            del pending[name.text]
            width = 32 if keyword == "integer" else self.range_width(rng, name)
            unit.ports.append(PortDecl(name.text, direction, kind, width, rng, keyword,
                                       _span(tok.span, name.span)))
            if not self.accept_op(","):
                break
        self.expect_op(";")

    def net_declaration(self, unit: DesignUnit):
        tok = self.advance()
        keyword = tok.text
        if self.cur.is_kw("signed"):
            raise UnsupportedConstruct("signed declaration", self.cur.span)
        rng = None if keyword == "integer" else self.opt_range()
        kind = "wire" if keyword == "wire" else "reg"
        ports = {p.name: p for p in unit.ports}
        while True:
            name = self.expect_ident()
            self.no_unpacked_dims()
            width = 32 if keyword == "integer" else self.range_width(rng, name)
            if name.text in ports:
                port = ports[name.text]
                if rng is not None and width != port.width:
                    raise HdlSyntaxError(f"width mismatch redeclaring port {name.text!r}", name.span)
                port.kind = kind
                port.keyword = keyword
            else:
                if any(n.name == name.text for n in unit.nets):
                    raise HdlSyntaxError(f"duplicate declaration of {name.text!r}", name.span)
                unit.nets.append(NetDecl(name.text, kind, width, rng, keyword, _span(tok.span, name.span)))
            if self.cur.is_op("="):
                if keyword != "wire":
                    raise UnsupportedConstruct("variable initializer", self.cur.span)
                self.advance()
                rhs = self.expression()
                lhs = Ident(name.text, name.span)
                assign = Assign(lhs, rhs, False, _span(name.span, rhs.span))
                unit.items.append(ContinuousAssign(assign, _span(name.span, rhs.span)))
            if not self.accept_op(","):
                break
        self.expect_op(";")

    def continuous_assign(self, unit: DesignUnit):
        kw = self.expect_kw("assign")
        if self.cur.is_op("#"):
            raise UnsupportedConstruct("delay", self.cur.span)
        while True:
            lhs = self.lvalue()
            self.expect_op("=")
            rhs = self.expression()
            assign = Assign(lhs, rhs, False, _span(lhs.span, rhs.span))
            if self.cur.is_op(","):
                self.advance()
                unit.items.append(ContinuousAssign(assign, _span(kw.span, rhs.span)))
                continue
            end = self.expect_op(";")
            unit.items.append(ContinuousAssign(assign, _span(kw.span, end.span)))
            return

    # ---- processes ----

    def always(self) -> ProcBlock:
        kw = self.advance()
        events: list[Event] = []
        if kw.text == "always_comb":
            timing = TimingClass.ALWAYS_COMB
        else:
            timing = TimingClass.ALWAYS_FF if kw.text == "always_ff" else TimingClass.ALWAYS_PLAIN
            if not self.cur.is_op("@"):
                raise UnsupportedConstruct("always block without event control", kw.span)
            events = self.event_control()
        body = self.statement()
        block = ProcBlock(timing, events, body, span=_span(kw.span, body.span))
        self.classify_timing(block, kw)
        return block

    def event_control(self) -> list[Event]:
        self.expect_op("@")
        if self.accept_op("*"):
            return [Event(None, None)]
        self.expect_op("(")
        if self.cur.is_op("*"):
            self.advance()
            self.expect_op(")")
            return [Event(None, None)]
        events = []
        while True:
            edge = None
            if self.cur.is_kw("posedge") or self.cur.is_kw("negedge"):
                edge = self.advance().text
            events.append(Event(edge, self.expect_ident().text))
            if not (self.accept_kw("or") or self.accept_op(",")):
                break
        self.expect_op(")")
        return events

    def classify_timing(self, block: ProcBlock, kw: Token):
        edges = [e for e in block.events if e.edge]
        if not edges:
            if block.timing_class is TimingClass.ALWAYS_FF:
                raise HdlSyntaxError("always_ff requires an edge-triggered event control", kw.span)
            return
        if len(edges) != len(block.events):
            raise UnsupportedConstruct("mixed edge and level sensitivity", kw.span)
        reset = self.detect_reset(block.body, {e.signal for e in edges})
        clocks = [e for e in edges if reset is None or e.signal != reset.signal]
        if len(clocks) != 1:
            raise UnsupportedConstruct("multiple clocks in one process", kw.span)
        block.clock = ClockSpec(clocks[0].signal, clocks[0].edge)
        block.reset = reset

    def detect_reset(self, body: Stmt, edge_signals: set[str]) -> Optional[ResetSpec]:
        if isinstance(body, Block) and len(body.stmts) == 1:
            body = body.stmts[0]
        if not isinstance(body, If):
            return None
        found = reset_guard(body.cond, self.reset_rx)
        if found is None:
            return None
        signal, active_high = found
        return ResetSpec(signal, active_high, signal in edge_signals)

    # ---- statements ----

    def statement(self) -> Stmt:
        tok = self.cur
        if tok.is_kw("begin"):
            return self.block()
        if tok.is_kw("if"):
            return self.if_statement()
        if tok.is_kw("case") or tok.is_kw("casez"):
            return self.case_statement()
        if tok.is_kw("casex"):
            raise UnsupportedConstruct("casex", tok.span)
        if tok.is_kw("unique") or tok.is_kw("priority"):
            raise UnsupportedConstruct(f"{tok.text} qualifier", tok.span)
        if tok.is_op(";"):
            self.advance()
            return Block([], None, tok.span)
        if tok.kind is Tok.KW and tok.text in ("for", "while", "repeat", "forever"):
            raise UnsupportedConstruct(f"{tok.text} loop", tok.span)
        if tok.kind is Tok.SYS:
            raise UnsupportedConstruct(f"system task {tok.text}", tok.span)
        if tok.is_op("#"):
            raise UnsupportedConstruct("delay", tok.span)
        if tok.is_op("@"):
            raise UnsupportedConstruct("nested event control", tok.span)
        lhs = self.lvalue()
        if self.cur.is_op("<="):
            nonblocking = True
        elif self.cur.is_op("="):
            nonblocking = False
        else:
            self.error("expected '=' or '<='", "=", "<=")
        self.advance()
        if self.cur.is_op("#"):
            raise UnsupportedConstruct("intra-assignment delay", self.cur.span)
        rhs = self.expression()
        self.expect_op(";")
        return Assign(lhs, rhs, nonblocking, _span(lhs.span, rhs.span))

    def lvalue(self) -> Expr:
        tok = self.cur
        if tok.is_op("{"):
            raise UnsupportedConstruct("concatenation on the left-hand side", tok.span)
        name = self.expect_ident()
        ident = Ident(name.text, name.span)
        if self.cur.is_op("["):
            return self.select(ident)
        return ident

    def block(self) -> Block:
        start = self.expect_kw("begin")
        label = None
        if self.accept_op(":"):
            label = self.expect_ident().text
        stmts = []
        while not self.cur.is_kw("end"):
            if self.cur.kind is Tok.EOF:
                self.error("missing 'end'", "end")
            stmts.append(self.statement())
        end = self.expect_kw("end")
        if self.cur.is_op(":") and self.peek().kind is Tok.ID:
            self.advance()
            end = self.advance()
        return Block(stmts, label, _span(start.span, end.span))

    def if_statement(self) -> If:
        start = self.expect_kw("if")
        self.expect_op("(")
        cond = self.expression()
        self.expect_op(")")
        then = self.statement()
        other = None
        if self.accept_kw("else"):
            other = self.statement()
        last = other if other is not None else then
        return If(cond, then, other, _span(start.span, last.span))

    def case_statement(self) -> Case:
        start = self.advance()
        self.expect_op("(")
        subject = self.expression()
        self.expect_op(")")
        arms: list[CaseArm] = []
        default = None
        while not self.cur.is_kw("endcase"):
            if self.cur.kind is Tok.EOF:
                self.error("missing 'endcase'", "endcase")
            if self.cur.is_kw("default"):
                tok = self.advance()
                self.accept_op(":")
                if default is not None:
                    raise HdlSyntaxError("duplicate default arm", tok.span)
                default = self.statement()
                continue
            labels = [self.case_label()]
            while self.accept_op(","):
                labels.append(self.case_label())
            self.expect_op(":")
            body = self.statement()
            arms.append(CaseArm(labels, body, _span(labels[0].span, body.span)))
        end = self.expect_kw("endcase")
        return Case(subject, arms, default, start.text, _span(start.span, end.span))

    def case_label(self) -> Expr:
        label = self.expression()
        if const_value(label, self.params) is None and not isinstance(label, Number):
            raise HdlSyntaxError("case labels must be constant expressions", label.span)
        return label


def reset_guard(cond: Expr, rx: re.Pattern) -> Optional[tuple[str, bool]]:
    """Recognise ``rst``, ``!rst``, ``~rst``, ``rst == 0`` style reset tests."""
    if isinstance(cond, Ident) and rx.search(cond.name):
        return cond.name, True
    if isinstance(cond, Unary) and cond.op in ("!", "~") and isinstance(cond.operand, Ident):
        if rx.search(cond.operand.name):
            return cond.operand.name, False
    if isinstance(cond, Binary) and cond.op in ("==", "!=") and isinstance(cond.left, Ident) \
            and isinstance(cond.right, Number) and rx.search(cond.left.name):
        high = bool(cond.right.value) == (cond.op == "==")
        return cond.left.name, high
    return None


def parse_source(text: str, origin: str = "<string>", reset_pattern: str = DEFAULT_RESET_PATTERN) -> list[DesignUnit]:
    """Parse RTL text into design units with span-annotated bodies."""
    return RtlParser(text, origin, reset_pattern).parse()


def parse_file(path, reset_pattern: str = DEFAULT_RESET_PATTERN) -> list[DesignUnit]:
    from pathlib import Path

    p = Path(path)
    return parse_source(p.read_text(encoding="utf-8"), p.name, reset_pattern)


def parse_expression(text: str, params: Optional[dict[str, tuple[int, int]]] = None,
                     allow_past: bool = True) -> Expr:
    raw = to_internal(text)
    stream = TokenStream(tokenize(raw), dict(params or {}), allow_past=allow_past)
    e = stream.expression()
    if stream.cur.kind is not Tok.EOF:
        stream.error("trailing input after expression")
    return e
