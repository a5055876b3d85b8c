"""Reader for SVA files: macros, parameters, signal declarations and properties."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..errors import CovloopError, HdlSyntaxError, SvaParseError, UnsupportedConstruct
from ..rtl.ast import ClockSpec, SourceSpan
from ..rtl.lexer import Tok, to_internal, tokenize
from ..rtl.parser import TokenStream
from .model import ImplOp, PropKind, SvaProperty, Trace, normalized_body

_DEFINE = re.compile(r"^\s*`define\s+([A-Za-z_]\w*)(\([^)]*\))?\s*(.*?)\s*$")
_MACRO_USE = re.compile(r"`([A-Za-z_]\w*)")
_COV = re.compile(r"^\s*//\s*COV\s+(\S+?):(\d+)\.(\d+)-(\d+)\.(\d+)\s+iter=(\d+)\s*$")
_PROPERTY_HEAD = re.compile(r"^\s*property\s+([A-Za-z_]\w*)")
_CLOCK_BODY = re.compile(r"^@\s*\(\s*(posedge|negedge)\s+([A-Za-z_]\w*)\s*\)$")
DISABLE_BODY = re.compile(r"^disable\s+iff\s*\((.*)\)$")
_IGNORED_DIRECTIVES = {"timescale", "default_nettype", "resetall", "ifdef", "ifndef", "else",
                       "endif", "undef", "include"}
_DECL_WORDS = {"input", "output", "inout", "wire", "logic", "reg"}
_TYPE_IDS = {"bit"}


@dataclass(frozen=True)
class Macro:
    name: str
    body: str


@dataclass
class SvaResources:
    signals: list[str] = field(default_factory=list)
    macros: list[Macro] = field(default_factory=list)
    parameters: list[tuple[str, int]] = field(default_factory=list)
    existing_properties: list[tuple[str, str]] = field(default_factory=list)
    delay_style: Optional[int] = None  # N when the file already uses ``|-> ##N``

    def names(self) -> set[str]:
        return set(self.signals) | {m.name for m in self.macros} | {p for p, _ in self.parameters}

    def existing_names(self) -> set[str]:
        return {n for n, _ in self.existing_properties}

    def existing_bodies(self) -> dict[str, str]:
        return {b: n for n, b in self.existing_properties}

    def clock_macro(self) -> Optional[tuple[Macro, ClockSpec]]:
        for m in self.macros:
            hit = _CLOCK_BODY.match(m.body)
            if hit:
                return m, ClockSpec(hit.group(2), hit.group(1))
        return None

    def disable_macro(self) -> Optional[Macro]:
        for m in self.macros:
            if DISABLE_BODY.match(m.body):
                return m
        return None

    def merged(self, signals=(), parameters=()) -> "SvaResources":
        """Copy extended with design signals/parameters (the SVA binds into the RTL scope)."""
        sig = list(self.signals) + [s for s in signals if s not in self.signals]
        have = {p for p, _ in self.parameters}
        par = list(self.parameters) + [p for p in parameters if p[0] not in have]
        return SvaResources(sig, list(self.macros), par, list(self.existing_properties), self.delay_style)


@dataclass
class SvaFile:
    macros: list[Macro]
    parameters: list[tuple[str, int]]
    signals: list[str]
    properties: list[SvaProperty]      # declared or inline, in file order
    directives: dict[str, PropKind]    # property name -> directive kind

    def resources(self) -> SvaResources:
        existing = [(p.name, normalized_body(p)) for p in self.properties]
        delays = [p.delay for p in self.properties if p.op is ImplOp.OVERLAP_DELAY]
        return SvaResources(list(self.signals), list(self.macros), list(self.parameters),
                            existing, delays[0] if delays else None)

    def checked_properties(self) -> list[SvaProperty]:
        """Properties bound to an assert/cover/assume directive."""
        return [p for p in self.properties if p.name in self.directives]


def _expand_macros(text: str) -> tuple[str, list[Macro], dict[int, list[tuple[str, str]]]]:
    """Line-preserving expansion of argument-free macros.

    Returns the expanded text, the macro list and, per line, the macro uses
    (name, body) so callers can recover the original spelling.
    """
    macros: dict[str, Macro] = {}
    out_lines = []
    uses: dict[int, list[tuple[str, str]]] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        m = _DEFINE.match(line)
        if m:
            name, args, body = m.groups()
            if args:
                raise SvaParseError(f"macro {name} with arguments is not supported", lineno)
            if name in macros:
                raise SvaParseError(f"macro {name} defined twice", lineno)
            macros[name] = Macro(name, body)
            out_lines.append("")
            continue

        def sub(hit, lineno=lineno):
            name = hit.group(1)
            if name in macros:
                uses.setdefault(lineno, []).append((name, macros[name].body))
                return macros[name].body
            if name in _IGNORED_DIRECTIVES:
                return ""
            raise SvaParseError(f"undefined macro `{name}", lineno)

        code, sep, comment = line.partition("//")
        if re.match(r"^\s*`(ifdef|ifndef|else|endif|undef|include|timescale|default_nettype|resetall)\b", code):
            out_lines.append("")
            continue
        out_lines.append(_MACRO_USE.sub(sub, code) + (sep + comment if sep else ""))
    return "\n".join(out_lines), list(macros.values()), uses


def _traces(text: str) -> dict[str, Trace]:
    """Trace comments directly above each ``property NAME;`` line."""
    out: dict[str, Trace] = {}
    pending: list[tuple] = []
    for line in text.split("\n"):
        hit = _COV.match(line)
        if hit:
            pending.append(hit.groups())
            continue
        head = _PROPERTY_HEAD.match(line)
        if head and pending:
            file = pending[0][0]
            locs = tuple(SourceSpan(int(a), int(b), int(c), int(d)) for _, a, b, c, d, _ in pending)
            out[head.group(1)] = Trace(file, locs, int(pending[0][5]))
        if line.strip():
            pending = []
    return out


class _SvaParser(TokenStream):
    def __init__(self, text: str):
        expanded, self.macros, self.uses = _expand_macros(text)
        try:
            tokens = tokenize(to_internal(expanded))
        except HdlSyntaxError as exc:
            raise SvaParseError(str(exc), _line(exc)) from None
        super().__init__(tokens, {}, allow_past=True)
        self.traces = _traces(text)
        self.signals: list[str] = []
        self.parameters: list[tuple[str, int]] = []
        self.properties: list[SvaProperty] = []
        self.directives: dict[str, PropKind] = {}
        self.inline = 0

    def fail(self, msg: str):
        raise SvaParseError(msg, self.cur.span.start_line if self.cur.span else None)

    def parse(self) -> SvaFile:
        try:
            while self.cur.kind is not Tok.EOF:
                self.item()
        except (HdlSyntaxError, UnsupportedConstruct) as exc:
            raise SvaParseError(str(exc), _line(exc)) from None
        names = [p.name for p in self.properties]
        for n in self.directives:
            if n not in names:
                raise SvaParseError(f"directive refers to unknown property {n}")
        for p in self.properties:
            if p.name in self.directives:
                p.kind = self.directives[p.name]
        return SvaFile(self.macros, self.parameters, self.signals, self.properties, self.directives)

    # ---- items ----

    def item(self):
        tok = self.cur
        if tok.is_kw("module"):
            self.advance()
            self.expect_ident()
            if self.accept_op("#"):
                self.expect_op("(")
                self.header_params()
            if self.accept_op("("):
                self.port_list()
            self.expect_op(";")
        elif tok.is_kw("endmodule"):
            self.advance()
        elif tok.is_kw("parameter", "localparam"):
            self.advance()
            self.param_list(";")
        elif tok.kind is Tok.KW and tok.text in _DECL_WORDS or tok.kind is Tok.ID and tok.text in _TYPE_IDS:
            self.declaration()
        elif tok.is_kw("property"):
            self.property_decl()
        elif tok.is_kw("assert", "assume", "cover"):
            self.directive(None)
        elif tok.kind is Tok.ID and self.peek().is_op(":"):
            label = self.advance().text
            self.advance()
            if not self.cur.is_kw("assert", "assume", "cover"):
                self.fail("expected assert, assume or cover after label")
            self.directive(label)
        elif tok.is_kw("bind"):
            while not self.cur.is_op(";"):
                if self.cur.kind is Tok.EOF:
                    self.fail("unterminated bind")
                self.advance()
            self.advance()
        elif tok.is_op(";"):
            self.advance()
        else:
            self.fail(f"unsupported item {tok.text!r} in SVA file")

    def header_params(self):
        while True:
            self.accept_kw("parameter")
            self.one_param()
            if not self.accept_op(","):
                break
        self.expect_op(")")

    def param_list(self, _stop: str):
        self.one_param()
        while self.accept_op(","):
            self.one_param()
        self.expect_op(";")

    def one_param(self):
        if self.cur.is_op("["):
            self.skip_brackets()
        if self.cur.kind is Tok.ID and self.peek().kind is Tok.ID:
            self.advance()  # type name such as int
        name = self.expect_ident().text
        self.expect_op("=")
        value = self.const_expr()
        self.params[name] = (value, max(value.bit_length(), 1))
        self.parameters.append((name, value))

    def skip_brackets(self):
        self.expect_op("[")
        depth = 1
        while depth:
            if self.cur.kind is Tok.EOF:
                self.fail("unbalanced brackets")
            if self.cur.is_op("["):
                depth += 1
            elif self.cur.is_op("]"):
                depth -= 1
            self.advance()

    def port_list(self):
        while not self.cur.is_op(")"):
            tok = self.cur
            if tok.kind is Tok.EOF:
                self.fail("unterminated port list")
            if tok.is_op("["):
                self.skip_brackets()
                continue
            if tok.kind is Tok.ID and (self.peek().is_op(",") or self.peek().is_op(")")):
                self.add_signal(tok.text)
            self.advance()
        self.advance()

    def declaration(self):
        while not self.cur.is_op(";"):
            tok = self.cur
            if tok.kind is Tok.EOF:
                self.fail("unterminated declaration")
            if tok.is_op("["):
                self.skip_brackets()
                continue
            if tok.kind is Tok.ID and tok.text not in _TYPE_IDS and \
                    (self.peek().is_op(",") or self.peek().is_op(";") or self.peek().is_op("=")):
                self.add_signal(tok.text)
                if self.peek().is_op("="):
                    self.advance()
                    self.advance()
                    self.expression()
                    continue
            self.advance()
        self.advance()

    def add_signal(self, name: str):
        if name not in self.signals:
            self.signals.append(name)

    # ---- properties ----

    def property_decl(self):
        start = self.advance()
        name = self.expect_ident().text
        self.expect_op(";")
        line = start.span.start_line
        prop = self.property_spec(name, line, ";")
        self.expect_op(";")
        self.expect_kw("endproperty")
        if any(p.name == name for p in self.properties):
            raise SvaParseError(f"property {name} declared twice", line)
        self.properties.append(prop)

    def directive(self, label: Optional[str]):
        tok = self.advance()
        kind = {"assert": PropKind.ASSERT, "assume": PropKind.ASSUME, "cover": PropKind.COVER}[tok.text]
        self.expect_kw("property")
        self.expect_op("(")
        if self.cur.kind is Tok.ID and self.peek().is_op(")"):
            name = self.advance().text
            self.advance()
            if name in self.directives:
                raise SvaParseError(f"property {name} bound twice", tok.span.start_line)
            self.directives[name] = kind
        else:
            self.inline += 1
            name = label or f"_inline_{self.inline}"
            prop = self.property_spec(name, tok.span.start_line, ")")
            prop.kind = kind
            self.expect_op(")")
            self.properties.append(prop)
            self.directives[name] = kind
        # optional action block up to the terminating semicolon
        if self.cur.is_kw("else"):
            while not self.cur.is_op(";"):
                if self.cur.kind is Tok.EOF:
                    self.fail("unterminated action block")
                self.advance()
        self.expect_op(";")

    def property_spec(self, name: str, line: int, _stop: str) -> SvaProperty:
        if not self.cur.is_op("@"):
            self.fail(f"property {name} has no clocking event")
        clock_line = self.cur.span.start_line
        self.advance()
        self.expect_op("(")
        edge_tok = self.cur
        if not edge_tok.is_kw("posedge", "negedge"):
            self.fail("expected posedge or negedge")
        self.advance()
        clk = self.expect_ident().text
        self.expect_op(")")
        clock = ClockSpec(clk, edge_tok.text)
        clock_text = self.macro_spelling(clock_line, _CLOCK_BODY)
        disable = None
        disable_text = None
        if self.cur.is_kw("disable"):
            dis_line = self.cur.span.start_line
            self.advance()
            self.expect_kw("iff")
            self.expect_op("(")
            disable = self.expression()
            self.expect_op(")")
            disable_text = self.macro_spelling(dis_line, DISABLE_BODY)
        first = self.expression()
        op = None
        delay = 1
        antecedent = None
        consequent = first
        if self.cur.is_op("|->") or self.cur.is_op("|=>"):
            op_tok = self.advance()
            antecedent = first
            if op_tok.text == "|->" and self.cur.is_op("##"):
                self.advance()
                if self.cur.kind is not Tok.NUM or not self.cur.text.isdigit():
                    self.fail("expected a cycle count after ##")
                delay = int(self.advance().text)
                op = ImplOp.OVERLAP_DELAY
            else:
                op = ImplOp.OVERLAP if op_tok.text == "|->" else ImplOp.NONOVERLAP
            consequent = self.expression()
        if self.cur.is_op("##") or self.cur.is_op("|->") or self.cur.is_op("|=>"):
            self.fail("only a single implication is supported")
        if self.cur.kind is Tok.KW and self.cur.text in ("and", "or", "not", "iff"):
            self.fail(f"property operator {self.cur.text!r} is not supported")
        return SvaProperty(name, PropKind.ASSERT, clock, consequent, antecedent, op, delay,
                           disable, self.traces.get(name), clock_text, disable_text)

    def macro_spelling(self, line: int, pattern: re.Pattern) -> Optional[str]:
        for mname, body in self.uses.get(line, []):
            if pattern.match(body):
                return f"`{mname}"
        return None


def _line(exc: CovloopError) -> Optional[int]:
    span = getattr(exc, "span", None)
    return span.start_line if span else None


def parse_sva(text: str) -> SvaFile:
    return _SvaParser(text).parse()


def scan_resources(text: str) -> SvaResources:
    return parse_sva(text).resources()
