"""Tokenizer shared by the RTL and SVA front ends.

Source text is handled as UTF-8 bytes decoded through latin-1, so every
character index is a byte offset and columns come out in bytes.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from enum import Enum, auto

from ..errors import HdlSyntaxError
from .ast import SourceSpan


class Tok(Enum):
    ID = auto()
    KW = auto()
    NUM = auto()
    SYS = auto()        # $past, $error, ...
    DIRECTIVE = auto()  # `define, `CLK, ...
    STRING = auto()
    OP = auto()
    EOF = auto()


KEYWORDS = frozenset("""
    module endmodule input output inout wire reg logic integer signed
    parameter localparam assign always always_ff always_comb always_latch
    posedge negedge or begin end if else case casez casex endcase default
    initial function endfunction task endtask generate endgenerate genvar for
    while repeat forever interface endinterface class endclass package
    endpackage typedef enum struct union unique priority
    property endproperty sequence endsequence assert assume cover disable iff
    bind not
""".split())

OPERATORS = [
    "<<<", ">>>", "===", "!==", "|->", "|=>",
    "##", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~", "**", "->",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":", ";",
    ",", ".", "(", ")", "[", "]", "{", "}", "@", "#", "'",
]

_NUMBER = re.compile(
    r"(?:(?P<size>\d[\d_]*)\s*)?'(?P<signed>[sS])?(?P<base>[bBoOdDhH])\s*(?P<digits>[0-9a-fA-FxXzZ?_]+)"
    r"|(?P<plain>\d[\d_]*)"
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYS = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")
_DIRECTIVE = re.compile(r"`[A-Za-z_][A-Za-z0-9_]*")
_STRING = re.compile(r'"(?:[^"\\\n]|\\.)*"')
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class Token:
    kind: Tok
    text: str
    pos: int
    end: int
    span: SourceSpan

    def is_op(self, *ops: str) -> bool:
        return self.kind is Tok.OP and self.text in ops

    def is_kw(self, *kws: str) -> bool:
        return self.kind is Tok.KW and self.text in kws


def to_internal(text: str) -> str:
    """Map a unicode string onto a byte-per-character string."""
    return text.encode("utf-8").decode("latin-1")


def from_internal(text: str) -> str:
    return text.encode("latin-1").decode("utf-8", errors="replace")


class LineIndex:
    """Offset <-> (line, byte column) conversion for one source text."""

    def __init__(self, raw: str):
        self.raw = raw
        self.starts = [0] + [m.end() for m in re.finditer("\n", raw)]

    def position(self, pos: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.starts, pos) - 1
        return line + 1, pos - self.starts[line] + 1

    def offset(self, line: int, col: int) -> int:
        if line < 1 or line > len(self.starts):
            raise IndexError(line)
        return self.starts[line - 1] + col - 1

    def span(self, start: int, end: int) -> SourceSpan:
        sl, sc = self.position(start)
        el, ec = self.position(end)
        return SourceSpan(sl, sc, el, ec)


def tokenize(raw: str, index: LineIndex | None = None, keywords=KEYWORDS) -> list[Token]:
    """Tokenize an internal (byte-per-char) string. Comments are dropped."""
    index = index or LineIndex(raw)
    tokens: list[Token] = []
    pos, n = 0, len(raw)
    while pos < n:
        m = _SPACE.match(raw, pos)
        if m:
            pos = m.end()
            continue
        if raw.startswith("//", pos):
            nl = raw.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        if raw.startswith("/*", pos):
            close = raw.find("*/", pos + 2)
            if close < 0:
                raise HdlSyntaxError("unterminated block comment", index.span(pos, pos + 2))
            pos = close + 2
            continue

        for kind, rx in ((Tok.NUM, _NUMBER), (Tok.SYS, _SYS), (Tok.DIRECTIVE, _DIRECTIVE),
                         (Tok.STRING, _STRING)):
            m = rx.match(raw, pos)
            if m:
                break
        else:
            m = None
        if m is None:
            m = _IDENT.match(raw, pos)
            if m:
                kind = Tok.KW if m.group() in keywords else Tok.ID
        if m is None:
            for op in OPERATORS:
                if raw.startswith(op, pos):
                    tokens.append(Token(Tok.OP, op, pos, pos + len(op), index.span(pos, pos + len(op))))
                    pos += len(op)
                    break
            else:
                raise HdlSyntaxError(f"unexpected character {raw[pos]!r}", index.span(pos, pos + 1))
            continue
        tokens.append(Token(kind, m.group(), pos, m.end(), index.span(pos, m.end())))
        pos = m.end()
    tokens.append(Token(Tok.EOF, "", n, n, index.span(n, n)))
    return tokens


def number_value(text: str) -> tuple[int, int | None, int]:
    """Decode a literal into (value, width or None if unsized, wildcard bit mask)."""
    m = _NUMBER.fullmatch(text)
    if m is None:
        raise ValueError(text)
    if m.group("plain") is not None:
        return int(m.group("plain").replace("_", "")), None, 0
    width = int(m.group("size").replace("_", "")) if m.group("size") else None
    base = m.group("base").lower()
    digits = m.group("digits").replace("_", "").lower()
    if base == "d":
        if any(c in "xz?" for c in digits):
            w = width or 32
            return 0, width, (1 << w) - 1
        value, wild = int(digits), 0
    else:
        bits = {"b": 1, "o": 3, "h": 4}[base]
        value = wild = 0
        for c in digits:
            value <<= bits
            wild <<= bits
            if c in "xz?":
                wild |= (1 << bits) - 1
            else:
                value |= int(c, 16)
    if width is not None:
        mask = (1 << width) - 1
        value &= mask
        wild &= mask
    return value, width, wild
