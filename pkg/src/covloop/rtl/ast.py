"""Source-spanned AST for the supported Verilog/SystemVerilog subset.

Spans never take part in equality, so two trees compare equal when they have
the same structure regardless of formatting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union


@dataclass(frozen=True, order=True)
class SourceSpan:
    """1-based line/byte-column coordinates; the end column is exclusive."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    @property
    def start(self) -> tuple[int, int]:
        return (self.start_line, self.start_col)

    @property
    def end(self) -> tuple[int, int]:
        return (self.end_line, self.end_col)

    def contains(self, other: "SourceSpan") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "SourceSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def cover(self, other: "SourceSpan") -> "SourceSpan":
        lo = min(self.start, other.start)
        hi = max(self.end, other.end)
        return SourceSpan(lo[0], lo[1], hi[0], hi[1])

    def __str__(self) -> str:
        return f"{self.start_line}.{self.start_col}-{self.end_line}.{self.end_col}"


NO_SPAN = SourceSpan(0, 0, 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


# ---- expressions ----

@dataclass(frozen=True)
class Ident:
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Number:
    value: int
    width: Optional[int] = None  # None: unsized (32 bit)
    wild: int = 0                # x/z/? bit positions
    text: str = field(default="", compare=False)
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Concat:
    parts: tuple["Expr", ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Repeat:
    count: "Expr"
    parts: tuple["Expr", ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Index:
    base: Ident
    index: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Slice:
    base: Ident
    msb: "Expr"
    lsb: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Past:
    """``$past(arg)``; only legal inside properties."""

    arg: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Cast:
    """Size cast ``W'(expr)``; only emitted in properties."""

    width: int
    expr: "Expr"
    span: SourceSpan = _span()


Expr = Union[Ident, Number, Unary, Binary, Ternary, Concat, Repeat, Index, Slice, Past, Cast]

TRUE = Number(1, 1, 0, "1'b1")
FALSE = Number(0, 1, 0, "1'b0")


def children(e: Expr) -> tuple:
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Ternary):
        return (e.cond, e.then, e.other)
    if isinstance(e, Concat):
        return e.parts
    if isinstance(e, Repeat):
        return (e.count,) + e.parts
    if isinstance(e, Index):
        return (e.base, e.index)
    if isinstance(e, Slice):
        return (e.base, e.msb, e.lsb)
    if isinstance(e, (Past, )):
        return (e.arg,)
    if isinstance(e, Cast):
        return (e.expr,)
    return ()


def walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk_expr(c)


def identifiers(e: Expr) -> list[str]:
    """Identifier names in first-appearance order, without duplicates."""
    seen: dict[str, None] = {}
    for node in walk_expr(e):
        if isinstance(node, Ident):
            seen.setdefault(node.name)
    return list(seen)


def lhs_name(e: Expr) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, (Index, Slice)):
        return e.base.name
    raise TypeError(f"not an assignable expression: {e!r}")


# ---- statements ----

@dataclass
class Assign:
    lhs: Expr
    rhs: Expr
    nonblocking: bool
    span: SourceSpan = _span()


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"] = None
    span: SourceSpan = _span()


@dataclass
class CaseArm:
    labels: list[Expr]
    body: "Stmt"
    span: SourceSpan = _span()


@dataclass
class Case:
    subject: Expr
    arms: list[CaseArm]
    default: Optional["Stmt"] = None
    kind: str = "case"  # case | casez
    span: SourceSpan = _span()


@dataclass
class Block:
    stmts: list["Stmt"]
    label: Optional[str] = None
    span: SourceSpan = _span()


Stmt = Union[Assign, If, Case, Block]


def walk_stmt(s: Stmt) -> Iterator[Stmt]:
    yield s
    if isinstance(s, If):
        yield from walk_stmt(s.then)
        if s.other is not None:
            yield from walk_stmt(s.other)
    elif isinstance(s, Case):
        for arm in s.arms:
            yield from walk_stmt(arm.body)
        if s.default is not None:
            yield from walk_stmt(s.default)
    elif isinstance(s, Block):
        for c in s.stmts:
            yield from walk_stmt(c)


def assigned_names(s: Stmt) -> list[str]:
    seen: dict[str, None] = {}
    for node in walk_stmt(s):
        if isinstance(node, Assign):
            seen.setdefault(lhs_name(node.lhs))
    return list(seen)


# ---- module items ----

class TimingClass(str, Enum):
    ALWAYS_FF = "ALWAYS_FF"
    ALWAYS_COMB = "ALWAYS_COMB"
    ALWAYS_PLAIN = "ALWAYS_PLAIN"


@dataclass(frozen=True)
class Event:
    edge: Optional[str]  # posedge | negedge | None (level / star)
    signal: Optional[str]  # None means ``*``


@dataclass(frozen=True)
class ClockSpec:
    signal: str
    edge: str = "posedge"


@dataclass(frozen=True)
class ResetSpec:
    signal: str
    active_high: bool
    asynchronous: bool


@dataclass
class ProcBlock:
    timing_class: TimingClass
    events: list[Event]
    body: Stmt
    clock: Optional[ClockSpec] = None
    reset: Optional[ResetSpec] = None
    span: SourceSpan = _span()

    @property
    def clocked(self) -> bool:
        return self.clock is not None

    @property
    def timing_name(self) -> str:
        return {"ALWAYS_FF": "always_ff", "ALWAYS_COMB": "always_comb",
                "ALWAYS_PLAIN": "always"}[self.timing_class.value]


@dataclass
class ContinuousAssign:
    assign: Assign
    span: SourceSpan = _span()


Item = Union[ProcBlock, ContinuousAssign]


@dataclass
class Range:
    msb: Expr
    lsb: Expr


@dataclass
class PortDecl:
    name: str
    direction: str  # in | out | inout
    kind: str       # wire | reg
    width: int
    range: Optional[Range] = None
    keyword: Optional[str] = field(default=None, compare=False)  # for printing only
    span: SourceSpan = _span()


@dataclass
class NetDecl:
    name: str
    kind: str
    width: int
    range: Optional[Range] = None
    keyword: str = "wire"
    span: SourceSpan = _span()


@dataclass
class Param:
    name: str
    value: int
    width: int
    expr: Expr
    local: bool = False
    range: Optional[Range] = None
    span: SourceSpan = _span()


@dataclass
class DesignUnit:
    name: str
    ports: list[PortDecl] = field(default_factory=list)
    params: list[Param] = field(default_factory=list)
    nets: list[NetDecl] = field(default_factory=list)
    items: list[Item] = field(default_factory=list)
    span: SourceSpan = _span()
    origin: str = field(default="", compare=False)
    source: str = field(default="", compare=False, repr=False)

    @property
    def port_names(self) -> list[str]:
        return [p.name for p in self.ports]

    def param_map(self) -> dict[str, Param]:
        return {p.name: p for p in self.params}

    def proc_blocks(self) -> list[ProcBlock]:
        return [i for i in self.items if isinstance(i, ProcBlock)]
