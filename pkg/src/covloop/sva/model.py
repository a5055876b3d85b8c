"""Property data model, rendering and the single-outcome form rules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..errors import FormViolation, UnavailableSignal
from ..rtl.ast import TRUE, Binary, ClockSpec, Expr, Past, SourceSpan, identifiers, walk_expr
from ..rtl.exprs import render


class PropKind(str, Enum):
    ASSERT = "ASSERT"
    COVER = "COVER"
    ASSUME = "ASSUME"


class ImplOp(str, Enum):
    OVERLAP = "|->"
    NONOVERLAP = "|=>"
    OVERLAP_DELAY = "|-> ##"


@dataclass(frozen=True)
class Trace:
    file: str
    locations: tuple[SourceSpan, ...]
    iteration: int

    def comments(self) -> list[str]:
        return [f"// COV {self.file}:{loc} iter={self.iteration}" for loc in self.locations]


@dataclass
class SvaProperty:
    """One property: ``clock [disable] antecedent op consequent``.

    Without an implication (``op is None``) the body is the single expression in
    ``consequent``; covers generated here always take that shape.
    """

    name: str
    kind: PropKind
    clock: ClockSpec
    consequent: Expr
    antecedent: Optional[Expr] = None
    op: Optional[ImplOp] = None
    delay: int = 1
    disable: Optional[Expr] = None
    trace: Optional[Trace] = None
    clock_text: Optional[str] = None    # macro spelling of the clocking event
    disable_text: Optional[str] = None  # macro spelling of the disable clause
    targets: tuple[str, ...] = field(default=(), compare=False)

    @property
    def horizon(self) -> int:
        """Cycle offset of the consequent relative to the antecedent."""
        if self.op is ImplOp.NONOVERLAP:
            return 1
        if self.op is ImplOp.OVERLAP_DELAY:
            return self.delay
        return 0

    def op_text(self) -> str:
        if self.op is None:
            return ""
        if self.op is ImplOp.OVERLAP_DELAY:
            return f"|-> ##{self.delay}"
        return self.op.value

    def expressions(self) -> list[Expr]:
        out = [self.consequent]
        if self.antecedent is not None:
            out.insert(0, self.antecedent)
        if self.disable is not None:
            out.append(self.disable)
        return out

    def signals(self) -> list[str]:
        seen: dict[str, None] = {self.clock.signal: None}
        for e in self.expressions():
            for n in identifiers(e):
                seen.setdefault(n)
        return list(seen)


def clock_text(p: SvaProperty) -> str:
    return p.clock_text or f"@({p.clock.edge} {p.clock.signal})"


def disable_text(p: SvaProperty) -> Optional[str]:
    if p.disable_text:
        return p.disable_text
    if p.disable is None:
        return None
    return f"disable iff ({render(p.disable)})"


def body_text(p: SvaProperty) -> str:
    """Antecedent and consequent are parenthesised together, or both left bare
    when the antecedent is the literal ``1'b1``."""
    if p.op is None:
        return render(p.consequent)
    if p.antecedent is None or p.antecedent == TRUE:
        return f"1'b1 {p.op_text()} {render(p.consequent)}"
    return f"({render(p.antecedent)}) {p.op_text()} ({render(p.consequent)})"


def directive(kind: PropKind) -> str:
    return {"ASSERT": "assert", "COVER": "cover", "ASSUME": "assume"}[kind.value]


def render_property(p: SvaProperty, with_trace: bool = True) -> str:
    lines = list(p.trace.comments()) if (with_trace and p.trace) else []
    header = clock_text(p)
    dis = disable_text(p)
    if dis:
        header += " " + dis
    lines += [f"property {p.name};", header, body_text(p) + ";", "endproperty",
              f"{directive(p.kind)} property ({p.name});"]
    return "\n".join(lines) + "\n"


def normalized_body(p: SvaProperty) -> str:
    """Canonical text used for duplicate detection; ignores name, spacing and parens."""
    parts = [
        p.kind.value,
        f"{p.clock.edge} {p.clock.signal}",
        render(p.disable) if p.disable is not None else "",
        render(p.antecedent if p.antecedent is not None else TRUE) if p.op else "",
        p.op_text(),
        render(p.consequent),
    ]
    return "|".join(parts)


# ---- form and resource checks ----


def check_form(p: SvaProperty) -> None:
    """Asserts and assumes need exactly one implication whose consequent is a
    single outcome; covers are witnesses and take a plain expression."""
    if p.kind is PropKind.COVER:
        if p.op is not None:
            raise FormViolation(f"{p.name}: cover must be a plain expression")
        _no_past_chain(p)
        return
    if p.op is None or p.antecedent is None:
        raise FormViolation(f"{p.name}: exactly one implication is required")
    if p.op is ImplOp.OVERLAP_DELAY and p.delay < 1:
        raise FormViolation(f"{p.name}: ##N needs N >= 1")
    c = p.consequent
    if isinstance(c, Binary) and c.op in ("&&", "||"):
        raise FormViolation(f"{p.name}: consequent must be a single outcome, not a chain")
    _no_past_chain(p)


def _no_past_chain(p: SvaProperty) -> None:
    for e in p.expressions():
        for n in walk_expr(e):
            if isinstance(n, Past) and any(isinstance(m, Past) for m in walk_expr(n.arg) if m is not n):
                raise FormViolation(f"{p.name}: nested $past is not supported")


def check_signals(p: SvaProperty, available: set[str]) -> None:
    for name in p.signals():
        if name not in available:
            raise UnavailableSignal(name)
