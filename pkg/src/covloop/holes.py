"""Coverage hole analysis: classification, slicing, context records, consolidation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from .coverage import CoverageReport, CoverageTarget, Guard, Status, TargetKind, enumerate_targets
from .errors import SchemaError, SpanOutOfRange, UnknownTarget
from .rtl.ast import (
    TRUE, Assign, Block, Case, ClockSpec, ContinuousAssign, DesignUnit, Expr, Ident, If,
    Number, ProcBlock, SourceSpan, identifiers, lhs_name, walk_expr, walk_stmt,
)
from .rtl.exprs import conj, disj, fold, neg, render, self_width
from .rtl.lexer import LineIndex, to_internal, from_internal
from .rtl.parser import parse_expression
from .rtl.signals import design_clock, param_env, resolve_signals, width_lookup


class InputType(str, Enum):
    BRANCH_STRUCTURE = "BRANCH_STRUCTURE"
    ISOLATED_STRUCTURE = "ISOLATED_STRUCTURE"


@dataclass(frozen=True)
class ResetInfo:
    signal: str
    active_high: bool
    asserted: bool = False  # the hole sits in the reset arm itself

    def active_expr(self) -> Expr:
        return Ident(self.signal) if self.active_high else neg(Ident(self.signal))


@dataclass(frozen=True)
class Effect:
    """What the covered region does: ``lhs`` takes ``rhs`` (or keeps its value)."""

    lhs: Expr
    rhs: Expr
    kind: str          # assign | hold
    lhs_width: int
    rhs_width: int


@dataclass(frozen=True)
class LogicSignature:
    operation_pattern: str
    signal_relation: tuple[str, tuple[str, ...]]
    timing_pattern: str

    def to_json(self) -> dict:
        return {"operation_pattern": self.operation_pattern,
                "signal_relation": {"lhs": self.signal_relation[0],
                                    "rhs": list(self.signal_relation[1])},
                "timing_pattern": self.timing_pattern}

    @classmethod
    def from_json(cls, d: dict) -> "LogicSignature":
        rel = d["signal_relation"]
        return cls(d["operation_pattern"], (rel["lhs"], tuple(rel["rhs"])), d["timing_pattern"])


@dataclass
class HoleContext:
    module: str
    input_type: InputType
    locations: list[SourceSpan]
    type: TargetKind
    code: str
    behavior: str
    statement_type: str
    signals_in: list[str]
    signals_out: list[str]
    timing: str
    precondition: Expr = TRUE
    reset: Optional[ResetInfo] = None
    signature: Optional[LogicSignature] = None
    clock: Optional[ClockSpec] = None
    effect: Optional[Effect] = None
    targets: list[str] = field(default_factory=list)
    file: str = ""

    clocked: bool = False   # registered logic (|=> templates) vs combinational

    @property
    def cover_only(self) -> bool:
        return self.effect is None


@dataclass
class HolePartition:
    branch_or_statement: list[CoverageTarget]
    isolated: list[CoverageTarget]


# ---- classification ----

def is_isolated(target: CoverageTarget) -> bool:
    return not target.guards and target.path_condition == TRUE


def classify_holes(report: CoverageReport, unit: DesignUnit,
                   targets: Optional[list[CoverageTarget]] = None) -> HolePartition:
    targets = targets if targets is not None else enumerate_targets(unit)
    by_id = {t.id: t for t in targets}
    out = HolePartition([], [])
    for row in report.targets:
        if row.id not in by_id:
            raise UnknownTarget(row.id)
        if row.status is not Status.UNCOVERED:
            continue
        t = by_id[row.id]
        (out.isolated if is_isolated(t) else out.branch_or_statement).append(t)
    return out


# ---- slicing ----

def extract_slice(span: SourceSpan, source: str) -> str:
    raw = to_internal(source)
    index = LineIndex(raw)
    try:
        start = index.offset(span.start_line, span.start_col)
        end = index.offset(span.end_line, span.end_col)
    except (IndexError, ValueError):
        raise SpanOutOfRange(f"span {span} lies outside the source") from None
    if end < start or end > len(raw):
        raise SpanOutOfRange(f"span {span} lies outside the source")
    return from_internal(raw[start:end])


# ---- context derivation ----

def _common_prefix(a: tuple, b: tuple) -> int:
    n = 0
    for ga, gb in zip(a, b):
        if ga.construct is gb.construct and ga.arm == gb.arm:
            n += 1
        else:
            break
    return n


def _assign_guards(item: ProcBlock, targets_by_key: dict) -> list[tuple[Assign, tuple]]:
    """All assignments of a process in execution order, with their guard chains."""
    out = []
    for node in walk_stmt(item.body):
        if isinstance(node, Assign):
            t = targets_by_key.get(("stmt", id(node)))
            out.append((node, t.guards if t else ()))
    return out


def _override_terms(assign: Assign, guards: tuple, item, targets_by_key) -> list[Expr]:
    """Negated guards of later assignments that would overwrite ``assign``'s lhs."""
    if not isinstance(item, ProcBlock):
        return []
    name = lhs_name(assign.lhs)
    seq = _assign_guards(item, targets_by_key)
    terms = []
    seen = False
    for other, g_other in seq:
        if other is assign:
            seen = True
            continue
        if not seen or lhs_name(other.lhs) != name:
            continue
        j = _common_prefix(guards, g_other)
        if j < len(guards) and j < len(g_other) and guards[j].construct is g_other[j].construct:
            continue  # mutually exclusive arms
        terms.append(neg(conj([g.cond for g in g_other[j:]])))
    return terms


def _default_before(s_name: str, construct, item: ProcBlock, guards: tuple, targets_by_key):
    """Latest assignment to ``s_name`` executed before ``construct`` on the same path."""
    best = None
    for node in walk_stmt(item.body):
        if node is construct:
            break
        if isinstance(node, Assign) and lhs_name(node.lhs) == s_name:
            t = targets_by_key.get(("stmt", id(node)))
            g = t.guards if t else ()
            if len(g) <= len(guards) and _common_prefix(g, guards) == len(g):
                best = node
    return best


def _first_unconditional(stmt) -> Optional[Assign]:
    if isinstance(stmt, Assign):
        return stmt
    if isinstance(stmt, Block):
        for s in stmt.stmts:
            if isinstance(s, Assign):
                return s
    return None


def _statement_type(target: CoverageTarget) -> str:
    if not target.guards:
        return "assignment"
    return "case_statement" if isinstance(target.guards[-1].construct, Case) else "if_statement"


_PHRASE = {"case_statement": "Case arm", "if_statement": "If branch", "assignment": "Logic"}


def _behavior(statement_type: str, effect: Optional[Effect], sequential: bool,
              reset: Optional[ResetInfo], precondition: Expr, outs: list[str]) -> str:
    subject = "Reset branch" if reset is not None and reset.asserted else _PHRASE[statement_type]
    if effect is None:
        what = ", ".join(outs) or "logic"
        if precondition == TRUE:
            return f"{subject} updating {what} is reached"
        return f"{subject} updating {what} is reached when {render(precondition)}"
    lhs = render(effect.lhs)
    if effect.kind == "hold":
        return f"{subject} holds {lhs}"
    verb = "registers" if sequential else "drives"
    return f"{subject} {verb} {lhs} from {render(effect.rhs)}"


def abstract_pattern(e: Expr) -> tuple[str, list[str]]:
    """Replace signals by positional placeholders; literals stay as written."""
    order: dict[str, int] = {}
    for name in identifiers(e):
        order.setdefault(name, len(order))

    text = render(e)
    out = []
    for m in re.finditer(r"[A-Za-z_][A-Za-z0-9_$]*|'[sS]?[bBoOdDhH][0-9a-fA-FxXzZ?_]+|.", text):
        tok = m.group(0)
        out.append(f"${order[tok]}" if tok in order else tok)
    return "".join(out), list(order)


def _signature(effect: Optional[Effect], timing_pattern: str, target_ids: list[str]) -> LogicSignature:
    if effect is None:
        return LogicSignature(f"cover:{target_ids[0]}", ("", ()), timing_pattern)
    pattern, rhs_signals = abstract_pattern(effect.rhs)
    lhs_pat = render(effect.lhs)
    return LogicSignature(f"{effect.kind}:{pattern}", (lhs_pat, tuple(rhs_signals)), timing_pattern)


class ContextBuilder:
    """Derives hole contexts for one design unit; caches the per-unit tables."""

    def __init__(self, unit: DesignUnit, source: str, targets: Optional[list[CoverageTarget]] = None):
        from .coverage import enumerate_targets

        self.unit = unit
        self.source = source
        self.table = resolve_signals(unit)
        self.width_of = width_lookup(unit, self.table)
        self.params = param_env(unit)
        self.targets = targets if targets is not None else enumerate_targets(unit)
        self.by_key = {t.key: t for t in self.targets}
        self.by_id = {t.id: t for t in self.targets}
        self.clock = design_clock(unit)

    def width(self, e: Expr) -> int:
        try:
            return self_width(e, self.width_of)
        except (KeyError, ValueError):
            return 32

    def effect_of(self, a: Assign) -> Effect:
        return Effect(a.lhs, a.rhs, "assign", self.width(a.lhs), self.width(a.rhs))

    def derive(self, target: CoverageTarget) -> HoleContext:
        item = target.item
        clocked = isinstance(item, ProcBlock) and item.clocked
        reset_spec = item.reset if isinstance(item, ProcBlock) else None
        reset = None
        guards = [g for g in target.guards if not g.is_reset]
        if reset_spec is not None:
            asserted = any(g.is_reset and g.arm == "then" for g in target.guards)
            reset = ResetInfo(reset_spec.signal, reset_spec.active_high, asserted)

        effect, extra = self.effect_and_terms(target, clocked)
        precondition = fold(conj([g.cond for g in guards] + extra), self.params)
        statement_type = _statement_type(target)
        timing = target.timing

        if effect is not None:
            outs = [lhs_name(effect.lhs)]
            rhs_signals = identifiers(effect.rhs)
        else:
            outs = list(target.assigned)
            rhs_signals = []
        skip = {self.clock.signal} if self.clock else set()
        if reset is not None:
            skip.add(reset.signal)
        ins: list[str] = []
        for name in identifiers(precondition) + rhs_signals:
            if name in self.table and name not in skip and name not in ins:
                ins.append(name)
        outs = [o for o in outs if o in self.table]

        timing_pattern = ("seq" if clocked else "comb") + ":" + timing
        if clocked and item.clock:
            timing_pattern += f"@{item.clock.edge} {item.clock.signal}"
        if reset is not None:
            timing_pattern += f"|reset={'asserted' if reset.asserted else 'disabled'}"
        ctx = HoleContext(
            module=self.unit.name,
            input_type=InputType.ISOLATED_STRUCTURE if is_isolated(target) else InputType.BRANCH_STRUCTURE,
            locations=[target.span],
            type=target.kind,
            code=extract_slice(target.span, self.source),
            behavior=_behavior(statement_type, effect, clocked, reset, precondition, outs),
            statement_type=statement_type,
            signals_in=ins,
            signals_out=outs,
            timing=timing,
            precondition=precondition,
            reset=reset,
            signature=_signature(effect, timing_pattern, [target.id]),
            clock=item.clock if clocked else self.clock,
            effect=effect,
            targets=[target.id],
            file=self.unit.origin,
            clocked=clocked,
        )
        return ctx

    def effect_and_terms(self, target: CoverageTarget, clocked: bool) -> tuple[Optional[Effect], list[Expr]]:
        item = target.item
        if isinstance(item, ContinuousAssign):
            return self.effect_of(item.assign), []
        node = target.node
        if target.kind is TargetKind.STATEMENT:
            return self.effect_of(node), _override_terms(node, target.guards, item, self.by_key)
        if not target.implicit:
            rep = _first_unconditional(node)
            if rep is None:
                return None, []
            return self.effect_of(rep), _override_terms(rep, self._guards_of(rep, target), item, self.by_key)
        # implicit else/default: the assigned signal keeps its value or takes a default
        if not target.assigned:
            return None, []
        name = target.assigned[0]
        default = _default_before(name, node, item, target.guards, self.by_key)
        if default is not None:
            eff = self.effect_of(default)
        elif clocked:
            ident = Ident(name)
            w = self.width(ident)
            eff = Effect(ident, ident, "hold", w, w)
        else:
            return None, []
        # later writes to the same signal elsewhere in the block still win
        terms = []
        for other, g_other in _assign_guards(item, self.by_key):
            if lhs_name(other.lhs) != name or self._inside(other, node):
                continue
            if default is not None and other is default:
                continue
            if not self._after(other, node, item):
                continue
            j = _common_prefix(target.guards, g_other)
            if j < len(target.guards) and j < len(g_other) and \
                    target.guards[j].construct is g_other[j].construct:
                continue
            terms.append(neg(conj([g.cond for g in g_other[j:]])))
        return eff, terms

    def _guards_of(self, a: Assign, fallback: CoverageTarget) -> tuple:
        t = self.by_key.get(("stmt", id(a)))
        return t.guards if t else fallback.guards

    @staticmethod
    def _inside(a: Assign, construct) -> bool:
        return any(n is a for n in walk_stmt(construct))

    @staticmethod
    def _after(a: Assign, construct, item: ProcBlock) -> bool:
        seen = False
        for n in walk_stmt(item.body):
            if n is construct:
                seen = True
            elif n is a:
                return seen
        return False


def derive_context(target: CoverageTarget, unit: DesignUnit, source: str) -> HoleContext:
    return ContextBuilder(unit, source).derive(target)


def analyze(report: CoverageReport, unit: DesignUnit, source: str,
            targets: Optional[list[CoverageTarget]] = None) -> list[HoleContext]:
    """Classify, derive and consolidate every uncovered target of ``report``."""
    builder = ContextBuilder(unit, source, targets)
    part = classify_holes(report, unit, builder.targets)
    holes = sorted(part.branch_or_statement + part.isolated, key=lambda t: builder.targets.index(t))
    return consolidate([builder.derive(t) for t in holes])


# ---- consolidation ----

def _merge(a: HoleContext, b: HoleContext) -> HoleContext:
    locations = sorted(set(a.locations) | set(b.locations))
    ins = list(dict.fromkeys(a.signals_in + b.signals_in))
    outs = list(dict.fromkeys(a.signals_out + b.signals_out))
    return replace(
        a,
        input_type=InputType.BRANCH_STRUCTURE if InputType.BRANCH_STRUCTURE in (a.input_type, b.input_type)
        else InputType.ISOLATED_STRUCTURE,
        locations=locations,
        type=TargetKind.BRANCH if TargetKind.BRANCH in (a.type, b.type) else TargetKind.STATEMENT,
        signals_in=ins,
        signals_out=outs,
        precondition=disj([a.precondition, b.precondition]),
        targets=a.targets + [t for t in b.targets if t not in a.targets],
    )


def consolidate(contexts: list[HoleContext]) -> list[HoleContext]:
    groups: dict[LogicSignature, HoleContext] = {}
    for ctx in contexts:
        key = ctx.signature
        groups[key] = _merge(groups[key], ctx) if key in groups else ctx
    return sorted(groups.values(), key=lambda c: (c.locations[0].start, c.locations[0].end))


# ---- JSON ----

def _loc(span: SourceSpan) -> dict:
    return {"start": [span.start_line, span.start_col], "end": [span.end_line, span.end_col]}


CORE_KEYS = ("module", "input_type", "locations", "type", "code", "behavior",
             "statement_type", "signals", "timing")


def context_to_json(ctx: HoleContext, extensions: bool = True) -> dict[str, Any]:
    """Serialize a context.  ``x_*`` keys carry what generation needs beyond
    the core record; ``extensions=False`` drops them."""
    doc: dict[str, Any] = {
        "module": ctx.module,
        "input_type": ctx.input_type.value,
        "locations": [_loc(s) for s in ctx.locations],
        "type": ctx.type.value,
        "code": ctx.code,
        "behavior": ctx.behavior,
        "statement_type": ctx.statement_type,
        "signals": {"in": list(ctx.signals_in), "out": list(ctx.signals_out)},
        "timing": ctx.timing,
        "x_precondition": render(ctx.precondition),
        "x_reset": None if ctx.reset is None else {
            "signal": ctx.reset.signal, "active_high": ctx.reset.active_high,
            "asserted": ctx.reset.asserted},
        "x_logic_signature": ctx.signature.to_json() if ctx.signature else None,
        "x_clock": None if ctx.clock is None else {"signal": ctx.clock.signal, "edge": ctx.clock.edge},
        "x_clocked": ctx.clocked,
        "x_effect": None if ctx.effect is None else {
            "lhs": render(ctx.effect.lhs), "rhs": render(ctx.effect.rhs), "kind": ctx.effect.kind,
            "lhs_width": ctx.effect.lhs_width, "rhs_width": ctx.effect.rhs_width},
        "x_targets": list(ctx.targets),
        "x_file": ctx.file,
    }
    if not extensions:
        return {k: doc[k] for k in CORE_KEYS}
    return doc


def context_from_json(doc: dict[str, Any]) -> HoleContext:
    try:
        eff = doc.get("x_effect")
        effect = None if eff is None else Effect(
            parse_expression(eff["lhs"]), parse_expression(eff["rhs"]), eff["kind"],
            eff["lhs_width"], eff["rhs_width"])
        rst = doc.get("x_reset")
        clk = doc.get("x_clock")
        sig = doc.get("x_logic_signature")
        return HoleContext(
            module=doc["module"],
            input_type=InputType(doc["input_type"]),
            locations=[SourceSpan(*loc["start"], *loc["end"]) for loc in doc["locations"]],
            type=TargetKind(doc["type"]),
            code=doc["code"],
            behavior=doc["behavior"],
            statement_type=doc["statement_type"],
            signals_in=list(doc["signals"]["in"]),
            signals_out=list(doc["signals"]["out"]),
            timing=doc["timing"],
            precondition=parse_expression(doc.get("x_precondition", "1'b1")),
            reset=None if rst is None else ResetInfo(rst["signal"], rst["active_high"], rst["asserted"]),
            signature=None if sig is None else LogicSignature.from_json(sig),
            clock=None if clk is None else ClockSpec(clk["signal"], clk["edge"]),
            effect=effect,
            targets=list(doc.get("x_targets", [])),
            file=doc.get("x_file", ""),
            clocked=bool(doc.get("x_clocked", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("", f"malformed hole context: {exc}") from None


def dumps_contexts(contexts: list[HoleContext]) -> str:
    return json.dumps([context_to_json(c) for c in contexts], indent=2) + "\n"


def loads_contexts(text: str) -> list[HoleContext]:
    return [context_from_json(d) for d in json.loads(text)]
