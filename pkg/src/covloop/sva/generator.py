"""Template property generation, naming/deduplication and merging into SVA files."""

from __future__ import annotations

import random
import re
from dataclasses import replace
from typing import Iterable, Optional

from ..errors import UnsupportedTiming
from ..holes import HoleContext
from ..rtl.ast import FALSE, TRUE, Binary, Cast, DesignUnit, Expr, Past, identifiers
from ..rtl.exprs import conj
from ..rtl.parser import parse_expression
from ..rtl.signals import resolve_signals
from .model import (
    ImplOp, PropKind, SvaProperty, Trace, check_form, check_signals, normalized_body,
    render_property,
)
from .parser import DISABLE_BODY, SvaResources, parse_sva


def design_resources(unit: DesignUnit, res: SvaResources) -> SvaResources:
    """SVA resources extended with the design's signals and parameters."""
    table = resolve_signals(unit)
    return res.merged(list(table), [(p.name, p.value) for p in unit.params])


def _consequent(ctx: HoleContext, constants: set[str]) -> Expr:
    eff = ctx.effect
    rhs = eff.rhs
    varying = [n for n in identifiers(rhs) if n not in constants]
    if eff.kind != "hold" and eff.rhs_width != eff.lhs_width and varying:
        rhs = Cast(eff.lhs_width, rhs)
    if ctx.clocked and varying:
        rhs = Past(rhs)
    return Binary("==", eff.lhs, rhs)


def generate_property(ctx: HoleContext, res: SvaResources, iteration: int = 0,
                      delay: Optional[int] = None) -> list[SvaProperty]:
    """Instantiate the timing-class template for one hole context.

    Returns an ASSERT for contexts with an effect, plus a COVER on the
    precondition for BRANCH contexts whose precondition is not trivially true.
    A precondition that folds to ``1'b0`` (dead code) yields nothing.
    Names are left empty; ``name_and_dedup`` assigns them.
    """
    if ctx.precondition == FALSE:
        return []
    clock_macro = res.clock_macro()
    if clock_macro is not None:
        macro, clock = clock_macro
        clock_text: Optional[str] = f"`{macro.name}"
    elif ctx.clock is not None:
        clock, clock_text = ctx.clock, None
    else:
        raise UnsupportedTiming(f"no clock available for {ctx.module} ({ctx.timing})")

    antecedent = ctx.precondition
    disable = None
    disable_text = None
    if ctx.reset is not None:
        if ctx.reset.asserted:
            antecedent = conj([ctx.reset.active_expr(), antecedent])
        else:
            disable = ctx.reset.active_expr()
            dm = res.disable_macro()
            if dm is not None:
                disable = parse_expression(DISABLE_BODY.match(dm.body).group(1))
                disable_text = f"`{dm.name}"

    trace = Trace(ctx.file, tuple(ctx.locations), iteration)
    props = []
    if ctx.effect is not None:
        if ctx.clocked:
            n = delay if delay is not None else res.delay_style
            op, d = (ImplOp.OVERLAP_DELAY, n) if n else (ImplOp.NONOVERLAP, 1)
        else:
            op, d = ImplOp.OVERLAP, 1
        consequent = _consequent(ctx, {n for n, _ in res.parameters})
        props.append(SvaProperty("", PropKind.ASSERT, clock, consequent, antecedent, op, d,
                                 disable, trace, clock_text, disable_text, tuple(ctx.targets)))
    if ctx.type.value == "BRANCH" and antecedent != TRUE:
        props.append(SvaProperty("", PropKind.COVER, clock, antecedent, None, None, 1,
                                 disable, trace, clock_text, disable_text, tuple(ctx.targets)))
    available = res.names() | {clock.signal}
    for p in props:
        check_form(p)
        check_signals(p, available)
    return props


# ---- naming ----

def behavior_slug(text: str, words: int = 5) -> str:
    parts = re.findall(r"[a-z0-9]+", text.lower())
    return "_".join(parts[:words]) or "prop"


def name_and_dedup(props: list[SvaProperty], res: SvaResources, seed: int,
                   slugs: Optional[list[str]] = None, iteration: int = 0) -> list[SvaProperty]:
    """Drop properties whose body already exists; give the rest unique names.

    Fresh names are ``p_<slug>_<suffix>`` with a hex suffix drawn from a
    generator seeded by ``(seed, iteration)``.  A name supplied with the
    property is kept when it is free.
    """
    rng = random.Random(f"{seed}:{iteration}")
    used = set(res.existing_names())
    seen_bodies = set(res.existing_bodies())
    out = []
    for i, p in enumerate(props):
        body = normalized_body(p)
        if body in seen_bodies:
            continue
        seen_bodies.add(body)
        name = p.name
        if not name or name in used:
            slug = (slugs[i] if slugs else None) or "prop"
            if p.kind is PropKind.COVER:
                slug += "_cov"
            while True:
                name = f"p_{slug}_{rng.getrandbits(24):06x}"
                if name not in used:
                    break
        used.add(name)
        out.append(replace(p, name=name))
    return out


# ---- merging ----

_ENDMODULE = re.compile(r"^\s*endmodule\b.*$", re.M)


def merge_into_file(sva_text: str, props: Iterable[SvaProperty]) -> str:
    """Add properties (with trace comments) to an SVA file.

    Properties whose name or normalized body is already present are skipped, so
    merging the same list twice changes nothing.  Inside a module the block goes
    before the final ``endmodule``; otherwise it is appended.
    """
    current = parse_sva(sva_text)
    names = {p.name for p in current.properties}
    bodies = {normalized_body(p) for p in current.properties}
    blocks = []
    for p in props:
        body = normalized_body(p)
        if p.name in names or body in bodies:
            continue
        names.add(p.name)
        bodies.add(body)
        blocks.append(render_property(p))
    if not blocks:
        return sva_text
    chunk = "\n".join(blocks)
    ends = list(_ENDMODULE.finditer(sva_text))
    if ends:
        at = ends[-1].start()
        head, tail = sva_text[:at], sva_text[at:]
        if head and not head.endswith("\n"):
            head += "\n"
        sep = "\n" if head.strip() and not head.endswith("\n\n") else ""
        out = head + sep + _indent_like(chunk, head) + "\n" + tail
    else:
        head = sva_text
        if head and not head.endswith("\n"):
            head += "\n"
        sep = "\n" if head.strip() else ""
        out = head + sep + chunk
    parse_sva(out)  # the merged file must stay readable
    return out


def _indent_like(chunk: str, head: str) -> str:
    """Match the indentation used by properties inside an existing module body."""
    m = re.search(r"^([ \t]+)property\b", head, re.M)
    if not m:
        return chunk
    pad = m.group(1)
    return "\n".join(pad + line if line else line for line in chunk.split("\n"))
