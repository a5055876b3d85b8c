"""Pretty-printer and JSON dump for design units."""

from __future__ import annotations

import json
from typing import Any

from .ast import (
    Assign, Binary, Block, Case, Cast, Concat, ContinuousAssign, DesignUnit, Ident, If,
    Index, Number, Past, ProcBlock, Range, Repeat, Slice, SourceSpan, Stmt, Ternary,
    Unary,
)
from .exprs import render


def _range(rng: Range | None) -> str:
    return f"[{render(rng.msb)}:{render(rng.lsb)}] " if rng is not None else ""


def print_unit(unit: DesignUnit) -> str:
    out = [f"module {unit.name}"]
    if unit.ports:
        out[0] += " ("
        decls = []
        for p in unit.ports:
            direction = {"in": "input", "out": "output", "inout": "inout"}[p.direction]
            keyword = p.keyword or ("reg" if p.kind == "reg" else "wire")
            rng = "" if keyword == "integer" else _range(p.range)
            decls.append(f"  {direction} {keyword} {rng}{p.name}")
        out.append(",\n".join(decls))
        out.append(");")
    else:
        out[0] += ";"
    for prm in unit.params:
        kw = "localparam" if prm.local else "parameter"
        out.append(f"  {kw} {_range(prm.range)}{prm.name} = {render(prm.expr)};")
    for net in unit.nets:
        rng = "" if net.keyword == "integer" else _range(net.range)
        out.append(f"  {net.keyword} {rng}{net.name};")
    for item in unit.items:
        if isinstance(item, ContinuousAssign):
            a = item.assign
            out.append(f"  assign {render(a.lhs)} = {render(a.rhs)};")
        else:
            out.append("  " + _proc_header(item) + " " + _stmt(item.body, 1).lstrip())
    out.append("endmodule")
    return "\n".join(out) + "\n"


def _proc_header(p: ProcBlock) -> str:
    kw = p.timing_name
    if kw == "always_comb":
        return kw
    if p.events and p.events[0].signal is None:
        return f"{kw} @(*)"
    evs = " or ".join(f"{e.edge} {e.signal}" if e.edge else e.signal for e in p.events)
    return f"{kw} @({evs})"


def _stmt(s: Stmt, depth: int) -> str:
    pad = "  " * depth
    if isinstance(s, Assign):
        op = "<=" if s.nonblocking else "="
        return f"{pad}{render(s.lhs)} {op} {render(s.rhs)};"
    if isinstance(s, Block):
        head = f"{pad}begin" + (f" : {s.label}" if s.label else "")
        body = [_stmt(c, depth + 1) for c in s.stmts]
        return "\n".join([head, *body, f"{pad}end"])
    if isinstance(s, If):
        text = f"{pad}if ({render(s.cond)})\n{_stmt(s.then, depth + 1)}"
        if s.other is not None:
            text += f"\n{pad}else\n{_stmt(s.other, depth + 1)}"
        return text
    if isinstance(s, Case):
        lines = [f"{pad}{s.kind} ({render(s.subject)})"]
        for arm in s.arms:
            labels = ", ".join(render(x) for x in arm.labels)
            lines.append(f"{pad}  {labels}:\n{_stmt(arm.body, depth + 2)}")
        if s.default is not None:
            lines.append(f"{pad}  default:\n{_stmt(s.default, depth + 2)}")
        lines.append(f"{pad}endcase")
        return "\n".join(lines)
    raise TypeError(s)


# ---- JSON dump ----

def _span(span: SourceSpan) -> dict:
    return {"start": [span.start_line, span.start_col], "end": [span.end_line, span.end_col]}


def expr_json(e) -> dict[str, Any]:
    if isinstance(e, Ident):
        d = {"node": "ident", "name": e.name}
    elif isinstance(e, Number):
        d = {"node": "number", "value": e.value, "width": e.width, "text": e.text}
    elif isinstance(e, Unary):
        d = {"node": "unary", "op": e.op, "operand": expr_json(e.operand)}
    elif isinstance(e, Binary):
        d = {"node": "binary", "op": e.op, "left": expr_json(e.left), "right": expr_json(e.right)}
    elif isinstance(e, Ternary):
        d = {"node": "ternary", "cond": expr_json(e.cond), "then": expr_json(e.then),
             "else": expr_json(e.other)}
    elif isinstance(e, Concat):
        d = {"node": "concat", "parts": [expr_json(x) for x in e.parts]}
    elif isinstance(e, Repeat):
        d = {"node": "repeat", "count": expr_json(e.count), "parts": [expr_json(x) for x in e.parts]}
    elif isinstance(e, Index):
        d = {"node": "index", "base": e.base.name, "index": expr_json(e.index)}
    elif isinstance(e, Slice):
        d = {"node": "slice", "base": e.base.name, "msb": expr_json(e.msb), "lsb": expr_json(e.lsb)}
    elif isinstance(e, Past):
        d = {"node": "past", "arg": expr_json(e.arg)}
    elif isinstance(e, Cast):
        d = {"node": "cast", "width": e.width, "expr": expr_json(e.expr)}
    else:
        raise TypeError(e)
    d.update(_span(e.span))
    return d


def stmt_json(s: Stmt) -> dict[str, Any]:
    if isinstance(s, Assign):
        d = {"node": "assign", "nonblocking": s.nonblocking, "lhs": expr_json(s.lhs),
             "rhs": expr_json(s.rhs)}
    elif isinstance(s, If):
        d = {"node": "if", "cond": expr_json(s.cond), "then": stmt_json(s.then),
             "else": stmt_json(s.other) if s.other is not None else None}
    elif isinstance(s, Case):
        d = {"node": s.kind, "subject": expr_json(s.subject),
             "arms": [{"labels": [expr_json(x) for x in a.labels], "body": stmt_json(a.body),
                       **_span(a.span)} for a in s.arms],
             "default": stmt_json(s.default) if s.default is not None else None}
    elif isinstance(s, Block):
        d = {"node": "block", "label": s.label, "stmts": [stmt_json(c) for c in s.stmts]}
    else:
        raise TypeError(s)
    d.update(_span(s.span))
    return d


def unit_json(unit: DesignUnit) -> dict[str, Any]:
    items = []
    for item in unit.items:
        if isinstance(item, ContinuousAssign):
            items.append({"node": "continuous_assign", "assign": stmt_json(item.assign), **_span(item.span)})
        else:
            items.append({
                "node": "process",
                "timing_class": item.timing_class.value,
                "events": [{"edge": e.edge, "signal": e.signal} for e in item.events],
                "clock": {"signal": item.clock.signal, "edge": item.clock.edge} if item.clock else None,
                "reset": ({"signal": item.reset.signal, "active_high": item.reset.active_high,
                           "asynchronous": item.reset.asynchronous} if item.reset else None),
                "body": stmt_json(item.body),
                **_span(item.span),
            })
    return {
        "module": unit.name,
        "origin": unit.origin,
        "ports": [{"name": p.name, "direction": p.direction, "kind": p.kind, "width": p.width}
                  for p in unit.ports],
        "params": [{"name": p.name, "value": p.value, "width": p.width, "local": p.local}
                   for p in unit.params],
        "nets": [{"name": n.name, "kind": n.kind, "width": n.width} for n in unit.nets],
        "items": items,
        **_span(unit.span),
    }


def dump_units(units: list[DesignUnit]) -> str:
    return json.dumps([unit_json(u) for u in units], indent=2) + "\n"
