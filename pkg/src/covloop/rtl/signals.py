"""Signal resolution: directions, widths and storage kinds."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import UndeclaredSignal
from .ast import (
    Assign, ClockSpec, ContinuousAssign, DesignUnit, Expr, Ident, ProcBlock, Stmt, walk_expr,
    walk_stmt, If, Case, lhs_name,
)


@dataclass(frozen=True)
class SignalInfo:
    name: str
    direction: Optional[str]  # in | out | inout | None for locals
    width: int
    kind: str                 # reg | wire


class SignalTable(dict):
    """Mapping of signal name to SignalInfo, in declaration order."""

    def inputs(self) -> list[str]:
        return [n for n, s in self.items() if s.direction == "in"]

    def outputs(self) -> list[str]:
        return [n for n, s in self.items() if s.direction == "out"]

    def locals(self) -> list[str]:
        return [n for n, s in self.items() if s.direction is None]

    def width(self, name: str) -> int:
        return self[name].width

    def directions(self) -> dict[str, list[str]]:
        return {"in": self.inputs(), "out": self.outputs(),
                "inout": [n for n, s in self.items() if s.direction == "inout"]}


def _expr_refs(e: Expr):
    for node in walk_expr(e):
        if isinstance(node, Ident):
            yield node


def _stmt_refs(s: Stmt):
    for node in walk_stmt(s):
        if isinstance(node, Assign):
            yield from _expr_refs(node.lhs)
            yield from _expr_refs(node.rhs)
        elif isinstance(node, If):
            yield from _expr_refs(node.cond)
        elif isinstance(node, Case):
            yield from _expr_refs(node.subject)
            for arm in node.arms:
                for label in arm.labels:
                    yield from _expr_refs(label)


def references(unit: DesignUnit):
    """Every identifier occurrence in the module body."""
    for item in unit.items:
        if isinstance(item, ContinuousAssign):
            yield from _expr_refs(item.assign.lhs)
            yield from _expr_refs(item.assign.rhs)
        else:
            yield from _stmt_refs(item.body)
            for ev in item.events:
                if ev.signal is not None:
                    yield Ident(ev.signal, item.span)


def resolve_signals(unit: DesignUnit) -> SignalTable:
    table = SignalTable()
    for p in unit.ports:
        table[p.name] = SignalInfo(p.name, p.direction, p.width, p.kind)
    for n in unit.nets:
        table[n.name] = SignalInfo(n.name, None, n.width, n.kind)
    params = unit.param_map()
    for ref in references(unit):
        if ref.name not in table and ref.name not in params:
            raise UndeclaredSignal(ref.name, ref.span)
    return table


def drivers(unit: DesignUnit) -> dict[str, list]:
    """Which items assign each signal."""
    out: dict[str, list] = {}
    for item in unit.items:
        if isinstance(item, ContinuousAssign):
            out.setdefault(lhs_name(item.assign.lhs), []).append(item)
        else:
            for node in walk_stmt(item.body):
                if isinstance(node, Assign):
                    lst = out.setdefault(lhs_name(node.lhs), [])
                    if not lst or lst[-1] is not item:
                        lst.append(item)
    return out


def param_env(unit: DesignUnit) -> dict[str, tuple[int, int]]:
    return {p.name: (p.value, p.width) for p in unit.params}


def width_lookup(unit: DesignUnit, table: Optional[SignalTable] = None):
    table = table if table is not None else resolve_signals(unit)
    params = unit.param_map()

    def width_of(name: str) -> int:
        if name in table:
            return table[name].width
        return params[name].width

    return width_of


_CLOCK_NAME = re.compile(r"^(clk|clock)(_\w+)?$|_(clk|clock)$", re.I)


def design_clock(unit: DesignUnit) -> Optional[ClockSpec]:
    """The clock of the first clocked process, else a 1-bit input named like a
    clock (so purely combinational designs can still be sampled)."""
    for blk in unit.proc_blocks():
        if blk.clock is not None:
            return blk.clock
    for port in unit.ports:
        if port.direction == "in" and port.width == 1 and _CLOCK_NAME.search(port.name):
            return ClockSpec(port.name)
    return None
