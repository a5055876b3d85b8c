"""Elaboration of a design unit into a single-clock transition system."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..coverage import CoverageTarget, case_is_full, enumerate_targets
from ..errors import ElaborationError, StateBudgetExceeded
from ..rtl.ast import (
    Assign, Block, Case, ClockSpec, ContinuousAssign, DesignUnit, Expr, Ident, If, Index,
    Number, ProcBlock, Slice, Stmt, identifiers, lhs_name, walk_stmt,
)
from ..rtl.exprs import const_value, self_width
from ..rtl.signals import design_clock, param_env, resolve_signals, width_lookup
from .evaluate import U64, VecEval, umask

DEFAULT_STATE_BUDGET = 24
DEFAULT_INPUT_BUDGET = 16


@dataclass
class Frames:
    """Evaluation of a batch of (state, input) pairs."""

    values: dict[str, np.ndarray]       # every signal and parameter
    next_keys: np.ndarray               # packed successor state
    executed: dict[str, np.ndarray]     # target id -> bool mask


def _item_reads(item) -> set[str]:
    names: set[str] = set()
    if isinstance(item, ContinuousAssign):
        names.update(identifiers(item.assign.rhs))
        for e in _lhs_index_exprs(item.assign.lhs):
            names.update(identifiers(e))
        return names
    for node in walk_stmt(item.body):
        if isinstance(node, Assign):
            names.update(identifiers(node.rhs))
            for e in _lhs_index_exprs(node.lhs):
                names.update(identifiers(e))
        elif isinstance(node, If):
            names.update(identifiers(node.cond))
        elif isinstance(node, Case):
            names.update(identifiers(node.subject))
            for arm in node.arms:
                for label in arm.labels:
                    names.update(identifiers(label))
    return names


def _lhs_index_exprs(lhs: Expr) -> list[Expr]:
    if isinstance(lhs, Index):
        return [lhs.index]
    return []


def _item_writes(item) -> list[str]:
    if isinstance(item, ContinuousAssign):
        return [lhs_name(item.assign.lhs)]
    out: dict[str, None] = {}
    for node in walk_stmt(item.body):
        if isinstance(node, Assign):
            out.setdefault(lhs_name(node.lhs))
    return list(out)


@dataclass
class TransitionSystem:
    unit: DesignUnit
    clock: Optional[ClockSpec]
    registers: list[tuple[str, int]]
    inputs: list[tuple[str, int]]
    comb: list[tuple[str, int]]
    widths: dict[str, int]
    params: dict[str, int]
    comb_items: list                       # topologically ordered
    seq_items: list[ProcBlock]
    targets: list[CoverageTarget]
    init_fixed: dict[str, int]             # registers with a constant reset value
    comb_deps: dict[str, set[str]] = field(default_factory=dict)

    @property
    def state_bits(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def input_bits(self) -> int:
        return sum(w for _, w in self.inputs)

    @property
    def state_names(self) -> list[str]:
        return [n for n, _ in self.registers]

    @property
    def input_names(self) -> list[str]:
        return [n for n, _ in self.inputs]

    # ---- packing ----

    @staticmethod
    def _unpack(keys: np.ndarray, fields: list[tuple[str, int]]) -> dict[str, np.ndarray]:
        out = {}
        shift = 0
        for name, w in fields:
            out[name] = (keys >> U64(shift)) & umask(w)
            shift += w
        return out

    @staticmethod
    def _pack(values: dict[str, np.ndarray], fields: list[tuple[str, int]], n: int) -> np.ndarray:
        key = np.zeros(n, dtype=U64)
        shift = 0
        for name, w in fields:
            key |= (np.asarray(values[name], dtype=U64) & umask(w)) << U64(shift)
            shift += w
        return key

    def unpack_state(self, keys: np.ndarray) -> dict[str, np.ndarray]:
        return self._unpack(np.asarray(keys, dtype=U64), self.registers)

    def unpack_input(self, keys: np.ndarray) -> dict[str, np.ndarray]:
        return self._unpack(np.asarray(keys, dtype=U64), self.inputs)

    def pack_state(self, values: dict[str, int]) -> int:
        return int(self._pack({k: np.asarray([v], dtype=U64) for k, v in values.items()},
                              self.registers, 1)[0])

    def pack_input(self, values: dict[str, int]) -> int:
        return int(self._pack({k: np.asarray([v], dtype=U64) for k, v in values.items()},
                              self.inputs, 1)[0])

    def state_dict(self, key: int) -> dict[str, int]:
        return {k: int(v[0]) for k, v in self.unpack_state(np.asarray([key], dtype=U64)).items()}

    def input_dict(self, key: int) -> dict[str, int]:
        return {k: int(v[0]) for k, v in self.unpack_input(np.asarray([key], dtype=U64)).items()}

    # ---- init ----

    def init_states(self) -> np.ndarray:
        free = [(n, w) for n, w in self.registers if n not in self.init_fixed]
        ranges = [range(1 << w) for _, w in free]
        keys = []
        for combo in itertools.product(*ranges):
            vals = dict(self.init_fixed)
            vals.update({n: v for (n, _), v in zip(free, combo)})
            keys.append(self.pack_state(vals))
        return np.asarray(sorted(keys), dtype=U64)

    def all_inputs(self) -> np.ndarray:
        return np.arange(1 << self.input_bits, dtype=U64)

    # ---- step ----

    def frames(self, state_keys: np.ndarray, input_keys: np.ndarray) -> Frames:
        n = len(state_keys)
        values: dict[str, np.ndarray] = {}
        values.update(self.unpack_state(state_keys))
        values.update(self.unpack_input(input_keys))
        for name, v in self.params.items():
            values[name] = np.full(n, v, dtype=U64)
        for name, _ in self.comb:
            values[name] = np.zeros(n, dtype=U64)
        executed: dict[str, np.ndarray] = {}
        run = _Runner(self, executed, n)
        everything = np.ones(n, dtype=bool)
        for item in self.comb_items:
            if isinstance(item, ContinuousAssign):
                run.assign(item.assign, everything, values, None)
            else:
                run.stmt(item.body, everything, values, None)
        nxt = {name: values[name].copy() for name, _ in self.registers}
        for item in self.seq_items:
            local = dict(values)
            run.stmt(item.body, everything, local, nxt)
        next_keys = self._pack(nxt, self.registers, n)
        return Frames(values, next_keys, executed)

    def signal_closure(self, names) -> set[str]:
        """Names plus the transitive combinational fan-in (registers stop the walk)."""
        out = set()
        stack = list(names)
        while stack:
            s = stack.pop()
            if s in out:
                continue
            out.add(s)
            stack.extend(self.comb_deps.get(s, ()))
        return out


class _Runner:
    """Executes statements under a boolean mask, recording which targets ran."""

    def __init__(self, ts: TransitionSystem, executed: dict, n: int):
        self.ts = ts
        self.executed = executed
        self.n = n
        self.by_key = {t.key: t.id for t in ts.targets}

    def mark(self, key, mask: np.ndarray):
        tid = self.by_key.get(key)
        if tid is not None:
            prev = self.executed.get(tid)
            self.executed[tid] = mask.copy() if prev is None else (prev | mask)

    def ev(self, values) -> VecEval:
        return VecEval(values, self.ts.widths, self.n)

    def assign(self, a: Assign, mask: np.ndarray, env: dict, nxt: Optional[dict]):
        self.mark(("stmt", id(a)), mask)
        name = lhs_name(a.lhs)
        lw = self.ts.widths[name]
        ev = self.ev(env)
        target_w = self_width(a.lhs, ev.width_of)
        val = ev(a.rhs, target_w) & umask(target_w)
        store = nxt if (nxt is not None and a.nonblocking) else env
        old = store[name]
        if isinstance(a.lhs, Ident):
            new = val & umask(lw)
        elif isinstance(a.lhs, Index):
            i = ev(a.lhs.index)
            inside = i < U64(lw)
            sh = np.minimum(i, U64(63))
            cleared = old & ~(U64(1) << sh)
            new = np.where(inside, cleared | ((val & U64(1)) << sh), old)
        elif isinstance(a.lhs, Slice):
            penv = {k: (v, self.ts.widths[k]) for k, v in self.ts.params.items()}
            msb = const_value(a.lhs.msb, penv)
            lsb = const_value(a.lhs.lsb, penv)
            fm = umask(msb - lsb + 1) << U64(lsb)
            new = (old & ~fm) | ((val << U64(lsb)) & fm)
        else:
            raise ElaborationError(f"unsupported assignment target {a.lhs!r}")
        store[name] = np.where(mask, np.asarray(new, dtype=U64) & umask(lw), old).astype(U64)
        if nxt is not None and not a.nonblocking:
            nxt[name] = store[name]

    def stmt(self, s: Stmt, mask: np.ndarray, env: dict, nxt: Optional[dict]):
        if isinstance(s, Assign):
            self.assign(s, mask, env, nxt)
        elif isinstance(s, Block):
            for c in s.stmts:
                self.stmt(c, mask, env, nxt)
        elif isinstance(s, If):
            c = self.ev(env).truth(s.cond)
            m_then, m_else = mask & c, mask & ~c
            self.mark(("then", id(s)), m_then)
            self.mark(("else", id(s)), m_else)
            self.stmt(s.then, m_then, env, nxt)
            if s.other is not None:
                self.stmt(s.other, m_else, env, nxt)
        elif isinstance(s, Case):
            ev = self.ev(env)
            taken = np.zeros(self.n, dtype=bool)
            for i, arm in enumerate(s.arms):
                hit = np.zeros(self.n, dtype=bool)
                for label in arm.labels:
                    hit |= self.label_match(ev, s, label)
                m_arm = mask & hit & ~taken
                taken |= hit
                self.mark(("arm", id(s), i), m_arm)
                self.stmt(arm.body, m_arm, env, nxt)
            m_def = mask & ~taken
            self.mark(("default", id(s)), m_def)
            if s.default is not None:
                self.stmt(s.default, m_def, env, nxt)

    def label_match(self, ev: VecEval, case: Case, label: Expr) -> np.ndarray:
        w = max(ev.width(case.subject), ev.width(label))
        subj = ev(case.subject, w)
        lab = ev(label, w)
        if case.kind == "casez" and isinstance(label, Number) and label.wild:
            care = ~U64(label.wild) & umask(w)
            return ((subj ^ lab) & care) == U64(0)
        return subj == lab


def _reset_values(block: ProcBlock, params: dict) -> dict[str, int]:
    """Constant values assigned in the reset arm of a clocked block."""
    if block.reset is None:
        return {}
    body = block.body
    if isinstance(body, Block) and len(body.stmts) == 1:
        body = body.stmts[0]
    if not isinstance(body, If):
        return {}
    out = {}
    for node in walk_stmt(body.then):
        if isinstance(node, Assign) and isinstance(node.lhs, Ident):
            v = const_value(node.rhs, params)
            if v is not None:
                out[node.lhs.name] = v
    return out


def _always_assigned(s: Stmt, unit: DesignUnit, width_of) -> set[str]:
    """Names written on every path through ``s``."""
    if isinstance(s, Assign):
        return {lhs_name(s.lhs)}
    if isinstance(s, Block):
        out: set[str] = set()
        for sub in s.stmts:
            out |= _always_assigned(sub, unit, width_of)
        return out
    if isinstance(s, If):
        if s.other is None:
            return set()
        return _always_assigned(s.then, unit, width_of) & _always_assigned(s.other, unit, width_of)
    if isinstance(s, Case):
        arms = [_always_assigned(a.body, unit, width_of) for a in s.arms]
        if s.default is not None:
            arms.append(_always_assigned(s.default, unit, width_of))
        elif not case_is_full(s, unit, width_of):
            return set()
        return set.intersection(*arms) if arms else set()
    return set()


def _check_no_latches(comb_items, unit: DesignUnit, width_of) -> None:
    for item in comb_items:
        if not isinstance(item, ProcBlock):
            continue
        partial = set(_item_writes(item)) - _always_assigned(item.body, unit, width_of)
        if partial:
            raise ElaborationError(f"{', '.join(sorted(partial))} not assigned on every path "
                                   "of a combinational block (would infer a latch)")


def elaborate(unit: DesignUnit, state_budget: int = DEFAULT_STATE_BUDGET,
              input_budget: int = DEFAULT_INPUT_BUDGET) -> TransitionSystem:
    table = resolve_signals(unit)
    params = param_env(unit)
    widths = {n: s.width for n, s in table.items()}
    widths.update({n: w for n, (_, w) in params.items()})

    seq_items = [b for b in unit.proc_blocks() if b.clocked]
    comb_items = [i for i in unit.items if not (isinstance(i, ProcBlock) and i.clocked)]
    clocks = {(b.clock.signal, b.clock.edge) for b in seq_items}
    if len(clocks) > 1:
        raise ElaborationError(f"more than one clock: {sorted(clocks)}")
    _check_no_latches(comb_items, unit, width_lookup(unit, table))
    clock = design_clock(unit)

    registers: dict[str, int] = {}
    for b in seq_items:
        for name in _item_writes(b):
            registers.setdefault(name, widths[name])
    comb_vars: dict[str, int] = {}
    for item in comb_items:
        for name in _item_writes(item):
            if name in registers:
                raise ElaborationError(f"{name} is driven by both clocked and combinational logic")
            comb_vars.setdefault(name, widths[name])

    inputs = []
    for name, info in table.items():
        if clock is not None and name == clock.signal:
            continue
        if name in registers or name in comb_vars:
            continue
        if info.direction != "in" and not any(name in _item_reads(i) for i in unit.items):
            continue  # undriven and unread: irrelevant
        inputs.append((name, info.width))

    state_bits = sum(registers.values())
    if state_bits > state_budget:
        raise StateBudgetExceeded(state_bits, state_budget, "state")
    input_bits = sum(w for _, w in inputs)
    if input_bits > input_budget:
        raise StateBudgetExceeded(input_bits, input_budget, "input")

    # combinational ordering
    writes = {id(i): set(_item_writes(i)) for i in comb_items}
    reads = {id(i): _item_reads(i) for i in comb_items}
    ordered = []
    placed: set[int] = set()
    while len(ordered) < len(comb_items):
        progress = False
        for item in comb_items:
            if id(item) in placed:
                continue
            deps = [o for o in comb_items if o is not item and id(o) not in placed
                    and writes[id(o)] & reads[id(item)]]
            if not deps:
                ordered.append(item)
                placed.add(id(item))
                progress = True
        if not progress:
            raise ElaborationError("combinational loop")
    comb_deps: dict[str, set[str]] = {}
    for item in comb_items:
        for name in writes[id(item)]:
            comb_deps.setdefault(name, set()).update(reads[id(item)] - {name})

    fixed: dict[str, int] = {}
    pvals = {k: v for k, v in params.items()}
    for b in seq_items:
        fixed.update({k: v & ((1 << registers[k]) - 1) for k, v in _reset_values(b, pvals).items()
                      if k in registers})

    return TransitionSystem(
        unit=unit, clock=clock,
        registers=list(registers.items()), inputs=inputs, comb=list(comb_vars.items()),
        widths=widths, params={n: v for n, (v, _) in params.items()},
        comb_items=ordered, seq_items=seq_items, targets=enumerate_targets(unit),
        init_fixed=fixed, comb_deps=comb_deps,
    )
