"""Explicit-state checking of properties over an elaborated system.

Reachable frames (a reachable state paired with an input that every
environment assumption allows) are enumerated breadth first.  A property is
checked over *windows*: short frame sequences starting at an attempt frame,
optionally preceded by one lookback frame when ``$past`` is read at the
attempt, and extended one successor at a time up to the property horizon.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import StateBudgetExceeded, UnknownSignal, UnsupportedTiming
from ..rtl.ast import TRUE, Expr, Ident, Past, children, identifiers, walk_expr
from ..sva.model import PropKind, SvaProperty, normalized_body
from .evaluate import U64, VecEval
from .system import Frames, TransitionSystem

DEFAULT_DEPTH = 64
DEFAULT_FRAME_BUDGET = 1 << 24


class Verdict(str, Enum):
    PROVEN = "PROVEN"
    FALSIFIED = "FALSIFIED"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class ProofStatus:
    verdict: Verdict
    cex: Optional[tuple] = None     # ({"state": .., "input": ..}, ...) one per cycle
    attempt: Optional[int] = None   # cycle of the cex at which the failing attempt starts
    depth: Optional[int] = None     # exploration depth when UNDETERMINED

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict.value}
        if self.cex is not None:
            out["cex"] = list(self.cex)
            out["attempt"] = self.attempt
        if self.depth is not None:
            out["depth"] = self.depth
        return out


@dataclass
class Reachability:
    keys: np.ndarray            # state keys in discovery order
    depth: np.ndarray           # BFS depth per state
    parent: np.ndarray          # frame that first reached the state, -1 for init
    expanded: int               # states whose frames were computed
    complete: bool
    depth_reached: int
    frames: Frames              # frames of the expanded states, index = state * |I| + input
    allowed: np.ndarray         # frames permitted by the assumptions
    next_idx: np.ndarray        # successor state index per frame


class _Column(Mapping):
    """Signal values of one window column, gathered on demand."""

    def __init__(self, values: dict, rows: np.ndarray):
        self._values = values
        self._rows = rows
        self._cache: dict = {}

    def __getitem__(self, name):
        if name not in self._cache:
            self._cache[name] = self._values[name][self._rows]
        return self._cache[name]

    def __contains__(self, name):
        return name in self._values

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)


def has_past(e: Optional[Expr]) -> bool:
    return e is not None and any(isinstance(n, Past) for n in walk_expr(e))


def split_signals(e: Expr) -> tuple[set[str], set[str]]:
    """(signals read now, signals read through ``$past``)."""
    now: set[str] = set()
    past: set[str] = set()

    def visit(x, inside):
        if isinstance(x, Past):
            past.update(identifiers(x.arg))
            return
        if isinstance(x, Ident):
            (past if inside else now).add(x.name)
        for c in children(x):
            visit(c, inside)

    visit(e, False)
    return now, past


@dataclass
class CheckResult:
    status: ProofStatus
    exercised: frozenset = field(default_factory=frozenset)


class Checker:
    """Property checker bound to one transition system and its assumptions."""

    def __init__(self, ts: TransitionSystem, assumptions: tuple[SvaProperty, ...] = (),
                 depth_bound: int = DEFAULT_DEPTH, frame_budget: int = DEFAULT_FRAME_BUDGET):
        self.ts = ts
        self.assumptions = tuple(assumptions)
        self.depth_bound = depth_bound
        self.frame_budget = frame_budget
        self.n_inputs = 1 << ts.input_bits
        self._reach: Optional[Reachability] = None
        self._cache: dict[str, CheckResult] = {}
        for a in self.assumptions:
            self._validate(a)
            if a.horizon or has_past(a.antecedent) or has_past(a.consequent) or has_past(a.disable):
                raise UnsupportedTiming(f"{a.name}: only same-cycle assumptions are supported")

    # ---- reachability ----

    def _allowed(self, values: dict, n: int) -> np.ndarray:
        ok = np.ones(n, dtype=bool)
        for a in self.assumptions:
            ev = VecEval(values, self.ts.widths, n)
            holds = ev.truth(a.consequent)
            if a.op is not None:
                holds = ~ev.truth(a.antecedent) | holds
            if a.disable is not None:
                holds = holds | ev.truth(a.disable)
            ok &= holds
        return ok

    @property
    def reach(self) -> Reachability:
        if self._reach is None:
            self._reach = self._explore()
        return self._reach

    def _explore(self) -> Reachability:
        ts, nI = self.ts, self.n_inputs
        inputs = ts.all_inputs()
        init = ts.init_states()
        keys = list(int(k) for k in init)
        index = {k: i for i, k in enumerate(keys)}
        depth = [0] * len(keys)
        parent = [-1] * len(keys)
        layers: list[Frames] = []
        allowed_parts = []
        lo, hi = 0, len(keys)
        level = 0
        while lo < hi and level < self.depth_bound:
            if hi * nI > self.frame_budget:
                raise StateBudgetExceeded(hi * nI, self.frame_budget, "frame")
            states = np.asarray(keys[lo:hi], dtype=U64)
            fr = ts.frames(np.repeat(states, nI), np.tile(inputs, hi - lo))
            ok = self._allowed(fr.values, len(states) * nI)
            layers.append(fr)
            allowed_parts.append(ok)
            cand = np.flatnonzero(ok)
            uniq, first = np.unique(fr.next_keys[cand], return_index=True)
            for pos in np.argsort(first, kind="stable"):
                k = int(uniq[pos])
                if k not in index:
                    index[k] = len(keys)
                    keys.append(k)
                    depth.append(level + 1)
                    parent.append(lo * nI + int(cand[first[pos]]))
            lo, hi = hi, len(keys)
            level += 1
        expanded = lo
        complete = lo == hi
        frames = _concat(layers, ts)
        allowed = np.concatenate(allowed_parts) if allowed_parts else np.zeros(0, dtype=bool)
        key_arr = np.asarray(keys, dtype=U64)
        order = np.argsort(key_arr)
        pos = np.searchsorted(key_arr[order], frames.next_keys)
        next_idx = order[np.minimum(pos, len(order) - 1)].astype(np.int64)
        return Reachability(key_arr, np.asarray(depth), np.asarray(parent, dtype=np.int64),
                            expanded, complete, level if not complete else level - 1,
                            frames, allowed, next_idx)

    def reachable_states(self) -> np.ndarray:
        return self.reach.keys

    # ---- properties ----

    def _validate(self, p: SvaProperty) -> None:
        ts = self.ts
        if ts.clock is not None and (p.clock.signal, p.clock.edge) != (ts.clock.signal, ts.clock.edge):
            raise UnsupportedTiming(f"{p.name}: clock {p.clock.edge} {p.clock.signal} "
                                    f"differs from the design clock")
        for name in p.signals():
            if name == p.clock.signal:
                continue
            if name not in ts.widths:
                raise UnknownSignal(name)

    def _eval(self, win: np.ndarray, col: int, e: Expr) -> np.ndarray:
        values = self.reach.frames.values
        past = None
        if col > 0:
            prev = _Column(values, win[:, col - 1])
            past = lambda arg: VecEval(prev, self.ts.widths, len(win))(arg)  # noqa: E731
        return VecEval(_Column(values, win[:, col]), self.ts.widths, len(win), past).truth(e)

    def _extend(self, win: np.ndarray) -> np.ndarray:
        r = self.reach
        nI = self.n_inputs
        ns = r.next_idx[win[:, -1]]
        keep = ns < r.expanded
        win, ns = win[keep], ns[keep]
        rows = np.repeat(np.arange(len(win)), nI)
        succ = np.repeat(ns, nI) * nI + np.tile(np.arange(nI), len(win))
        ok = r.allowed[succ]
        out = np.column_stack([win[rows[ok]], succ[ok]])
        if len(out) > self.frame_budget:
            raise StateBudgetExceeded(len(out), self.frame_budget, "window")
        return out

    @staticmethod
    def _dedupe(win: np.ndarray) -> np.ndarray:
        key = win[:, -1] if win.shape[1] < 2 else win[:, -2] * (1 << 32) + win[:, -1]
        _, first = np.unique(key, return_index=True)
        return win[np.sort(first)]

    def windows(self, p: SvaProperty) -> tuple[np.ndarray, int]:
        """Active windows of ``p`` and the column of the attempt frame.

        Active means the attempt passed the antecedent and no frame up to the
        consequent is disabled.  Covers use their expression as a filter at the
        end instead, so their windows are all non-disabled attempts.
        """
        r = self.reach
        nI = self.n_inputs
        frames = np.flatnonzero(r.allowed[: r.expanded * nI])
        lookback = has_past(p.antecedent) or has_past(p.disable) or (
            p.horizon == 0 and has_past(p.consequent))
        if lookback:
            pred = frames[r.next_idx[frames] < r.expanded]
            win = self._extend(pred[:, None])
            t = 1
        else:
            win = frames[:, None]
            t = 0
        active = np.ones(len(win), dtype=bool)
        if p.op is not None and p.antecedent is not None and p.antecedent != TRUE:
            active &= self._eval(win, t, p.antecedent)
        if p.disable is not None:
            active &= ~self._eval(win, t, p.disable)
        win = win[active]
        for _ in range(p.horizon):
            win = self._dedupe(self._extend(win))
            if p.disable is not None:
                win = win[~self._eval(win, win.shape[1] - 1, p.disable)]
        return win, t

    def check(self, p: SvaProperty) -> CheckResult:
        body = normalized_body(p)
        if body in self._cache:
            return self._cache[body]
        self._validate(p)
        r = self.reach
        win, t = self.windows(p)
        k = win.shape[1] - 1
        holds = self._eval(win, k, p.consequent) if len(win) else np.zeros(0, dtype=bool)
        if p.kind is PropKind.COVER:
            witnessed = win[holds]
            if len(witnessed):
                res = CheckResult(ProofStatus(Verdict.PROVEN), self._exercised_cover(p, witnessed, t))
            else:
                res = CheckResult(ProofStatus(Verdict.UNDETERMINED, depth=r.depth_reached))
        else:
            bad = win[~holds]
            if len(bad):
                res = CheckResult(self._falsified(bad))
            elif r.complete:
                res = CheckResult(ProofStatus(Verdict.PROVEN), self._exercised_assert(p, win))
            else:
                res = CheckResult(ProofStatus(Verdict.UNDETERMINED, depth=r.depth_reached))
        self._cache[body] = res
        return res

    def prove(self, p: SvaProperty) -> ProofStatus:
        return self.check(p).status

    # ---- counterexamples ----

    def _falsified(self, bad: np.ndarray) -> ProofStatus:
        r = self.reach
        nI = self.n_inputs
        depths = r.depth[bad[:, 0] // nI]
        row = bad[int(np.argmin(depths))]
        prefix = []
        s = int(row[0]) // nI
        while r.parent[s] >= 0:
            f = int(r.parent[s])
            prefix.append(f)
            s = f // nI
        chain = prefix[::-1] + [int(f) for f in row]
        trace = tuple({"state": self.ts.state_dict(int(r.keys[f // nI])),
                       "input": self.ts.input_dict(f % nI)} for f in chain)
        return ProofStatus(Verdict.FALSIFIED, cex=trace, attempt=len(prefix))

    # ---- coverage attribution ----

    def _ran(self, tid: str, frames: np.ndarray) -> bool:
        mask = self.reach.frames.executed.get(tid)
        return mask is not None and bool(mask[frames].any())

    def _exercised_assert(self, p: SvaProperty, win: np.ndarray) -> frozenset:
        if not len(win):
            return frozenset()
        now, past = split_signals(p.consequent)
        coi_now = self.ts.signal_closure(now)
        coi_past = self.ts.signal_closure(past)
        k = win.shape[1] - 1
        out = set()
        for tgt in self.ts.targets:
            assigned = set(tgt.assigned)
            if tgt.clocked:
                if k >= 1 and assigned & coi_now and self._ran(tgt.id, win[:, k - 1]):
                    out.add(tgt.id)
            else:
                if assigned & coi_now and self._ran(tgt.id, win[:, k]):
                    out.add(tgt.id)
                elif k >= 1 and assigned & coi_past and self._ran(tgt.id, win[:, k - 1]):
                    out.add(tgt.id)
        return frozenset(out)

    def _exercised_cover(self, p: SvaProperty, win: np.ndarray, t: int) -> frozenset:
        now, past = split_signals(p.consequent)
        coi = self.ts.signal_closure(now | past)
        out = set()
        for tgt in self.ts.targets:
            touched = set(tgt.assigned)
            for g in tgt.guards:
                touched.update(identifiers(g.cond))
            if touched & coi and self._ran(tgt.id, win[:, t]):
                out.add(tgt.id)
        return frozenset(out)

    def executed_anywhere(self) -> set[str]:
        r = self.reach
        frames = np.flatnonzero(r.allowed)
        return {tid for tid, m in r.frames.executed.items() if m[frames].any()}


def _concat(layers: list[Frames], ts: TransitionSystem) -> Frames:
    if not layers:
        return Frames({}, np.zeros(0, dtype=U64), {})
    if len(layers) == 1:
        return layers[0]
    names = layers[0].values.keys()
    values = {n: np.concatenate([np.broadcast_to(l.values[n], l.next_keys.shape) for l in layers])
              for n in names}
    executed = {}
    for t in ts.targets:
        parts = [l.executed.get(t.id, np.zeros(len(l.next_keys), dtype=bool)) for l in layers]
        executed[t.id] = np.concatenate(parts)
    return Frames(values, np.concatenate([l.next_keys for l in layers]), executed)
