"""Proof backends: the built-in explicit-state checker and a replay adapter."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from ..coverage import CoverageReport, build_report, check_report_targets, enumerate_targets, report_from_json
from ..errors import RecordingExhausted, SchemaError
from ..rtl.ast import DesignUnit
from ..sva.model import PropKind, SvaProperty
from .check import DEFAULT_DEPTH, DEFAULT_FRAME_BUDGET, Checker, ProofStatus, Verdict
from .measure import target_statuses
from .system import DEFAULT_INPUT_BUDGET, DEFAULT_STATE_BUDGET, elaborate


@dataclass(frozen=True)
class EngineConfig:
    depth_bound: int = DEFAULT_DEPTH
    state_budget: int = DEFAULT_STATE_BUDGET
    input_budget: int = DEFAULT_INPUT_BUDGET
    frame_budget: int = DEFAULT_FRAME_BUDGET
    exclude_unreachable: bool = False
    jobs: int = 1
    iteration: int = 0


class FormalBackend(Protocol):
    def prove(self, unit: DesignUnit, props: Sequence[SvaProperty],
              config: EngineConfig) -> dict[str, ProofStatus]: ...

    def measure_coverage(self, unit: DesignUnit, props: Sequence[SvaProperty],
                         config: EngineConfig) -> CoverageReport: ...


def _split(props: Sequence[SvaProperty]):
    assumes = tuple(p for p in props if p.kind is PropKind.ASSUME)
    checked = [p for p in props if p.kind is not PropKind.ASSUME]
    return assumes, checked


class BuiltinBackend:
    """Elaborates once per (design, assumption set) and reuses verdicts."""

    def __init__(self):
        self._checkers: dict[tuple, Checker] = {}

    def checker(self, unit: DesignUnit, props: Sequence[SvaProperty], config: EngineConfig) -> Checker:
        assumes, _ = _split(props)
        key = (unit.name, unit.source, tuple(repr(a) for a in assumes), config.depth_bound,
               config.state_budget, config.input_budget, config.frame_budget)
        if key not in self._checkers:
            ts = elaborate(unit, config.state_budget, config.input_budget)
            self._checkers[key] = Checker(ts, assumes, config.depth_bound, config.frame_budget)
        return self._checkers[key]

    def _results(self, unit, props, config):
        ck = self.checker(unit, props, config)
        _, checked = _split(props)
        ck.reach  # explore once before fanning out
        if config.jobs > 1 and len(checked) > 1:
            with ThreadPoolExecutor(config.jobs) as pool:
                results = list(pool.map(ck.check, checked))
        else:
            results = [ck.check(p) for p in checked]
        return ck, checked, results

    def prove(self, unit, props, config=EngineConfig()) -> dict[str, ProofStatus]:
        _, checked, results = self._results(unit, props, config)
        return {p.name: r.status for p, r in zip(checked, results)}

    def measure_coverage(self, unit, props, config=EngineConfig()) -> CoverageReport:
        ck, _, results = self._results(unit, props, config)
        return build_report(unit.name, ck.ts.targets, target_statuses(ck, results),
                            config.iteration, config.exclude_unreachable)


class ReplayBackend:
    """Plays back recorded reports and proof tables, one entry per iteration.

    ``prove`` answers from the current entry; ``measure_coverage`` returns its
    report and advances.  Properties missing from a proof table get no status.
    """

    def __init__(self, entries: list[dict]):
        self.entries = entries
        self.position = 0

    @classmethod
    def load(cls, path) -> "ReplayBackend":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from None
        if not isinstance(doc, list):
            raise SchemaError("", "recording must be a JSON array")
        for i, entry in enumerate(doc):
            if not isinstance(entry, dict):
                raise SchemaError(f"/{i}", "entry must be an object")
            proofs = entry.get("proofs", {})
            if not isinstance(proofs, dict):
                raise SchemaError(f"/{i}/proofs", "must be an object")
            for name, status in proofs.items():
                if status not in Verdict.__members__:
                    raise SchemaError(f"/{i}/proofs/{name}", f"unknown status {status!r}")
        return cls(doc)

    def _entry(self) -> dict:
        if self.position >= len(self.entries):
            raise RecordingExhausted(f"recording has {len(self.entries)} entries")
        return self.entries[self.position]

    def prove(self, unit, props, config=EngineConfig()) -> dict[str, ProofStatus]:
        proofs = self._entry().get("proofs", {})
        return {p.name: ProofStatus(Verdict(proofs[p.name])) for p in props
                if p.kind is not PropKind.ASSUME and p.name in proofs}

    def measure_coverage(self, unit, props, config=EngineConfig()) -> CoverageReport:
        entry = dict(self._entry())
        entry.pop("proofs", None)
        try:
            report = report_from_json(entry)
        except SchemaError as exc:
            raise SchemaError(f"/{self.position}{exc.pointer}", exc.reason) from None
        check_report_targets(report, enumerate_targets(unit))
        self.position += 1
        return report


def make_backend(kind: str, recording=None):
    if kind == "builtin":
        return BuiltinBackend()
    if kind == "replay":
        if recording is None:
            raise SchemaError("", "the replay backend needs a recording")
        return ReplayBackend.load(recording)
    raise ValueError(f"unknown backend {kind!r}")
