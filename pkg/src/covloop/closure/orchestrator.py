"""The closure loop: prove, measure, analyze, generate, review, merge, repeat."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from ..coverage import CoverageReport, Status, enumerate_targets, report_to_json
from ..engine.backend import BuiltinBackend, EngineConfig, FormalBackend
from ..engine.check import Verdict
from ..errors import ConfigError, UnavailableSignal, UnsupportedTiming
from ..holes import analyze, context_to_json
from ..rtl.ast import DesignUnit
from ..rtl.parser import parse_file
from ..sva.generator import behavior_slug, design_resources, generate_property, merge_into_file, name_and_dedup
from ..sva.llm import LlmConfig, LlmGenerator
from ..sva.model import SvaProperty, render_property
from ..sva.parser import parse_sva
from .hil import HilMode, Reviewer
from .kpi import KpiReport, kpis_from_statuses


class Outcome(str, Enum):
    SIGNED_OFF = "SIGNED_OFF"
    THRESHOLD_MET = "THRESHOLD_MET"
    ESCALATED = "ESCALATED"
    STALLED = "STALLED"


EXIT_CODES = {Outcome.SIGNED_OFF: 0, Outcome.THRESHOLD_MET: 0, Outcome.ESCALATED: 2,
              Outcome.STALLED: 3}


@dataclass
class ClosureConfig:
    threshold: float = 100.0
    max_iterations: int = 5
    hil: HilMode = HilMode.AUTO
    seed: int = 0
    exclude_unreachable: bool = False
    generation: bool = True
    stall_exit: bool = True
    delay: Optional[int] = None         # force ``|-> ##N`` for clocked asserts
    depth_bound: int = 64
    jobs: int = 1
    review_dir: Optional[str] = None
    review_timeout_s: float = 3600.0

    def validate(self) -> "ClosureConfig":
        if not 0 < self.threshold <= 100:
            raise ConfigError(f"threshold must be in (0, 100], got {self.threshold}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.delay is not None and self.delay < 1:
            raise ConfigError("delay must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    @classmethod
    def from_dict(cls, doc: dict) -> "ClosureConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        doc = dict(doc)
        if "hil" in doc:
            try:
                doc["hil"] = HilMode(doc["hil"])
            except ValueError:
                raise ConfigError(f"unknown hil mode {doc['hil']!r}") from None
        try:
            return cls(**doc).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self) -> dict:
        out = asdict(self)
        out["hil"] = self.hil.value
        out.pop("review_dir")
        return out


@dataclass
class IterationRecord:
    iteration: int
    coverage_pct: float
    counts: dict[str, int]
    proofs: dict[str, str]
    contexts: list[dict] = field(default_factory=list)
    generated: list[dict] = field(default_factory=list)
    decisions: list[dict] = field(default_factory=list)
    merged: list[str] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    llm: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class ClosureState:
    iteration: int = 0
    history: list[IterationRecord] = field(default_factory=list)
    outcome: Optional[Outcome] = None
    pending: list[str] = field(default_factory=list)       # properties awaiting review
    open_targets: list[str] = field(default_factory=list)  # targets left at escalation


@dataclass
class ClosureResult:
    design: str
    config: ClosureConfig
    state: ClosureState
    sva_text: str
    report: CoverageReport
    kpis: KpiReport
    generated: list[str]

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.state.outcome]

    def manifest(self) -> dict:
        return {
            "design": self.design,
            "config": self.config.to_json(),
            "outcome": self.state.outcome.value,
            "iterations": [r.to_json() for r in self.state.history],
            "pending": self.state.pending,
            "open_targets": self.state.open_targets,
            "generated": self.generated,
            "kpis": self.kpis.to_json(),
            "final_report": report_to_json(self.report),
        }

    def manifest_text(self) -> str:
        return json.dumps(self.manifest(), indent=2) + "\n"


def load_design(paths: Sequence, top: Optional[str] = None) -> DesignUnit:
    units = [u for p in paths for u in parse_file(p)]
    if not units:
        raise ConfigError("no module found in the design files")
    if top is None:
        return units[0]
    for u in units:
        if u.name == top:
            return u
    raise ConfigError(f"top module {top!r} not found")


def run_closure(unit: DesignUnit, sva_text: str, config: ClosureConfig,
                backend: Optional[FormalBackend] = None, reviewer: Optional[Reviewer] = None,
                llm: Optional[LlmGenerator] = None) -> ClosureResult:
    config.validate()
    backend = backend or BuiltinBackend()
    reviewer = reviewer or Reviewer(config.hil, config.review_dir, config.review_timeout_s)
    targets = enumerate_targets(unit)
    state = ClosureState()
    generated: list[str] = []
    proofs: dict[str, Verdict] = {}
    report: Optional[CoverageReport] = None

    for it in range(config.max_iterations):
        state.iteration = it
        sva = parse_sva(sva_text)
        props = sva.properties
        engine_cfg = EngineConfig(depth_bound=config.depth_bound, jobs=config.jobs,
                                  exclude_unreachable=config.exclude_unreachable, iteration=it)
        statuses = backend.prove(unit, props, engine_cfg)
        proofs = {n: s.verdict for n, s in statuses.items()}
        report = backend.measure_coverage(unit, props, engine_cfg)
        record = IterationRecord(
            it, report.coverage_pct, {s.value: report.count(s) for s in Status},
            {n: v.value for n, v in proofs.items()})
        state.history.append(record)

        if report.coverage_pct >= config.threshold:
            state.outcome = Outcome.SIGNED_OFF if it == 0 else Outcome.THRESHOLD_MET
            break
        if it == config.max_iterations - 1:
            state.outcome = Outcome.ESCALATED
            break

        merged: list[SvaProperty] = []
        if config.generation:
            merged = _generation_pass(unit, sva, report, targets, config, it, reviewer, llm,
                                      record, state)
            sva_text = merge_into_file(sva_text, merged)
            generated += [p.name for p in merged]
        if not merged and config.stall_exit and (
                not config.generation
                or (it > 0 and state.history[-2].coverage_pct == report.coverage_pct)):
            state.outcome = Outcome.STALLED
            break

    if state.outcome is Outcome.ESCALATED:
        state.open_targets = [t.id for t in report.targets if t.status is not Status.COVERED]
    kpis = kpis_from_statuses(generated, proofs, report.coverage_pct)
    return ClosureResult(unit.name, config, state, sva_text, report, kpis, generated)


def _generation_pass(unit, sva, report, targets, config, it, reviewer, llm,
                     record: IterationRecord, state: ClosureState) -> list[SvaProperty]:
    contexts = analyze(report, unit, unit.source, targets)
    record.contexts = [context_to_json(c) for c in contexts]
    res = design_resources(unit, sva.resources())
    candidates: list[SvaProperty] = []
    slugs: list[str] = []
    for ctx in contexts:
        try:
            if llm is not None:
                ps = llm.generate(ctx, res, it)
            else:
                ps = generate_property(ctx, res, it, config.delay)
        except (UnsupportedTiming, UnavailableSignal) as exc:
            record.skipped.append({"locations": [str(s) for s in ctx.locations],
                                   "reason": f"{type(exc).__name__}: {exc}"})
            continue
        candidates += ps
        slugs += [behavior_slug(ctx.behavior)] * len(ps)
    if llm is not None:
        record.llm = [a.to_json() for a in llm.audits]
        llm.audits.clear()
    named = name_and_dedup(candidates, res, config.seed, slugs, it)
    record.generated = [{"name": p.name, "kind": p.kind.value, "text": render_property(p),
                         "targets": list(p.targets)} for p in named]
    if not named:
        return []
    approved, log = reviewer.review(named, res, it)
    record.decisions = [e.to_json() for e in log]
    state.pending = [e.name for e in log if e.pending]
    record.merged = [p.name for p in approved]
    return approved


def close_files(design_paths: Sequence, sva_path, config: ClosureConfig, top: Optional[str] = None,
                backend: Optional[FormalBackend] = None, llm_config: Optional[LlmConfig] = None,
                reviewer: Optional[Reviewer] = None) -> ClosureResult:
    unit = load_design(design_paths, top)
    sva_text = Path(sva_path).read_text() if sva_path and Path(sva_path).exists() else ""
    llm = LlmGenerator(llm_config) if llm_config is not None else None
    return run_closure(unit, sva_text, config, backend, reviewer, llm)
