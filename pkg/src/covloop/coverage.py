"""Statement/branch coverage targets and canonical coverage reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import jsonschema
from referencing import Registry, Resource

from .errors import SchemaError, UnknownTarget
from .rtl.ast import (
    FALSE, TRUE, Assign, Binary, Block, Case, ContinuousAssign, DesignUnit, Expr, If,
    Number, ProcBlock, SourceSpan, Stmt, assigned_names, lhs_name,
)
from .rtl.exprs import conj, const_value, disj, neg, self_width
from .rtl.signals import param_env, resolve_signals, width_lookup

SCHEMA_DIR = Path(__file__).parent / "schemas"


class TargetKind(str, Enum):
    STATEMENT = "STATEMENT"
    BRANCH = "BRANCH"


class Status(str, Enum):
    COVERED = "COVERED"
    UNCOVERED = "UNCOVERED"
    UNREACHABLE = "UNREACHABLE"


@dataclass(frozen=True)
class Guard:
    """One branch decision on the way from a process root to a target."""

    construct: Any          # the If/Case node
    arm: Any                # "then" | "else" | "default" | arm index
    cond: Expr
    is_reset: bool = False


@dataclass
class CoverageTarget:
    id: str
    kind: TargetKind
    span: SourceSpan
    module: str
    timing: str             # always_ff | always_comb | always | assign
    block: str              # if | case | always | assign
    path_condition: Expr
    # analysis-only fields
    key: tuple = field(default=(), compare=False, repr=False)
    guards: tuple = field(default=(), compare=False, repr=False)
    node: Any = field(default=None, compare=False, repr=False)
    item: Any = field(default=None, compare=False, repr=False)
    implicit: bool = field(default=False, compare=False)
    assigned: tuple = field(default=(), compare=False, repr=False)

    @property
    def enclosing(self) -> dict:
        return {"module": self.module, "timing_class": self.timing, "block": self.block}

    @property
    def clocked(self) -> bool:
        return isinstance(self.item, ProcBlock) and self.item.clocked


def target_id(origin: str, module: str, code: str, span: SourceSpan) -> str:
    return f"{Path(origin).name}:{module}:{code}@{span}"


def _label_match(subject: Expr, label: Expr, kind: str) -> Expr:
    if kind == "casez" and isinstance(label, Number) and label.wild:
        width = label.width or 32
        care = ((1 << width) - 1) & ~label.wild
        return Binary("==", Binary("&", subject, Number(care, width)), Number(label.value & care, width))
    return Binary("==", subject, label)


def _label_mismatch(subject: Expr, label: Expr, kind: str) -> Expr:
    m = _label_match(subject, label, kind)
    return Binary("!=", m.left, m.right)


def case_is_full(case: Case, unit: DesignUnit, width_of) -> bool:
    params = param_env(unit)
    try:
        w = self_width(case.subject, width_of)
    except (KeyError, ValueError):
        return False
    if w > 16:
        return False
    patterns = []
    for arm in case.arms:
        for label in arm.labels:
            v = const_value(label, params)
            if v is None:
                return False
            wild = label.wild if isinstance(label, Number) and case.kind == "casez" else 0
            patterns.append((v, wild))
    if all(p[1] == 0 for p in patterns):
        return len({v for v, _ in patterns if v < (1 << w)}) == (1 << w)
    return all(any(((x ^ v) & ~wild) == 0 for v, wild in patterns) for x in range(1 << w))


class _Enumerator:
    def __init__(self, unit: DesignUnit):
        self.unit = unit
        self.width_of = width_lookup(unit, resolve_signals(unit))
        self.targets: list[CoverageTarget] = []

    def add(self, kind: TargetKind, code: str, span: SourceSpan, guards, key, node, item,
            timing: str, block: str, implicit=False, assigned=()):
        tid = target_id(self.unit.origin or self.unit.name, self.unit.name, code, span)
        self.targets.append(CoverageTarget(
            tid, kind, span, self.unit.name, timing, block,
            conj([g.cond for g in guards]), key, tuple(guards), node, item, implicit,
            tuple(assigned)))

    def run(self) -> list[CoverageTarget]:
        for item in self.unit.items:
            if isinstance(item, ContinuousAssign):
                a = item.assign
                self.add(TargetKind.STATEMENT, "S", a.span, [], ("stmt", id(a)), a, item,
                         "assign", "assign", assigned=(lhs_name(a.lhs),))
            else:
                reset_if = None
                if item.reset is not None:
                    body = item.body
                    if isinstance(body, Block) and len(body.stmts) == 1:
                        body = body.stmts[0]
                    reset_if = body
                self.walk(item.body, [], item, "always", reset_if)
        return self.targets

    def walk(self, s: Stmt, guards: list[Guard], item: ProcBlock, block: str, reset_if):
        timing = item.timing_name
        if isinstance(s, Assign):
            self.add(TargetKind.STATEMENT, "S", s.span, guards, ("stmt", id(s)), s, item,
                     timing, block, assigned=(lhs_name(s.lhs),))
        elif isinstance(s, Block):
            for c in s.stmts:
                self.walk(c, guards, item, block, reset_if)
        elif isinstance(s, If):
            is_reset = s is reset_if
            everything = assigned_names(s)
            g_then = Guard(s, "then", s.cond, is_reset)
            g_else = Guard(s, "else", neg(s.cond), is_reset)
            self.add(TargetKind.BRANCH, "B", s.then.span, guards + [g_then], ("then", id(s)),
                     s.then, item, timing, "if", assigned=assigned_names(s.then) or everything)
            self.walk(s.then, guards + [g_then], item, "if", reset_if)
            if s.other is not None:
                self.add(TargetKind.BRANCH, "B", s.other.span, guards + [g_else], ("else", id(s)),
                         s.other, item, timing, "if", assigned=assigned_names(s.other) or everything)
                self.walk(s.other, guards + [g_else], item, "if", reset_if)
            else:
                self.add(TargetKind.BRANCH, "E", s.span, guards + [g_else], ("else", id(s)),
                         s, item, timing, "if", implicit=True, assigned=everything)
        elif isinstance(s, Case):
            everything = assigned_names(s)
            for i, arm in enumerate(s.arms):
                cond = disj([_label_match(s.subject, lb, s.kind) for lb in arm.labels])
                g = Guard(s, i, cond)
                self.add(TargetKind.BRANCH, "B", arm.body.span, guards + [g], ("arm", id(s), i),
                         arm.body, item, timing, "case",
                         assigned=assigned_names(arm.body) or everything)
                self.walk(arm.body, guards + [g], item, "case", reset_if)
            rest = conj([_label_mismatch(s.subject, lb, s.kind) for arm in s.arms for lb in arm.labels])
            g = Guard(s, "default", rest)
            if s.default is not None:
                self.add(TargetKind.BRANCH, "B", s.default.span, guards + [g], ("default", id(s)),
                         s.default, item, timing, "case",
                         assigned=assigned_names(s.default) or everything)
                self.walk(s.default, guards + [g], item, "case", reset_if)
            elif not case_is_full(s, self.unit, self.width_of):
                self.add(TargetKind.BRANCH, "E", s.span, guards + [g], ("default", id(s)),
                         s, item, timing, "case", implicit=True, assigned=everything)


def enumerate_targets(unit: DesignUnit) -> list[CoverageTarget]:
    """One STATEMENT target per assignment, one BRANCH target per arm.

    If statements without else and case statements without default that do not
    cover every subject value get an implicit BRANCH target on the whole construct.
    """
    return _Enumerator(unit).run()


# ---- reports ----

@dataclass
class TargetStatus:
    id: str
    kind: TargetKind
    start: tuple[int, int]
    end: tuple[int, int]
    status: Status


@dataclass
class CoverageReport:
    design: str
    targets: list[TargetStatus]
    coverage_pct: float = 0.0
    iteration: int = 0

    def by_id(self) -> dict[str, TargetStatus]:
        return {t.id: t for t in self.targets}

    def with_statuses(self, statuses: dict[str, Status]) -> "CoverageReport":
        return CoverageReport(self.design, [
            TargetStatus(t.id, t.kind, t.start, t.end, statuses.get(t.id, t.status))
            for t in self.targets], self.coverage_pct, self.iteration)

    def count(self, status: Status) -> int:
        return sum(1 for t in self.targets if t.status is status)


def compute_coverage(report: CoverageReport, exclude_unreachable: bool = False) -> float:
    total = len(report.targets)
    covered = report.count(Status.COVERED)
    if exclude_unreachable:
        total -= report.count(Status.UNREACHABLE)
    if total == 0:
        return 100.0
    return round(100.0 * covered / total, 2)


def build_report(design: str, targets: list[CoverageTarget], statuses: dict[str, Status],
                 iteration: int = 0, exclude_unreachable: bool = False) -> CoverageReport:
    rows = [TargetStatus(t.id, t.kind, t.span.start, t.span.end,
                         statuses.get(t.id, Status.UNCOVERED)) for t in targets]
    report = CoverageReport(design, rows, 0.0, iteration)
    report.coverage_pct = compute_coverage(report, exclude_unreachable)
    return report


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text())


def _registry() -> Registry:
    docs = [load_schema(p.name) for p in sorted(SCHEMA_DIR.glob("*.json"))]
    return Registry().with_resources((d["$id"], Resource.from_contents(d)) for d in docs)


def validate_json(doc: Any, schema: str) -> None:
    """Check ``doc`` against a bundled schema; raises SchemaError at the first problem."""
    validator = jsonschema.Draft202012Validator(load_schema(schema), registry=_registry())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError(_pointer(errors[0].absolute_path), errors[0].message)


def report_to_json(report: CoverageReport) -> dict[str, Any]:
    return {
        "design": report.design,
        "iteration": report.iteration,
        "targets": [{"id": t.id, "kind": t.kind.value, "start": list(t.start), "end": list(t.end),
                     "status": t.status.value} for t in report.targets],
        "coverage_pct": report.coverage_pct,
    }


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def report_from_json(doc: Any) -> CoverageReport:
    validate_json(doc, "coverage_report.json")
    targets = [TargetStatus(t["id"], TargetKind(t["kind"]), tuple(t["start"]), tuple(t["end"]),
                            Status(t["status"])) for t in doc["targets"]]
    report = CoverageReport(doc["design"], targets, float(doc["coverage_pct"]), doc["iteration"])
    expected = {compute_coverage(report, False), compute_coverage(report, True)}
    if not any(abs(report.coverage_pct - e) < 0.005 for e in expected):
        raise SchemaError("/coverage_pct", f"{report.coverage_pct} does not match the target statuses")
    ids = [t.id for t in targets]
    if len(set(ids)) != len(ids):
        raise SchemaError("/targets", "duplicate target id")
    return report


def dumps_report(report: CoverageReport) -> str:
    return json.dumps(report_to_json(report), indent=2) + "\n"


def write_report(report: CoverageReport, path) -> None:
    Path(path).write_text(dumps_report(report))


def read_report(path) -> CoverageReport:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return report_from_json(doc)


def check_report_targets(report: CoverageReport, targets: list[CoverageTarget]) -> None:
    known = {t.id for t in targets}
    for row in report.targets:
        if row.id not in known:
            raise UnknownTarget(row.id)


# ---- foreign formats ----

_CSV_KINDS = {"statement": ("S", TargetKind.STATEMENT), "branch": ("B", TargetKind.BRANCH),
              "implicit_branch": ("E", TargetKind.BRANCH)}


def read_csv_export(text: str, design: Optional[str] = None, iteration: int = 0) -> CoverageReport:
    """Adapter for a flat CSV export (one row per coverage item).

    Columns: file, module, kind (statement|branch|implicit_branch), start_line,
    start_col, end_line, end_col, status (covered|uncovered|unreachable).
    """
    rows = list(csv.DictReader(io.StringIO(text)))
    targets = []
    for i, row in enumerate(rows):
        try:
            code, kind = _CSV_KINDS[row["kind"].strip().lower()]
            span = SourceSpan(int(row["start_line"]), int(row["start_col"]),
                              int(row["end_line"]), int(row["end_col"]))
            status = Status(row["status"].strip().upper())
        except (KeyError, ValueError, AttributeError) as exc:
            raise SchemaError(f"/{i}", f"bad export row: {exc}") from None
        module = row["module"].strip()
        design = design or module
        targets.append(TargetStatus(target_id(row["file"].strip(), module, code, span), kind,
                                    span.start, span.end, status))
    report = CoverageReport(design or "", targets, 0.0, iteration)
    report.coverage_pct = compute_coverage(report)
    return report
