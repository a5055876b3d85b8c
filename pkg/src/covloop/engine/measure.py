"""Checker-style coverage from proof results."""

from __future__ import annotations

from typing import Iterable

from ..coverage import CoverageReport, Status, build_report
from ..sva.model import PropKind, SvaProperty
from .check import Checker, CheckResult, Verdict


def target_statuses(checker: Checker, results: Iterable[CheckResult]) -> dict[str, Status]:
    """UNREACHABLE needs a complete exploration in which the target never runs;
    COVERED needs a PROVEN assert or witnessed cover that exercises it."""
    exercised: set[str] = set()
    for res in results:
        if res.status.verdict is Verdict.PROVEN:
            exercised |= res.exercised
    ran = checker.executed_anywhere()
    complete = checker.reach.complete
    out = {}
    for t in checker.ts.targets:
        if complete and t.id not in ran:
            out[t.id] = Status.UNREACHABLE
        elif t.id in exercised:
            out[t.id] = Status.COVERED
        else:
            out[t.id] = Status.UNCOVERED
    return out


def measure_coverage(checker: Checker, props: Iterable[SvaProperty], iteration: int = 0,
                     exclude_unreachable: bool = False) -> CoverageReport:
    results = [checker.check(p) for p in props if p.kind is not PropKind.ASSUME]
    statuses = target_statuses(checker, results)
    return build_report(checker.ts.unit.name, checker.ts.targets, statuses, iteration,
                        exclude_unreachable)
