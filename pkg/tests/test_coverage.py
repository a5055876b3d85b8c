import json

import pytest

from conftest import CORPUS_NAMES, FIXTURES, corpus_unit, source_unit, unit_of
from expected import CAPTURE_HALF_COVERAGE, CAPTURE_STATEMENT_LINES, CORPUS_TARGET_COUNTS
from oracle import ScalarDesign
from covloop.coverage import (
    CoverageReport, Status, TargetKind, TargetStatus, build_report, check_report_targets,
    compute_coverage, enumerate_targets, read_csv_export, read_report, report_from_json,
    report_to_json, write_report,
)
from covloop.errors import SchemaError, UnknownTarget
from covloop.rtl.ast import TRUE
from covloop.rtl.exprs import ScalarEval, render


def _report(statuses):
    rows = [TargetStatus(f"t{i}", TargetKind.STATEMENT, (i + 1, 1), (i + 1, 2), s)
            for i, s in enumerate(statuses)]
    return CoverageReport("d", rows)


def test_capture_statement_targets(capture):
    stmts = [t for t in enumerate_targets(capture) if t.kind is TargetKind.STATEMENT]
    assert tuple(t.span.start_line for t in stmts) == CAPTURE_STATEMENT_LINES
    assert [render(t.path_condition) for t in stmts] == ["a && b", "!(a && b)"]
    assert all(t.timing == "always" and t.block == "if" for t in stmts)


def test_target_ids_are_stable(capture):
    ids = [t.id for t in enumerate_targets(capture)]
    assert ids == ["capture.v:capture:B@3.3-3.10", "capture.v:capture:S@3.3-3.10",
                   "capture.v:capture:B@5.3-5.10", "capture.v:capture:S@5.3-5.10"]
    assert ids == [t.id for t in enumerate_targets(capture)]


def test_single_assign_target():
    unit = source_unit("module m(input x, output y); assign y = x; endmodule")
    (t,) = enumerate_targets(unit)
    assert t.kind is TargetKind.STATEMENT and t.path_condition == TRUE and t.timing == "assign"


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_target_counts(name):
    assert len(enumerate_targets(corpus_unit(name))) == CORPUS_TARGET_COUNTS[name]


def test_path_conditions_match_exhaustive_simulation():
    unit = unit_of(FIXTURES / "nested.v")
    design = ScalarDesign(unit)
    targets = enumerate_targets(unit)
    assert sum(design.widths[n] for n in design.inputs) == 8
    for inp in design.all_inputs():
        env, _, executed = design.step((), inp)
        ev = ScalarEval(env, design.widths)
        for t in targets:
            assert ev.truth(t.path_condition) == (t.id in executed), (t.id, inp)


def test_nested_guard_is_conjunction():
    unit = unit_of(FIXTURES / "nested.v")
    inner = [t for t in enumerate_targets(unit) if t.span.start_line == 12 and t.kind is TargetKind.STATEMENT]
    assert render(inner[0].path_condition) == "sel == 2'd1 && p == 2'd3"


@pytest.mark.parametrize("statuses,flag,want", [
    ([Status.COVERED, Status.UNCOVERED], False, CAPTURE_HALF_COVERAGE),
    ([], False, 100.0),
    ([Status.COVERED] * 3 + [Status.UNCOVERED, Status.UNREACHABLE], True, 75.0),
    ([Status.COVERED] * 3 + [Status.UNCOVERED, Status.UNREACHABLE], False, 60.0),
    ([Status.UNREACHABLE], True, 100.0),
    ([Status.COVERED, Status.UNCOVERED, Status.UNCOVERED], False, 33.33),
])
def test_compute_coverage(statuses, flag, want):
    assert compute_coverage(_report(statuses), flag) == want


def test_report_round_trip(tmp_path, capture):
    targets = enumerate_targets(capture)
    statuses = {t.id: Status.COVERED for t in targets if t.span.start_line == 3}
    report = build_report("capture", targets, statuses)
    assert report.coverage_pct == CAPTURE_HALF_COVERAGE
    assert report.by_id()["capture.v:capture:S@5.3-5.10"].status is Status.UNCOVERED
    path = tmp_path / "r.json"
    write_report(report, path)
    assert read_report(path) == report


def test_unknown_status_names_field(capture):
    doc = report_to_json(build_report("capture", enumerate_targets(capture), {}))
    doc["targets"][1]["status"] = "MAYBE"
    with pytest.raises(SchemaError) as info:
        report_from_json(doc)
    assert info.value.pointer == "/targets/1/status"


def test_inconsistent_percentage_rejected(capture):
    doc = report_to_json(build_report("capture", enumerate_targets(capture), {}))
    doc["coverage_pct"] = 75.0
    with pytest.raises(SchemaError, match="coverage_pct"):
        report_from_json(doc)


def test_missing_field_and_bad_json(tmp_path):
    with pytest.raises(SchemaError):
        report_from_json({"design": "d", "targets": []})
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(SchemaError):
        read_report(bad)


def test_csv_export_matches_enumeration(capture):
    report = read_csv_export((FIXTURES / "capture_export.csv").read_text())
    assert {t.id for t in report.targets} == {t.id for t in enumerate_targets(capture)}
    assert report.coverage_pct == CAPTURE_HALF_COVERAGE
    check_report_targets(report, enumerate_targets(capture))


def test_csv_bad_row():
    text = "file,module,kind,start_line,start_col,end_line,end_col,status\nx.v,m,toggle,1,1,1,2,covered\n"
    with pytest.raises(SchemaError, match="/0"):
        read_csv_export(text)


def test_foreign_target_rejected(capture):
    report = _report([Status.COVERED])
    with pytest.raises(UnknownTarget):
        check_report_targets(report, enumerate_targets(capture))


def test_report_json_is_plain(capture):
    doc = report_to_json(build_report("capture", enumerate_targets(capture), {}))
    assert json.loads(json.dumps(doc)) == doc
    assert doc["coverage_pct"] == 0.0 and len(doc["targets"]) == 4
