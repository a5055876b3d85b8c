import itertools

import pytest

from conftest import CORPUS, CORPUS_NAMES, FIXTURES, corpus_unit, source_unit, unit_of
from expected import ALU_SUM_CONTEXT, ALU_SUM_SPAN, CONTEXT_KEYS
from covloop.coverage import Status, build_report, enumerate_targets, validate_json
from covloop.engine.backend import BuiltinBackend
from covloop.errors import SpanOutOfRange
from covloop.holes import (
    InputType, analyze, classify_holes, consolidate, context_from_json, context_to_json,
    derive_context, dumps_contexts, extract_slice, loads_contexts,
)
from covloop.rtl.ast import TRUE, SourceSpan
from covloop.rtl.exprs import render


def _target(unit, line, code="S"):
    return next(t for t in enumerate_targets(unit)
                if t.span.start_line == line and t.id.split(":")[-1].startswith(code))


def _baseline(unit):
    return BuiltinBackend().measure_coverage(unit, [])


def test_else_arm_hole_is_branch_structure(capture):
    targets = enumerate_targets(capture)
    statuses = {t.id: Status.COVERED for t in targets if t.span.start_line == 3}
    part = classify_holes(build_report("capture", targets, statuses), capture)
    assert {t.span.start_line for t in part.branch_or_statement} == {5}
    assert part.isolated == []


def test_top_level_assign_is_isolated():
    unit = source_unit("module m(input x, output y); assign y = x; endmodule")
    part = classify_holes(build_report("m", enumerate_targets(unit), {}), unit)
    assert len(part.isolated) == 1 and part.branch_or_statement == []


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_partition_covers_all_uncovered(name):
    unit = corpus_unit(name)
    report = _baseline(unit)
    part = classify_holes(report, unit)
    assert len(part.branch_or_statement) + len(part.isolated) == report.count(Status.UNCOVERED)


def test_published_slice(alu_mode):
    (sl, sc), (el, ec) = ALU_SUM_SPAN
    assert extract_slice(SourceSpan(sl, sc, el, ec), alu_mode.source) == "c <= a + b"
    # the published end column stops after the operator; the slice is still a prefix
    assert "c <= a + b".startswith(extract_slice(SourceSpan(60, 34, 60, 39), alu_mode.source))


def test_zero_width_and_out_of_range(capture):
    assert extract_slice(SourceSpan(3, 3, 3, 3), capture.source) == ""
    with pytest.raises(SpanOutOfRange):
        extract_slice(SourceSpan(99, 1, 99, 4), capture.source)
    with pytest.raises(SpanOutOfRange):
        extract_slice(SourceSpan(3, 5, 3, 2), capture.source)


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_slices_locate_back(name):
    text = (CORPUS / f"{name}.v").read_text()
    lines = text.splitlines(keepends=True)
    starts = [0] + list(itertools.accumulate(len(x) for x in lines))
    unit = corpus_unit(name)
    for t in enumerate_targets(unit):
        code = extract_slice(t.span, unit.source)
        offset = starts[t.span.start_line - 1] + t.span.start_col - 1
        assert text[offset:offset + len(code)] == code
        assert text.find(code, offset) == offset


def test_capture_then_context(capture):
    ctx = derive_context(_target(capture, 3, "B"), capture, capture.source)
    assert ctx.module == "capture" and ctx.type.value == "BRANCH"
    assert ctx.code == "c <= d1" and ctx.timing == "always" and ctx.clocked
    assert ctx.signals_in == ["a", "b", "d1"] and ctx.signals_out == ["c"]
    assert render(ctx.precondition) == "a && b"
    assert ctx.input_type is InputType.BRANCH_STRUCTURE and ctx.reset is None


def test_alu_context_core_keys(alu_mode):
    contexts = analyze(_baseline(alu_mode), alu_mode, alu_mode.source)
    (ctx,) = [c for c in contexts if c.code == "c <= a + b"]
    core = context_to_json(ctx, extensions=False)
    assert set(core) == CONTEXT_KEYS
    assert {k: core[k] for k in ALU_SUM_CONTEXT} == ALU_SUM_CONTEXT
    assert core["input_type"] == "BRANCH_STRUCTURE"
    (sl, sc), (el, ec) = ALU_SUM_SPAN
    assert core["locations"] == [{"start": [sl, sc], "end": [el, ec]}]
    assert ctx.precondition == TRUE and ctx.reset.signal == "rst" and not ctx.reset.asserted
    full = context_to_json(ctx)
    assert {k for k in full if not k.startswith("x_")} == CONTEXT_KEYS


def test_dead_arms_are_not_analyzed(alu_mode):
    codes = [c.code for c in analyze(_baseline(alu_mode), alu_mode, alu_mode.source)]
    assert "c <= a - b" not in codes and "c <= a & b" not in codes


def test_guard_free_assign_context():
    unit = source_unit("module m(input [1:0] x, output [1:0] y); assign y = ~x; endmodule")
    (t,) = enumerate_targets(unit)
    ctx = derive_context(t, unit, unit.source)
    assert ctx.precondition == TRUE and ctx.input_type is InputType.ISOLATED_STRUCTURE
    assert ctx.type.value == "STATEMENT" and ctx.timing == "assign" and not ctx.clocked


def test_reset_clause_moves_to_reset_field():
    unit = corpus_unit("counter3")
    t = next(t for t in enumerate_targets(unit) if extract_slice(t.span, unit.source) == "count <= count + 3'd1"
             and t.kind.value == "STATEMENT")
    ctx = derive_context(t, unit, unit.source)
    assert render(ctx.precondition) == "en"
    assert ctx.reset.signal == "rst" and ctx.reset.active_high


def test_twin_arms_merge():
    unit = unit_of(FIXTURES / "twin_arms.v")
    report = _baseline(unit)
    raw = [derive_context(t, unit, unit.source) for t in enumerate_targets(unit)
           if report.by_id()[t.id].status is Status.UNCOVERED]
    # brute force: group by pairwise signature equality
    groups: list[list] = []
    for c in raw:
        for g in groups:
            if g[0].signature == c.signature:
                g.append(c)
                break
        else:
            groups.append([c])
    merged = consolidate(raw)
    assert len(merged) == len(groups)
    (adds,) = [m for m in merged if m.code == "c <= a + b"]
    assert [loc.start_line for loc in adds.locations] == [10, 12]
    assert render(adds.precondition) == "op == 2'd0 || op == 2'd2"
    starts = [m.locations[0] for m in merged]
    assert starts == sorted(starts)


def test_singleton_unchanged(capture):
    ctx = derive_context(_target(capture, 3), capture, capture.source)
    assert consolidate([ctx]) == [ctx]


def test_capture_arms_stay_apart(capture):
    contexts = analyze(_baseline(capture), capture, capture.source)
    assert [c.code for c in contexts] == ["c <= d1", "c <= d2"]
    assert contexts[0].signature != contexts[1].signature


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_context_json_round_trip(name):
    unit = corpus_unit(name)
    contexts = analyze(_baseline(unit), unit, unit.source)
    text = dumps_contexts(contexts)
    assert dumps_contexts(loads_contexts(text)) == text
    validate_json([context_to_json(c) for c in contexts], "contexts.json")
    for c in contexts:
        assert context_from_json(context_to_json(c)).behavior == c.behavior
