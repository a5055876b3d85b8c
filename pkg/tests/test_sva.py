import re
from dataclasses import replace

import pytest

from conftest import FIXTURES, corpus_unit, source_unit, unit_of
from expected import ALU_SUM_BODY, ALU_SUM_PROPERTY, CAPTURE_THEN_BODY, CAPTURE_THEN_PROPERTY
from formcheck import check_text
from covloop.engine.backend import BuiltinBackend
from covloop.errors import FormViolation, SvaParseError, UnavailableSignal, UnsupportedTiming
from covloop.holes import analyze
from covloop.rtl.ast import FALSE, ClockSpec
from covloop.rtl.parser import parse_expression
from covloop.rtl.signals import resolve_signals
from covloop.sva.generator import (
    behavior_slug, design_resources, generate_property, merge_into_file, name_and_dedup,
)
from covloop.sva.model import (
    ImplOp, PropKind, SvaProperty, body_text, check_form, check_signals, normalized_body,
    render_property,
)
from covloop.sva.parser import parse_sva, scan_resources


def _contexts(unit, sva=""):
    props = parse_sva(sva).properties
    return analyze(BuiltinBackend().measure_coverage(unit, props), unit, unit.source)


def _res(unit, sva=""):
    return design_resources(unit, parse_sva(sva).resources())


def _generate(unit, code, sva=""):
    (ctx,) = [c for c in _contexts(unit, sva) if c.code == code]
    return generate_property(ctx, _res(unit, sva))


def _same_body(prop, text):
    (other,) = parse_sva(text).properties
    return normalized_body(replace(prop, name=other.name)) == normalized_body(other)


# ---- scanning ----

def test_existing_property_listed():
    res = scan_resources(CAPTURE_THEN_PROPERTY)
    assert res.existing_names() == {"branch_captures_d1"}
    assert res.signals == []


def test_empty_file():
    res = scan_resources("")
    assert (res.signals, res.macros, res.parameters, res.existing_properties) == ([], [], [], [])


DEFINE_LINE = re.compile(r"^\s*`define\s+(\w+)\s+(.*?)\s*$")


@pytest.mark.parametrize("text", [
    "`define CLK @(posedge clk)\n",
    "`define CLK @(posedge clk)\n`define RST disable iff (!rst)\n// `define OFF 1\n",
    "  `define  WIDE   4'hF  \nproperty p;\n`CLK\n1'b1 |-> x == `WIDE;\nendproperty\n"
    .replace("`CLK", "@(posedge clk)"),
])
def test_macros_match_line_scanner(text):
    want = [(m[1], m[2]) for line in text.splitlines() if (m := DEFINE_LINE.match(line))]
    got = [(m.name, m.body) for m in scan_resources(text).macros]
    assert got == want


def test_malformed_file_rejected():
    with pytest.raises(SvaParseError):
        parse_sva("property p;\n@(posedge clk) a |=> ;\nendproperty\n")
    with pytest.raises(SvaParseError):
        merge_into_file("property broken", [])


# ---- templates ----

def test_capture_then_template(capture):
    (assert_p, cover_p) = _generate(capture, "c <= d1")
    assert body_text(assert_p) == CAPTURE_THEN_BODY
    assert _same_body(assert_p, CAPTURE_THEN_PROPERTY)
    assert assert_p.kind is PropKind.ASSERT and assert_p.op is ImplOp.NONOVERLAP
    assert cover_p.kind is PropKind.COVER and body_text(cover_p) == "a && b"


def test_alu_sum_template(alu_mode):
    (p,) = _generate(alu_mode, "c <= a + b")
    assert body_text(p) == ALU_SUM_BODY
    named = replace(p, name="sum_of_a_and_b")
    assert render_property(named, with_trace=False) == ALU_SUM_PROPERTY


def test_combinational_template():
    unit = unit_of(FIXTURES / "comb_and.v")
    (p,) = _generate(unit, "y = x & m")
    assert p.op is ImplOp.OVERLAP
    assert _same_body(p, "property q;\n@(posedge clk)\n1'b1 |-> (y == (x & m));\nendproperty\n")


def test_width_cast_for_narrow_rhs():
    unit = source_unit("module m(input clk, input [1:0] a, output reg [3:0] q);"
                       " always @(posedge clk) q <= a; endmodule")
    (p,) = _generate(unit, "q <= a")
    assert body_text(p) == "1'b1 |=> q == $past(4'(a))"


def test_reset_arm_uses_antecedent():
    unit = corpus_unit("counter3")
    props = _generate(unit, "count <= 3'd0")
    assert body_text(props[0]) == "(rst) |=> (count == 3'd0)"
    assert props[0].disable is None


def test_delay_style_from_file(capture):
    sva = "property old;\n@(posedge clk)\n(a) |-> ##2 (c == d1);\nendproperty\n"
    (p, _) = _generate(capture, "c <= d2", sva)
    assert p.op is ImplOp.OVERLAP_DELAY and p.delay == 2


def test_clock_macro_preferred(capture):
    sva = "`define CLK @(posedge clk)\n"
    (p, _) = _generate(capture, "c <= d1", sva)
    assert p.clock_text == "`CLK"
    assert render_property(p).splitlines()[2] == "`CLK"


def test_missing_signal_is_an_error(capture):
    (ctx,) = [c for c in _contexts(capture) if c.code == "c <= d1"]
    res = parse_sva("").resources().merged(["a", "b", "c"])
    with pytest.raises(UnavailableSignal):
        generate_property(ctx, res)


def test_no_clock_is_unsupported():
    unit = source_unit("module m(input [1:0] x, output [1:0] y); assign y = x; endmodule")
    (ctx,) = _contexts(unit)
    with pytest.raises(UnsupportedTiming):
        generate_property(ctx, _res(unit))


def test_dead_precondition_generates_nothing(capture):
    (ctx,) = [c for c in _contexts(capture) if c.code == "c <= d1"]
    assert generate_property(replace(ctx, precondition=FALSE), _res(capture)) == []


# ---- forms ----

def _prop(text):
    return parse_sva(f"property p;\n@(posedge clk)\n{text};\nendproperty\nassert property (p);\n").properties[0]


@pytest.mark.parametrize("text", [
    "(a) |=> (c == $past($past(d1)))",
    "(a) |-> (b) |=> (c)",
    "(a) |=> (c && b)",
    "c == d1",
])
def test_check_form_rejects(text):
    try:
        p = _prop(text)
    except SvaParseError:
        return
    with pytest.raises(FormViolation):
        check_form(p)


@pytest.mark.parametrize("text", ["(a) |=> (c == $past(d1))", "1'b1 |-> c == c", "(a) |-> ##2 (c)",
                                  "($past(a)) |=> (c == d1)"])
def test_check_form_accepts(text):
    check_form(_prop(text))


def test_check_signals(capture):
    p = _prop("(a && q) |=> (c == 1'b1)")
    with pytest.raises(UnavailableSignal) as info:
        check_signals(p, set(resolve_signals(capture)))
    assert info.value.name == "q"


# ---- naming and merging ----

def test_regenerated_body_dropped(capture):
    (p, _) = _generate(capture, "c <= d1")
    res = _res(capture, CAPTURE_THEN_PROPERTY)
    named = name_and_dedup([p], res, seed=0, slugs=["x"])
    assert named == []


def test_ten_thousand_names_unique(capture):
    base = SvaProperty("", PropKind.ASSERT, ClockSpec("clk"), parse_expression("c == 1'b1"),
                       parse_expression("a"), ImplOp.NONOVERLAP)
    props = [replace(base, antecedent=parse_expression(f"a && {i}")) for i in range(10_000)]
    res = _res(capture, CAPTURE_THEN_PROPERTY)
    named = name_and_dedup(props, res, seed=7, slugs=["same_slug"] * len(props))
    names = [p.name for p in named]
    assert len(named) == 10_000 and len(set(names)) == 10_000
    assert "branch_captures_d1" not in names
    assert all(re.fullmatch(r"p_same_slug_[0-9a-f]{6}", n) for n in names)


def test_names_deterministic(capture):
    (p, c) = _generate(capture, "c <= d1")
    res = _res(capture)
    one = [x.name for x in name_and_dedup([p, c], res, 3, ["s", "s"])]
    two = [x.name for x in name_and_dedup([p, c], res, 3, ["s", "s"])]
    other = [x.name for x in name_and_dedup([p, c], res, 3, ["s", "s"], iteration=1)]
    assert one == two and one != other
    assert one[1].startswith("p_s_cov_")


def test_slug():
    assert behavior_slug("If branch registers c from d1") == "if_branch_registers_c_from"
    assert behavior_slug("!!!") == "prop"


def test_merge_into_empty_file(alu_mode):
    (p,) = _generate(alu_mode, "c <= a + b")
    text = merge_into_file("", [replace(p, name="sum_of_a_and_b")])
    assert text == "// COV alu_mode.v:60.34-60.44 iter=0\n" + ALU_SUM_PROPERTY


def test_merge_twice_is_noop(capture):
    props = name_and_dedup(_generate(capture, "c <= d2"), _res(capture), 0, ["x", "x"])
    once = merge_into_file(CAPTURE_THEN_PROPERTY, props)
    assert once.startswith(CAPTURE_THEN_PROPERTY)
    assert merge_into_file(once, props) == once
    names = scan_resources(once).existing_names()
    assert {p.name for p in props} | {"branch_captures_d1"} == names
    assert check_text(once, set(resolve_signals(capture))) == []


def test_merged_traces_parse_back(capture):
    props = name_and_dedup(_generate(capture, "c <= d2"), _res(capture), 0, ["x", "x"])
    text = merge_into_file("", props)
    parsed = parse_sva(text).properties
    assert [str(loc) for loc in parsed[0].trace.locations] == ["5.3-5.10"]
    assert parsed[0].trace.iteration == 0


@pytest.mark.parametrize("body,bad", [
    ("(a) |=> (c == d1)", False),
    ("(a) |=> (c == d1 && b)", True),
    ("(a) |=> ((c == d1) || b)", True),
    ("(a || b) |-> ##2 (c == (d1 && d2))", False),
])
def test_independent_form_checker(body, bad):
    text = f"property p_x;\n@(posedge clk)\n{body};\nendproperty\nassert property (p_x);\n"
    problems = check_text(text, {"a", "b", "c", "d1", "d2", "clk"})
    assert bool(problems) == bad
