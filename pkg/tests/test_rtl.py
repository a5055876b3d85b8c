import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, CORPUS_NAMES, corpus_unit, source_unit
from covloop.errors import HdlSyntaxError, UndeclaredSignal, UnsupportedConstruct
from covloop.rtl.ast import Assign, If, ProcBlock, TimingClass
from covloop.rtl.exprs import ScalarEval, render
from covloop.rtl.parser import parse_expression, parse_source
from covloop.rtl.printer import print_unit, unit_json
from covloop.rtl.signals import resolve_signals


def _strip_spans(doc):
    if isinstance(doc, dict):
        return {k: _strip_spans(v) for k, v in doc.items()
                if k not in ("span", "start", "end", "origin")}
    if isinstance(doc, list):
        return [_strip_spans(v) for v in doc]
    return doc


def test_capture_structure(capture):
    assert capture.name == "capture"
    (block,) = capture.items
    assert isinstance(block, ProcBlock)
    assert block.timing_class is TimingClass.ALWAYS_PLAIN
    assert block.clock.signal == "clk" and block.clock.edge == "posedge"
    (stmt,) = block.body.stmts
    assert isinstance(stmt, If)
    assert render(stmt.cond) == "a && b"
    assert isinstance(stmt.then, Assign) and stmt.then.span.start_line == 3
    assert isinstance(stmt.other, Assign) and stmt.other.span.start_line == 5


def test_empty_module():
    (unit,) = parse_source("module m; endmodule")
    assert unit.items == [] and unit.ports == []


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_print_parse_round_trip(name):
    unit = corpus_unit(name)
    again = source_unit(print_unit(unit), unit.origin)
    assert _strip_spans(unit_json(again)) == _strip_spans(unit_json(unit))


PORT_RX = re.compile(r"\b(input|output)\s+(?:wire|reg|logic)?\s*(?:\[(\d+):(\d+)\])?\s*(\w+)")


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_widths_match_regex_scan(name):
    text = (CORPUS / f"{name}.v").read_text()
    scanned = {m[3]: (int(m[1]) - int(m[2]) + 1 if m[1] else 1) for m in PORT_RX.findall(text)}
    table = resolve_signals(corpus_unit(name))
    assert scanned
    for port, width in scanned.items():
        assert table.width(port) == width, port


def test_byte_width_port():
    unit = source_unit("module m(input [7:0] a, output y); assign y = ^a; endmodule")
    assert resolve_signals(unit).width("a") == 8


def test_directions_and_locals():
    unit = source_unit("module m(input clk, input a, output reg q); reg t; "
                       "always @(posedge clk) begin t = a; q <= t; end endmodule")
    table = resolve_signals(unit)
    assert table.directions()["in"] == ["clk", "a"]
    assert table.outputs() == ["q"] and table.locals() == ["t"]


def test_no_ports_only_locals():
    unit = source_unit("module m; wire w; assign w = 1'b1; endmodule")
    table = resolve_signals(unit)
    assert table.inputs() == [] and table.outputs() == [] and table.locals() == ["w"]


def test_undeclared_signal_reported():
    unit = source_unit("module m(input a, output y); assign y = a & ghost; endmodule")
    with pytest.raises(UndeclaredSignal) as info:
        resolve_signals(unit)
    assert info.value.name == "ghost"


@pytest.mark.parametrize("text", [
    "module m(input a; endmodule",
    "module m(input a); assign = a; endmodule",
    "module m(input a) endmodule",
])
def test_syntax_errors(text):
    with pytest.raises(HdlSyntaxError):
        parse_source(text)


def test_unsupported_construct():
    with pytest.raises((UnsupportedConstruct, HdlSyntaxError)):
        parse_source("module m(input clk); initial begin end endmodule")


def test_nonansi_ports_and_params():
    unit = source_unit("""module m(clk, d, q);
  parameter W = 3;
  input clk;
  input [W-1:0] d;
  output reg [W-1:0] q;
  always @(posedge clk) q <= d;
endmodule""")
    table = resolve_signals(unit)
    assert table.width("d") == 3 and table.width("q") == 3
    assert unit.params[0].name == "W" and unit.params[0].value == 3


def test_async_reset_detected():
    unit = source_unit("module m(input clk, input rst_n, input d, output reg q);"
                       " always @(posedge clk or negedge rst_n) if (!rst_n) q <= 0; else q <= d;"
                       " endmodule")
    (block,) = unit.items
    assert block.reset.signal == "rst_n" and not block.reset.active_high
    assert block.reset.asynchronous


small = st.integers(min_value=0, max_value=15)


@settings(max_examples=200, deadline=None)
@given(small, small, st.sampled_from(["+", "-", "&", "|", "^"]))
def test_four_bit_arithmetic_wraps(a, b, op):
    e = parse_expression(f"x {op} y")
    got = ScalarEval({"x": a, "y": b}, {"x": 4, "y": 4})(e)
    want = {"+": a + b, "-": a - b, "&": a & b, "|": a | b, "^": a ^ b}[op] & 0xF
    assert got == want


@settings(max_examples=100, deadline=None)
@given(small, small)
def test_comparison_is_one_bit(a, b):
    ev = ScalarEval({"x": a, "y": b}, {"x": 4, "y": 4})
    assert ev(parse_expression("x < y")) == int(a < b)
    assert ev(parse_expression("{x, y}")) == (a << 4) | b
