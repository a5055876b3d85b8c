from .ast import (
    Assign, Binary, Block, Case, CaseArm, Cast, ClockSpec, Concat, ContinuousAssign,
    DesignUnit, Event, Expr, Ident, If, Index, NetDecl, Number, Param, Past, PortDecl,
    ProcBlock, Repeat, ResetSpec, Slice, SourceSpan, Stmt, Ternary, TimingClass, Unary,
)
from .parser import DEFAULT_RESET_PATTERN, parse_expression, parse_file, parse_source
from .printer import dump_units, print_unit, unit_json
from .signals import SignalInfo, SignalTable, resolve_signals

__all__ = [
    "Assign", "Binary", "Block", "Case", "CaseArm", "Cast", "ClockSpec", "Concat",
    "ContinuousAssign", "DesignUnit", "Event", "Expr", "Ident", "If", "Index", "NetDecl",
    "Number", "Param", "Past", "PortDecl", "ProcBlock", "Repeat", "ResetSpec", "Slice",
    "SourceSpan", "Stmt", "Ternary", "TimingClass", "Unary", "DEFAULT_RESET_PATTERN",
    "parse_expression", "parse_file", "parse_source", "dump_units", "print_unit",
    "unit_json", "SignalInfo", "SignalTable", "resolve_signals",
]
