"""Show how a case arm in a registered ALU becomes one property.

The fixture has a parameter, an active-low reset and a four-way case.  The
arm picked here is unconditional inside its case label set, so the template
drops to a ``1'b1`` antecedent and the reset moves into ``disable iff``.
"""

import json
from pathlib import Path

from covloop.engine import BuiltinBackend
from covloop.holes import analyze, context_to_json
from covloop.rtl.parser import parse_file
from covloop.sva.generator import design_resources, generate_property, merge_into_file, name_and_dedup
from covloop.sva.parser import parse_sva

fixture = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "alu_mode.v"
(unit,) = parse_file(fixture)
report = BuiltinBackend().measure_coverage(unit, [])
contexts = analyze(report, unit, unit.source)
(ctx,) = [c for c in contexts if c.code == "c <= a + b"]

print("hole context (core keys):")
print(json.dumps(context_to_json(ctx, extensions=False), indent=2))

res = design_resources(unit, parse_sva("").resources())
props = name_and_dedup(generate_property(ctx, res), res, seed=0, slugs=["sum_of_a_and_b"])
print("\nmerged into an empty file:")
print(merge_into_file("", props))
