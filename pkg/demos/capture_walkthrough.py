"""Walk one small design through a full closure by hand.

Run with ``python3 demos/capture_walkthrough.py``.  Each step prints what the
library produced, so the output reads top to bottom like a session log.
"""

from importlib import resources

from covloop.closure import ClosureConfig, run_closure
from covloop.coverage import enumerate_targets
from covloop.engine import BuiltinBackend
from covloop.holes import analyze, context_to_json
from covloop.rtl.exprs import render
from covloop.rtl.parser import parse_source
from covloop.sva.generator import design_resources, generate_property
from covloop.sva.model import render_property
from covloop.sva.parser import parse_sva


def banner(text):
    print(f"\n== {text} ==")


source = resources.files("covloop.corpus").joinpath("capture.v").read_text()
(unit,) = parse_source(source, "capture.v")

banner("design")
print(source)

banner("coverage targets")
for t in enumerate_targets(unit):
    print(f"  {t.id:40s} {t.kind.value}")

banner("baseline: no properties")
report = BuiltinBackend().measure_coverage(unit, [])
print(f"  coverage {report.coverage_pct:.2f}%")

banner("holes and their context")
res = design_resources(unit, parse_sva("").resources())
for ctx in analyze(report, unit, unit.source):
    doc = context_to_json(ctx, extensions=False)
    print(f"  {doc['code']!r} ({doc['type']}) needs {render(ctx.precondition)}")
    for prop in generate_property(ctx, res):
        print("    " + render_property(prop).replace("\n", "\n    ").rstrip())

banner("closure loop")
result = run_closure(unit, "", ClosureConfig())
for rec in result.state.history:
    print(f"  iteration {rec.iteration}: {rec.coverage_pct:.2f}%  merged {len(rec.merged)}")
print(f"  outcome {result.state.outcome.value}, {result.kpis.num_proven}/{result.kpis.num_properties} proven")

banner("final SVA file")
print(result.sva_text)
