"""``covloop`` command line."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .closure.bench import BUNDLED_CORPUS, bench_json, bench_table, benchmark
from .closure.hil import HilMode, Reviewer
from .closure.orchestrator import ClosureConfig, load_design, run_closure
from .coverage import (
    CoverageReport, TargetKind, check_report_targets, enumerate_targets, read_csv_export,
    report_from_json, report_to_json, validate_json,
)
from .engine.backend import EngineConfig, make_backend
from .errors import ConfigError, CovloopError, SchemaError
from .holes import analyze, context_to_json
from .rtl.exprs import render
from .rtl.parser import parse_file
from .rtl.printer import unit_json
from .sva.generator import behavior_slug, design_resources, generate_property, merge_into_file, name_and_dedup
from .sva.llm import LlmConfig, LlmGenerator
from .sva.parser import parse_sva

EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _backend_arg(text: str):
    if text == "builtin":
        return ("builtin", None)
    if text.startswith("replay:") and len(text) > len("replay:"):
        return ("replay", text[len("replay:"):])
    raise argparse.ArgumentTypeError("expected builtin or replay:<path>")


def _pct(text: str) -> float:
    v = float(text)
    if not 0 < v <= 100:
        raise argparse.ArgumentTypeError("threshold must be in (0, 100]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="covloop", description="Formal coverage closure with generated SVA properties.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    design = _Parser(add_help=False)
    design.add_argument("design", nargs="+", type=Path, help="Verilog/SystemVerilog source files")
    design.add_argument("--top", help="module to use when the files hold several")
    design.add_argument("--out", type=Path, help="write the result here instead of stdout")

    engine = _Parser(add_help=False)
    engine.add_argument("--sva", type=Path, help="SVA file with the current properties")
    engine.add_argument("--backend", type=_backend_arg, default=("builtin", None),
                        help="builtin or replay:<recording.json>")
    engine.add_argument("--jobs", type=_positive, default=None)
    engine.add_argument("--depth", type=_positive, default=None, help="BFS depth bound")
    engine.add_argument("--exclude-unreachable", action="store_true", default=None)

    gen = _Parser(add_help=False)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--llm-config", type=Path, help="chat-model settings (JSON)")
    gen.add_argument("--delay", type=_positive, default=None, help="use |-> ##N for clocked asserts")

    sub.add_parser("parse", parents=[design], help="dump the parsed design as JSON")
    t = sub.add_parser("targets", parents=[design], help="list coverage targets")
    t.add_argument("--kind", choices=["statement", "branch"])

    r = sub.add_parser("report", parents=[design, engine], help="produce a canonical coverage report")
    r.add_argument("--import", dest="import_path", type=Path,
                   help="convert an existing JSON report or CSV export instead of proving")

    a = sub.add_parser("analyze", parents=[design, engine], help="hole contexts as JSON")
    a.add_argument("--report", type=Path, help="coverage report to analyze (default: prove now)")

    g = sub.add_parser("generate", parents=[design, engine, gen],
                       help="generate properties for the holes and merge them into the SVA text")
    g.add_argument("--report", type=Path)
    g.add_argument("--iteration", type=int, default=0)

    sub.add_parser("prove", parents=[design, engine], help="prove the SVA file's properties")

    c = sub.add_parser("close", parents=[design, engine, gen], help="run the closure loop")
    c.add_argument("--threshold", type=_pct, default=None)
    c.add_argument("--max-iters", type=_positive, default=None)
    c.add_argument("--hil", choices=[m.value for m in HilMode], default=None)
    c.add_argument("--config", type=Path, help="closure settings (JSON); flags win")
    c.add_argument("--review-dir", type=Path, help="where queue-mode review files live")
    c.add_argument("--review-timeout", type=float, default=None, help="seconds")

    b = sub.add_parser("bench", help="with/without generation over a corpus directory")
    b.add_argument("corpus", type=Path, nargs="?", default=None,
                   help="directory of X.v/X.sva pairs (default: the bundled corpus)")
    b.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    b.add_argument("--out", type=Path)
    b.add_argument("--max-iters", type=_positive, default=None)
    b.add_argument("--seed", type=int, default=None)
    return p


# ---- helpers ----

def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _emit_json(doc, schema: str, out: Optional[Path]) -> None:
    validate_json(doc, schema)
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _sva_text(path: Optional[Path]) -> str:
    return path.read_text() if path is not None and path.exists() else ""


def _engine_config(args) -> EngineConfig:
    return EngineConfig(depth_bound=args.depth or 64, jobs=args.jobs or 1,
                        exclude_unreachable=bool(args.exclude_unreachable))


def _measure(args, unit) -> CoverageReport:
    kind, path = args.backend
    backend = make_backend(kind, path)
    props = parse_sva(_sva_text(args.sva)).properties
    backend.prove(unit, props, _engine_config(args))
    return backend.measure_coverage(unit, props, _engine_config(args))


def _load_report(path: Path, unit) -> CoverageReport:
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        report = read_csv_export(text, unit.name)
    else:
        try:
            report = report_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from None
    check_report_targets(report, enumerate_targets(unit))
    return report


# ---- commands ----

def cmd_parse(args) -> int:
    units = [unit_json(u) for p in args.design for u in parse_file(p)]
    _emit_json(units, "units.json", args.out)
    return 0


def cmd_targets(args) -> int:
    unit = load_design(args.design, args.top)
    rows = []
    for t in enumerate_targets(unit):
        if args.kind and t.kind is not TargetKind(args.kind.upper()):
            continue
        rows.append({"id": t.id, "kind": t.kind.value, "start": list(t.span.start),
                     "end": list(t.span.end), "timing": t.timing, "block": t.block,
                     "path_condition": render(t.path_condition)})
    _emit_json({"design": unit.name, "targets": rows}, "targets.json", args.out)
    return 0


def cmd_report(args) -> int:
    unit = load_design(args.design, args.top)
    report = _load_report(args.import_path, unit) if args.import_path else _measure(args, unit)
    _emit_json(report_to_json(report), "coverage_report.json", args.out)
    return 0


def cmd_analyze(args) -> int:
    unit = load_design(args.design, args.top)
    report = _load_report(args.report, unit) if args.report else _measure(args, unit)
    contexts = analyze(report, unit, unit.source)
    _emit_json([context_to_json(c) for c in contexts], "contexts.json", args.out)
    return 0


def cmd_generate(args) -> int:
    unit = load_design(args.design, args.top)
    report = _load_report(args.report, unit) if args.report else _measure(args, unit)
    text = _sva_text(args.sva)
    res = design_resources(unit, parse_sva(text).resources())
    llm = LlmGenerator(LlmConfig.from_file(args.llm_config)) if args.llm_config else None
    props, slugs = [], []
    for ctx in analyze(report, unit, unit.source):
        ps = llm.generate(ctx, res, args.iteration) if llm else generate_property(
            ctx, res, args.iteration, args.delay)
        props += ps
        slugs += [behavior_slug(ctx.behavior)] * len(ps)
    named = name_and_dedup(props, res, args.seed or 0, slugs, args.iteration)
    merged = merge_into_file(text, named)
    _emit(merged, args.out)
    added = len(parse_sva(merged).properties) - len(parse_sva(text).properties)
    print(f"added {added} properties", file=sys.stderr)
    return 0


def cmd_prove(args) -> int:
    unit = load_design(args.design, args.top)
    kind, path = args.backend
    props = parse_sva(_sva_text(args.sva)).properties
    statuses = make_backend(kind, path).prove(unit, props, _engine_config(args))
    doc = {"design": unit.name, "proofs": {n: s.to_json() for n, s in statuses.items()}}
    _emit_json(doc, "proofs.json", args.out)
    return 0


def _closure_config(args) -> ClosureConfig:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    flags = {"threshold": args.threshold, "max_iterations": args.max_iters, "hil": args.hil,
             "seed": args.seed, "exclude_unreachable": args.exclude_unreachable,
             "delay": args.delay, "depth_bound": args.depth, "jobs": args.jobs,
             "review_timeout_s": args.review_timeout}
    base.update({k: v for k, v in flags.items() if v is not None})
    if args.review_dir is not None:
        base["review_dir"] = str(args.review_dir)
    return ClosureConfig.from_dict(base)


def cmd_close(args) -> int:
    config = _closure_config(args)
    out = args.out or Path("covloop_out")
    if config.hil is HilMode.QUEUE and config.review_dir is None:
        config.review_dir = str(out / "review")
    unit = load_design(args.design, args.top)
    kind, path = args.backend
    llm = LlmGenerator(LlmConfig.from_file(args.llm_config)) if args.llm_config else None
    reviewer = Reviewer(config.hil, config.review_dir, config.review_timeout_s)
    result = run_closure(unit, _sva_text(args.sva), config, make_backend(kind, path), reviewer, llm)
    manifest = result.manifest()
    validate_json(manifest, "manifest.json")
    out.mkdir(parents=True, exist_ok=True)
    sva_name = args.sva.name if args.sva is not None else f"{unit.name}.sva"
    (out / sva_name).write_text(result.sva_text)
    (out / "manifest.json").write_text(result.manifest_text())
    (out / "report.json").write_text(json.dumps(report_to_json(result.report), indent=2) + "\n")
    summary = {"design": unit.name, "outcome": result.state.outcome.value,
               "iterations": len(result.state.history), "coverage_pct": result.report.coverage_pct,
               **{k: v for k, v in result.kpis.to_json().items() if k != "coverage_pct"},
               "sva": str(out / sva_name)}
    print(json.dumps(summary))
    return result.exit_code


def cmd_bench(args) -> int:
    cfg = ClosureConfig.from_dict({k: v for k, v in
                                   {"max_iterations": args.max_iters, "seed": args.seed}.items()
                                   if v is not None})
    rows = benchmark(args.corpus or BUNDLED_CORPUS, cfg)
    if args.json:
        _emit_json(bench_json(rows), "bench.json", args.out)
    else:
        _emit(bench_table(rows), args.out)
    return 0


COMMANDS = {"parse": cmd_parse, "targets": cmd_targets, "report": cmd_report,
            "analyze": cmd_analyze, "generate": cmd_generate, "prove": cmd_prove,
            "close": cmd_close, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CovloopError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
