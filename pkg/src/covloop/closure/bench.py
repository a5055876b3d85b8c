"""Corpus benchmark: closure with and without property generation."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

from ..errors import CovloopError
from .orchestrator import ClosureConfig, close_files

BUNDLED_CORPUS = Path(__file__).resolve().parents[1] / "corpus"


@dataclass
class BenchRow:
    design: str
    generation: bool
    outcome: Optional[str]
    num_properties: int
    proven_pct: float
    coverage_pct: float
    iterations: int
    wall_s: float
    error: Optional[str] = None


def corpus_designs(corpus: Path) -> list[tuple[Path, Optional[Path]]]:
    """``X.v``/``X.sv`` files with their optional ``X.sva`` neighbour, by name."""
    out = []
    for rtl in sorted(p for p in Path(corpus).iterdir() if p.suffix in (".v", ".sv")):
        sva = rtl.with_suffix(".sva")
        out.append((rtl, sva if sva.exists() else None))
    return out


def benchmark(corpus=BUNDLED_CORPUS, config: ClosureConfig = ClosureConfig()) -> list[BenchRow]:
    rows = []
    for rtl, sva in corpus_designs(Path(corpus)):
        for gen in (False, True):
            cfg = replace(config, generation=gen)
            start = time.perf_counter()
            try:
                res = close_files([rtl], sva, cfg)
            except CovloopError as exc:
                rows.append(BenchRow(rtl.stem, gen, None, 0, 0.0, 0.0, 0,
                                     round(time.perf_counter() - start, 4),
                                     f"{type(exc).__name__}: {exc}"))
                continue
            rows.append(BenchRow(rtl.stem, gen, res.state.outcome.value, res.kpis.num_properties,
                                 res.kpis.proven_pct, res.kpis.coverage_pct,
                                 len(res.state.history), round(time.perf_counter() - start, 4)))
    return rows


def bench_json(rows: list[BenchRow]) -> dict:
    return {"rows": [asdict(r) for r in rows]}


def bench_table(rows: list[BenchRow]) -> str:
    head = ("design", "generation", "outcome", "props", "proven%", "coverage%", "iters", "wall_s")
    body = [(r.design, "on" if r.generation else "off", r.outcome or f"error: {r.error}",
             str(r.num_properties), f"{r.proven_pct:.2f}", f"{r.coverage_pct:.2f}",
             str(r.iterations), f"{r.wall_s:.3f}") for r in rows]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *body]]
    return "\n".join(lines) + "\n"


def dumps_bench(rows: list[BenchRow]) -> str:
    return json.dumps(bench_json(rows), indent=2) + "\n"
