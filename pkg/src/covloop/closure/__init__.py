from .bench import BUNDLED_CORPUS, BenchRow, bench_json, bench_table, benchmark, dumps_bench
from .hil import Decision, HilMode, Reviewer, ReviewEntry, apply_edit, read_decisions
from .kpi import KpiReport, kpis_from_statuses
from .orchestrator import (
    EXIT_CODES, ClosureConfig, ClosureResult, ClosureState, IterationRecord, Outcome,
    close_files, load_design, run_closure,
)

__all__ = [
    "BUNDLED_CORPUS", "BenchRow", "bench_json", "bench_table", "benchmark", "dumps_bench", "Decision", "HilMode", "Reviewer",
    "ReviewEntry", "apply_edit", "read_decisions", "KpiReport", "kpis_from_statuses",
    "EXIT_CODES", "ClosureConfig", "ClosureResult", "ClosureState", "IterationRecord",
    "Outcome", "close_files", "load_design", "run_closure",
]
