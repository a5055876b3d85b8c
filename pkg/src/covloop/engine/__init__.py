from .backend import BuiltinBackend, EngineConfig, FormalBackend, ReplayBackend, make_backend
from .check import Checker, CheckResult, ProofStatus, Verdict
from .measure import measure_coverage, target_statuses
from .system import TransitionSystem, elaborate

__all__ = [
    "BuiltinBackend", "EngineConfig", "FormalBackend", "ReplayBackend", "make_backend",
    "Checker", "CheckResult", "ProofStatus", "Verdict", "measure_coverage", "target_statuses",
    "TransitionSystem", "elaborate",
]
