"""Exception types shared across the pipeline."""

from __future__ import annotations


class CovloopError(Exception):
    """Base class for every error raised by covloop."""


# ---- RTL front end ----

class HdlSyntaxError(CovloopError):
    def __init__(self, msg: str, span=None, expected: tuple[str, ...] = ()):
        where = f"{span.start_line}:{span.start_col}: " if span is not None else ""
        super().__init__(f"{where}{msg}")
        self.span = span
        self.expected = tuple(expected)


class UnsupportedConstruct(CovloopError):
    def __init__(self, construct: str, span=None):
        where = f"{span.start_line}:{span.start_col}: " if span is not None else ""
        super().__init__(f"{where}unsupported construct: {construct}")
        self.construct = construct
        self.span = span


class UndeclaredSignal(CovloopError):
    def __init__(self, name: str, span=None):
        where = f"{span.start_line}:{span.start_col}: " if span is not None else ""
        super().__init__(f"{where}undeclared signal {name!r}")
        self.name = name
        self.span = span


# ---- coverage model ----

class SchemaError(CovloopError):
    def __init__(self, pointer: str, reason: str):
        super().__init__(f"{pointer or '/'}: {reason}")
        self.pointer = pointer
        self.reason = reason


class UnknownTarget(CovloopError):
    def __init__(self, target_id: str):
        super().__init__(f"unknown coverage target {target_id!r}")
        self.target_id = target_id


class SpanOutOfRange(CovloopError):
    pass


# ---- SVA side ----

class SvaParseError(CovloopError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class UnavailableSignal(CovloopError):
    def __init__(self, name: str):
        super().__init__(f"signal {name!r} is not available in the SVA resources")
        self.name = name


class UnsupportedTiming(CovloopError):
    pass


class FormViolation(CovloopError):
    """A property body does not match one of the allowed implication forms."""


class BackendUnavailable(CovloopError):
    pass


class ValidationExhausted(CovloopError):
    def __init__(self, rejected: list):
        super().__init__(f"no valid property after {len(rejected)} attempts")
        self.rejected = rejected


# ---- formal engine ----

class StateBudgetExceeded(CovloopError):
    def __init__(self, bits: int, budget: int, what: str = "state"):
        super().__init__(f"{what} needs {bits} bits, budget is {budget}")
        self.bits = bits
        self.budget = budget


class ElaborationError(CovloopError):
    pass


class UnknownSignal(CovloopError):
    def __init__(self, name: str):
        super().__init__(f"property references unknown signal {name!r}")
        self.name = name


class RecordingExhausted(CovloopError):
    pass


# ---- orchestration ----

class ConfigError(CovloopError):
    pass


class InvalidEdit(CovloopError):
    pass


class ReviewTimeout(CovloopError):
    pass
