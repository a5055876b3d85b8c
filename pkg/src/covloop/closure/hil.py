"""Human review of generated properties before they are merged."""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, TextIO

from ..errors import CovloopError, InvalidEdit, ReviewTimeout, SchemaError
from ..sva.model import (
    SvaProperty, body_text, check_form, check_signals, clock_text, directive, disable_text,
    render_property,
)
from ..sva.parser import SvaResources, parse_sva


class HilMode(str, Enum):
    AUTO = "auto"
    INTERACTIVE = "interactive"
    QUEUE = "queue"


class Decision(str, Enum):
    APPROVE = "APPROVE"
    REJECT = "REJECT"
    EDIT = "EDIT"


@dataclass
class ReviewEntry:
    name: str
    decision: Optional[Decision]    # None: the reviewer gave no answer
    body: Optional[str] = None      # new body for EDIT
    error: Optional[str] = None     # why an EDIT was refused

    @property
    def accepted(self) -> bool:
        return self.error is None and self.decision in (Decision.APPROVE, Decision.EDIT)

    @property
    def pending(self) -> bool:
        return self.decision is None or self.error is not None

    def to_json(self) -> dict:
        out = {"name": self.name, "decision": self.decision.value if self.decision else None}
        if self.body is not None:
            out["body"] = self.body
        if self.error is not None:
            out["error"] = self.error
        return out


def apply_edit(prop: SvaProperty, body: str, res: SvaResources) -> SvaProperty:
    """Replace the body of ``prop`` and re-check it; raises InvalidEdit."""
    header = clock_text(prop)
    dis = disable_text(prop)
    if dis:
        header += " " + dis
    text = "".join(f"`define {m.name} {m.body}\n" for m in res.macros)
    text += (f"property {prop.name};\n{header}\n{body.strip().rstrip(';')};\nendproperty\n"
             f"{directive(prop.kind)} property ({prop.name});\n")
    try:
        parsed = parse_sva(text).properties
        if len(parsed) != 1:
            raise InvalidEdit(f"{prop.name}: edit must contain one property body")
        new = parsed[0]
        check_form(new)
        check_signals(new, res.names() | {new.clock.signal})
    except InvalidEdit:
        raise
    except CovloopError as exc:
        raise InvalidEdit(f"{prop.name}: {exc}") from None
    return replace(new, trace=prop.trace, targets=prop.targets,
                   clock_text=prop.clock_text, disable_text=prop.disable_text)


class Reviewer:
    """Collects one decision per pending property.

    ``review`` returns the properties to merge (edited where requested) and a
    log entry per property.  A refused edit leaves its property unmerged.
    """

    def __init__(self, mode: HilMode = HilMode.AUTO, queue_dir=None, timeout_s: float = 3600.0,
                 poll_s: float = 0.5, stdin: Optional[TextIO] = None, stdout: Optional[TextIO] = None):
        self.mode = mode
        self.queue_dir = Path(queue_dir) if queue_dir is not None else None
        self.timeout_s = timeout_s
        self.poll_s = poll_s
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout
        if mode is HilMode.QUEUE and self.queue_dir is None:
            raise ValueError("queue mode needs a review directory")

    def review(self, pending: list[SvaProperty], res: SvaResources,
               iteration: int) -> tuple[list[SvaProperty], list[ReviewEntry]]:
        if self.mode is HilMode.AUTO:
            raw = [(p.name, Decision.APPROVE, None) for p in pending]
        elif self.mode is HilMode.INTERACTIVE:
            raw = [self._ask(p) for p in pending]
        else:
            raw = self._queue(pending, iteration)
        by_name = {p.name: p for p in pending}
        merged, log = [], []
        for name, decision, body in raw:
            entry = ReviewEntry(name, decision, body)
            prop = by_name[name]
            if decision is Decision.EDIT:
                try:
                    prop = apply_edit(prop, body or "", res)
                except InvalidEdit as exc:
                    entry.error = str(exc)
            log.append(entry)
            if entry.accepted:
                merged.append(prop)
        return merged, log

    def _ask(self, p: SvaProperty):
        out = self.stdout
        out.write(render_property(p))
        while True:
            out.write(f"[{p.name}] approve (a), reject (r) or edit (e)? ")
            out.flush()
            answer = self.stdin.readline()
            if not answer:
                return (p.name, Decision.REJECT, None)
            choice = answer.strip().lower()
            if choice in ("a", "approve", ""):
                return (p.name, Decision.APPROVE, None)
            if choice in ("r", "reject"):
                return (p.name, Decision.REJECT, None)
            if choice in ("e", "edit"):
                out.write(f"new body for {p.name} (currently {body_text(p)}): ")
                out.flush()
                return (p.name, Decision.EDIT, self.stdin.readline().strip())

    def _queue(self, pending: list[SvaProperty], iteration: int):
        self.queue_dir.mkdir(parents=True, exist_ok=True)
        request = self.queue_dir / f"pending_review_iter{iteration}.json"
        answer = self.queue_dir / f"decisions_iter{iteration}.json"
        request.write_text(json.dumps({
            "iteration": iteration,
            "properties": [{"name": p.name, "kind": p.kind.value, "body": body_text(p),
                            "text": render_property(p)} for p in pending],
        }, indent=2) + "\n")
        deadline = time.monotonic() + self.timeout_s
        while not answer.exists():
            if time.monotonic() >= deadline:
                raise ReviewTimeout(f"no {answer.name} after {self.timeout_s:g} s")
            time.sleep(self.poll_s)
        return read_decisions(answer, [p.name for p in pending])


def read_decisions(path, names: list[str]):
    """Decisions for ``names`` from a decisions file; unlisted names get ``None``."""
    try:
        doc = json.loads(Path(path).read_text())
        rows = {d["name"]: (Decision(d["decision"].upper()), d.get("body"))
                for d in doc["decisions"]}
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as exc:
        raise SchemaError("", f"bad decisions file {path}: {exc}") from None
    return [(n, *rows.get(n, (None, None))) for n in names]
