"""Chat-model property generation behind a validate-and-retry loop.

Candidates are parsed, form-checked and signal-checked before anything is
returned; after ``max_retries`` rejected attempts the template generator takes
over (or ``ValidationExhausted`` is raised when fallback is off).
"""

from __future__ import annotations

import json
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Protocol

from ..errors import (
    BackendUnavailable, ConfigError, CovloopError, SvaParseError, ValidationExhausted,
)
from ..holes import HoleContext, context_to_json
from .generator import generate_property
from .model import SvaProperty, Trace, check_form, check_signals
from .parser import SvaResources, parse_sva

PROMPT_DIR = Path(__file__).parent / "prompts"
_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.S)


def load_prompt(name: str) -> str:
    return (PROMPT_DIR / f"{name}.txt").read_text()


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    max_retries: int = 5
    api_key_env: str = "COVLOOP_LLM_API_KEY"
    timeout_s: float = 30.0
    fallback: bool = True

    @classmethod
    def from_file(cls, path) -> "LlmConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read LLM config {path}: {exc}") from None
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown LLM config keys: {sorted(extra)}")
        for key in ("endpoint", "model"):
            if key not in doc:
                raise ConfigError(f"LLM config needs {key!r}")
        cfg = cls(**doc)
        if cfg.max_retries < 1:
            raise ConfigError("max_retries must be at least 1")
        return cfg


class ChatTransport(Protocol):
    def complete(self, messages: list[dict]) -> str: ...


class HttpTransport:
    """OpenAI-style chat-completion endpoint over plain HTTP."""

    def __init__(self, config: LlmConfig):
        self.config = config

    def complete(self, messages: list[dict]) -> str:
        body = json.dumps({"model": self.config.model, "messages": messages,
                           "temperature": 0}).encode()
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        req = urllib.request.Request(self.config.endpoint, body, headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.config.timeout_s) as resp:
                doc = json.loads(resp.read().decode())
            return doc["choices"][0]["message"]["content"]
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise BackendUnavailable(f"{self.config.endpoint}: {exc}") from None
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"unexpected reply shape: {exc}") from None


@dataclass
class GenerationAudit:
    locations: list[str]
    rejected: list[dict] = field(default_factory=list)
    fallback: bool = False

    def to_json(self) -> dict:
        return {"locations": self.locations, "rejected": self.rejected, "fallback": self.fallback}


def _strip_fences(text: str) -> str:
    blocks = _FENCE.findall(text)
    return "\n".join(blocks) if blocks else text


def validate_response(text: str, ctx: HoleContext, res: SvaResources,
                      iteration: int = 0) -> list[SvaProperty]:
    """Turn a reply into checked properties or raise the first problem found."""
    defines = "".join(f"`define {m.name} {m.body}\n" for m in res.macros)
    parsed = parse_sva(defines + _strip_fences(text))
    if not parsed.properties:
        raise SvaParseError("reply contains no property")
    available = res.names()
    trace = Trace(ctx.file, tuple(ctx.locations), iteration)
    out = []
    for p in parsed.properties:
        check_form(p)
        check_signals(p, available | {p.clock.signal})
        out.append(replace(p, trace=trace, targets=tuple(ctx.targets)))
    return out


def build_messages(ctx: HoleContext, res: SvaResources) -> list[dict]:
    resources = {"signals": res.signals, "macros": [m.name for m in res.macros],
                 "parameters": [n for n, _ in res.parameters]}
    request = load_prompt("request").format(
        context=json.dumps(context_to_json(ctx), indent=2),
        resources=json.dumps(resources, indent=2),
        existing=", ".join(sorted(res.existing_names())) or "none")
    return [{"role": "system", "content": load_prompt("system")},
            {"role": "user", "content": request}]


class LlmGenerator:
    def __init__(self, config: LlmConfig, transport: Optional[ChatTransport] = None):
        self.config = config
        self.transport = transport or HttpTransport(config)
        self.audits: list[GenerationAudit] = []

    def generate(self, ctx: HoleContext, res: SvaResources, iteration: int = 0) -> list[SvaProperty]:
        audit = GenerationAudit([f"{ctx.file}:{loc}" for loc in ctx.locations])
        self.audits.append(audit)
        messages = build_messages(ctx, res)
        for _ in range(self.config.max_retries):
            reply = self.transport.complete(messages)
            try:
                return validate_response(reply, ctx, res, iteration)
            except CovloopError as exc:  # parse, form and signal failures alike
                reason = f"{type(exc).__name__}: {exc}"
                audit.rejected.append({"response": reply, "reason": reason})
                messages = messages + [
                    {"role": "assistant", "content": reply},
                    {"role": "user", "content": load_prompt("critic").format(reason=reason)},
                ]
        if not self.config.fallback:
            raise ValidationExhausted(audit.rejected)
        audit.fallback = True
        return generate_property(ctx, res, iteration)
