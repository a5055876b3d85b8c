"""Text-level checks on SVA output, written with regexes only.

Kept separate from the package's SVA parser so a bug there cannot hide a bad
file.  ``check_text`` returns a list of problems; empty means the file is fine.
"""

from __future__ import annotations

import re

BLOCK = re.compile(r"property\s+(\w+)\s*;(.*?)endproperty\s*(assert|cover|assume)\s+property\s*\(\s*(\w+)\s*\)\s*;",
                   re.S)
CLOCK = re.compile(r"^\s*(@\(\s*(?:posedge|negedge)\s+\w+\s*\)|`\w+)")
DISABLE = re.compile(r"^\s*disable\s+iff\s*\(")
NUMBER = re.compile(r"\d*'[sS]?[bBoOdDhH][0-9a-fA-F_xXzZ?]+|\b\d+\b")
IDENT = re.compile(r"(?<![\w$`'])[A-Za-z_]\w*")
KEYWORDS = {"posedge", "negedge", "disable", "iff"}


def _strip_comments(text: str) -> str:
    return re.sub(r"//[^\n]*", "", text)


def _skip_parens(text: str, start: int) -> int:
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return i + 1
    return len(text)


def split_property(body: str) -> tuple[str, str, str]:
    """(clock, disable clause or "", implication body) for one property body."""
    m = CLOCK.match(body)
    if not m:
        raise ValueError("no clocking event")
    rest = body[m.end():]
    disable = ""
    d = DISABLE.match(rest)
    if d:
        end = _skip_parens(rest, d.end() - 1)
        disable, rest = rest[:end].strip(), rest[end:]
    return m.group(1), disable, rest.strip().rstrip(";").strip()


def _top_level_chain(expr: str) -> bool:
    expr = expr.strip()
    while expr.startswith("(") and _skip_parens(expr, 0) == len(expr):
        expr = expr[1:-1].strip()
    depth = 0
    for i, ch in enumerate(expr):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and expr[i:i + 2] in ("&&", "||"):
            return True
    return False


def check_text(text: str, signals: set[str], generated_prefix: str = "p_") -> list[str]:
    problems = []
    seen = set()
    for name, body, directive, ref in BLOCK.findall(_strip_comments(text)):
        if name != ref:
            problems.append(f"{name}: directive refers to {ref}")
        if name in seen:
            problems.append(f"{name}: duplicate name")
        seen.add(name)
        try:
            _, disable, impl = split_property(body)
        except ValueError as exc:
            problems.append(f"{name}: {exc}")
            continue
        ops = re.findall(r"\|=>|\|->", impl)
        if name.startswith(generated_prefix):
            if directive == "assert" and len(ops) != 1:
                problems.append(f"{name}: assert needs exactly one implication, found {len(ops)}")
            if directive == "cover" and ops:
                problems.append(f"{name}: generated cover must be a plain expression")
            if directive == "assert" and len(ops) == 1 and _top_level_chain(
                    re.split(r"\|=>|\|->\s*(?:##\d+)?", impl)[1]):
                problems.append(f"{name}: consequent is not a single outcome")
            if re.search(r"\$past\s*\([^()]*\$past", impl):
                problems.append(f"{name}: nested $past")
        words = set(IDENT.findall(NUMBER.sub(" ", disable + " " + impl)))
        unknown = words - signals - KEYWORDS
        if unknown:
            problems.append(f"{name}: unknown identifiers {sorted(unknown)}")
    if not seen and text.strip():
        if re.search(r"\bproperty\b", text):
            problems.append("no well-formed property blocks")
    return problems


def property_names(text: str) -> list[str]:
    return [m[0] for m in BLOCK.findall(_strip_comments(text))]
