"""Expression helpers: rendering, bit widths, scalar evaluation and folding.

Width rules follow the Verilog context-determined/self-determined split:
arithmetic and bitwise operands take the width of their context, relational
and logical operators produce one bit from operands sized to each other.
"""

from __future__ import annotations

from typing import Callable, Optional

from .ast import (
    FALSE, TRUE, Binary, Cast, Concat, Expr, Ident, Index, Number, Past, Repeat,
    Slice, Ternary, Unary,
)

BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "~^": 4, "^~": 4, "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "<<<": 8, ">>>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
UNARY_PREC = 11
PRIMARY_PREC = 12

CONTEXT_BINARY = frozenset("+ - * / % & | ^ ~^ ^~".split())
SHIFT_BINARY = frozenset("<< >> <<< >>>".split())
BOOL_BINARY = frozenset("== != === !== < <= > >= && ||".split())
REDUCTION_UNARY = frozenset("! & | ^ ~& ~| ~^ ^~".split())
CONTEXT_UNARY = frozenset("~ - +".split())


def mask(width: int) -> int:
    return (1 << width) - 1


# ---- rendering ----

def number_text(n: Number) -> str:
    if n.text:
        return n.text
    if n.width is None:
        return str(n.value)
    if n.wild:
        digits = "".join(
            "?" if (n.wild >> i) & 1 else str((n.value >> i) & 1)
            for i in reversed(range(n.width))
        )
        return f"{n.width}'b{digits}"
    if n.width == 1:
        return f"1'b{n.value}"
    return f"{n.width}'d{n.value}"


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, Ternary):
        return 0
    if isinstance(e, Unary):
        return UNARY_PREC
    return PRIMARY_PREC


def render(e: Expr, min_prec: int = 0) -> str:
    """Render with the minimum parentheses needed to re-parse to the same tree."""
    p = _prec(e)
    if isinstance(e, Ident):
        s = e.name
    elif isinstance(e, Number):
        s = number_text(e)
    elif isinstance(e, Unary):
        inner = render(e.operand, UNARY_PREC + 1 if isinstance(e.operand, Unary) else UNARY_PREC)
        s = f"{e.op}{inner}"
    elif isinstance(e, Binary):
        s = f"{render(e.left, p)} {e.op} {render(e.right, p + 1)}"
    elif isinstance(e, Ternary):
        s = f"{render(e.cond, 1)} ? {render(e.then)} : {render(e.other)}"
    elif isinstance(e, Concat):
        s = "{" + ", ".join(render(x) for x in e.parts) + "}"
    elif isinstance(e, Repeat):
        s = "{" + render(e.count, PRIMARY_PREC) + "{" + ", ".join(render(x) for x in e.parts) + "}}"
    elif isinstance(e, Index):
        s = f"{e.base.name}[{render(e.index)}]"
    elif isinstance(e, Slice):
        s = f"{e.base.name}[{render(e.msb)}:{render(e.lsb)}]"
    elif isinstance(e, Past):
        s = f"$past({render(e.arg)})"
    elif isinstance(e, Cast):
        s = f"{e.width}'({render(e.expr)})"
    else:
        raise TypeError(e)
    return f"({s})" if p < min_prec else s


def render_wrapped(e: Expr) -> str:
    """Render as a self-contained operand: atoms bare, everything else in parens."""
    s = render(e)
    if isinstance(e, (Ident, Number, Past, Cast, Index, Slice, Concat, Repeat)):
        return s
    return f"({s})"


# ---- widths ----

WidthOf = Callable[[str], int]


def self_width(e: Expr, width_of: WidthOf) -> int:
    if isinstance(e, Ident):
        return width_of(e.name)
    if isinstance(e, Number):
        return e.width or 32
    if isinstance(e, Unary):
        if e.op in REDUCTION_UNARY:
            return 1
        return self_width(e.operand, width_of)
    if isinstance(e, Binary):
        if e.op in BOOL_BINARY:
            return 1
        if e.op in SHIFT_BINARY:
            return self_width(e.left, width_of)
        return max(self_width(e.left, width_of), self_width(e.right, width_of))
    if isinstance(e, Ternary):
        return max(self_width(e.then, width_of), self_width(e.other, width_of))
    if isinstance(e, Concat):
        return sum(self_width(x, width_of) for x in e.parts)
    if isinstance(e, Repeat):
        count = const_value(e.count, {})
        return (count or 0) * sum(self_width(x, width_of) for x in e.parts)
    if isinstance(e, Index):
        return 1
    if isinstance(e, Slice):
        msb, lsb = const_value(e.msb, {}), const_value(e.lsb, {})
        if msb is None or lsb is None:
            raise ValueError("part-select bounds must be constant")
        return abs(msb - lsb) + 1
    if isinstance(e, Past):
        return self_width(e.arg, width_of)
    if isinstance(e, Cast):
        return e.width
    raise TypeError(e)


# ---- scalar evaluation ----

class ScalarEval:
    """Evaluate expressions over Python ints with Verilog width semantics.

    ``values`` maps names to integers, ``widths`` maps names to bit widths.
    ``past`` optionally supplies a value for ``$past`` operands.
    """

    def __init__(self, values: dict[str, int], widths: dict[str, int],
                 past: Optional[Callable[[Expr], int]] = None):
        self.values = values
        self.widths = widths
        self.past = past

    def width_of(self, name: str) -> int:
        try:
            return self.widths[name]
        except KeyError:
            raise KeyError(name) from None

    def width(self, e: Expr) -> int:
        return self_width(e, self.width_of)

    def __call__(self, e: Expr, ctx: Optional[int] = None) -> int:
        w = self.width(e)
        return self.eval(e, max(w, ctx or 0))

    def truth(self, e: Expr) -> bool:
        return self(e) != 0

    def eval(self, e: Expr, w: int) -> int:
        m = mask(w)
        if isinstance(e, Ident):
            return self.values[e.name] & m
        if isinstance(e, Number):
            return e.value & m
        if isinstance(e, Unary):
            if e.op in REDUCTION_UNARY:
                ow = self.width(e.operand)
                v = self.eval(e.operand, ow)
                return _reduce(e.op, v, ow)
            v = self.eval(e.operand, w)
            if e.op == "~":
                return ~v & m
            if e.op == "-":
                return -v & m
            return v
        if isinstance(e, Binary):
            op = e.op
            if op in ("&&", "||"):
                lv = self(e.left) != 0
                rv = self(e.right) != 0
                return int(lv and rv) if op == "&&" else int(lv or rv)
            if op in BOOL_BINARY:
                ow = max(self.width(e.left), self.width(e.right))
                a, b = self.eval(e.left, ow), self.eval(e.right, ow)
                return int(_compare(op, a, b))
            if op in SHIFT_BINARY:
                a = self.eval(e.left, w)
                b = self(e.right)
                if b >= w:
                    return 0
                return (a << b) & m if op in ("<<", "<<<") else a >> b
            a, b = self.eval(e.left, w), self.eval(e.right, w)
            return _arith(op, a, b) & m
        if isinstance(e, Ternary):
            c = self(e.cond) != 0
            return self.eval(e.then if c else e.other, w)
        if isinstance(e, Concat):
            acc = 0
            for part in e.parts:
                pw = self.width(part)
                acc = (acc << pw) | self.eval(part, pw)
            return acc & m
        if isinstance(e, Repeat):
            count = self(e.count)
            inner = Concat(e.parts)
            iw = self.width(inner)
            iv = self.eval(inner, iw)
            acc = 0
            for _ in range(count):
                acc = (acc << iw) | iv
            return acc & m
        if isinstance(e, Index):
            base = self.values[e.base.name]
            i = self(e.index)
            if i >= self.width_of(e.base.name):
                return 0
            return (base >> i) & 1
        if isinstance(e, Slice):
            base = self.values[e.base.name]
            msb, lsb = self(e.msb), self(e.lsb)
            return (base >> lsb) & mask(msb - lsb + 1) & m
        if isinstance(e, Past):
            if self.past is None:
                raise ValueError("$past outside of a property context")
            return self.past(e.arg) & m
        if isinstance(e, Cast):
            inner = self.eval(e.expr, max(e.width, self.width(e.expr)))
            return inner & mask(e.width) & m
        raise TypeError(e)


def _reduce(op: str, v: int, w: int) -> int:
    if op == "!":
        return int(v == 0)
    if op == "&":
        return int(v == mask(w))
    if op == "~&":
        return int(v != mask(w))
    if op == "|":
        return int(v != 0)
    if op == "~|":
        return int(v == 0)
    parity = bin(v).count("1") & 1
    return parity if op == "^" else parity ^ 1


def _compare(op: str, a: int, b: int) -> bool:
    if op in ("==", "==="):
        return a == b
    if op in ("!=", "!=="):
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return 0 if b == 0 else a // b
    if op == "%":
        return 0 if b == 0 else a % b
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    return ~(a ^ b)


def const_value(e: Expr, params: dict[str, tuple[int, int]]) -> Optional[int]:
    """Value of ``e`` if it only involves literals and the given parameters."""
    names = {n.name for n in _idents(e)}
    if not names <= params.keys():
        return None
    values = {k: v for k, (v, _) in params.items()}
    widths = {k: w for k, (_, w) in params.items()}
    try:
        return ScalarEval(values, widths)(e)
    except (KeyError, ValueError):
        return None


def _idents(e: Expr):
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Ident):
            yield x
        elif isinstance(x, (Index, Slice)):
            yield x.base
            stack.extend([x.index] if isinstance(x, Index) else [x.msb, x.lsb])
        elif isinstance(x, Unary):
            stack.append(x.operand)
        elif isinstance(x, Binary):
            stack.extend([x.left, x.right])
        elif isinstance(x, Ternary):
            stack.extend([x.cond, x.then, x.other])
        elif isinstance(x, (Concat,)):
            stack.extend(x.parts)
        elif isinstance(x, Repeat):
            stack.append(x.count)
            stack.extend(x.parts)
        elif isinstance(x, Past):
            stack.append(x.arg)
        elif isinstance(x, Cast):
            stack.append(x.expr)


# ---- boolean construction and folding ----

def _flatten(terms: list[Expr], op: str) -> list[Expr]:
    out: list[Expr] = []
    for t in terms:
        if isinstance(t, Binary) and t.op == op:
            out.extend(_flatten([t.left, t.right], op))
        else:
            out.append(t)
    return out


def conj(terms: list[Expr]) -> Expr:
    out: list[Expr] = []
    for t in _flatten(terms, "&&"):
        if t != TRUE and t not in out:
            out.append(t)
    if any(t == FALSE for t in out):
        return FALSE
    if not out:
        return TRUE
    acc = out[0]
    for t in out[1:]:
        acc = Binary("&&", acc, t)
    return acc


def disj(terms: list[Expr]) -> Expr:
    out: list[Expr] = []
    for t in _flatten(terms, "||"):
        if t == TRUE:
            return TRUE
        if t != FALSE and t not in out:
            out.append(t)
    if not out:
        return FALSE
    acc = out[0]
    for t in out[1:]:
        acc = Binary("||", acc, t)
    return acc


_NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def neg(e: Expr) -> Expr:
    if e == TRUE:
        return FALSE
    if e == FALSE:
        return TRUE
    if isinstance(e, Unary) and e.op == "!":
        return e.operand
    return Unary("!", e)


def fold(e: Expr, params: dict[str, tuple[int, int]]) -> Expr:
    """Fold constant sub-conditions of a boolean expression to 1'b1/1'b0."""
    if isinstance(e, Binary) and e.op in ("&&", "||"):
        left, right = fold(e.left, params), fold(e.right, params)
        return conj([left, right]) if e.op == "&&" else disj([left, right])
    if isinstance(e, Unary) and e.op == "!":
        inner = fold(e.operand, params)
        if inner in (TRUE, FALSE):
            return neg(inner)
        return Unary("!", inner)
    v = const_value(e, params)
    if v is not None and self_width_safe(e, params) is not None:
        return TRUE if v else FALSE
    return e


def self_width_safe(e: Expr, params) -> Optional[int]:
    try:
        return self_width(e, lambda n: params[n][1])
    except (KeyError, ValueError):
        return None
