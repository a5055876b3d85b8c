"""Vectorised expression evaluation over numpy uint64 arrays.

Semantics match ``ScalarEval`` bit for bit: operands are sized to their
context, relational and logical operators yield one bit, ``$past`` operands
are evaluated self-determined on the previous frame.
"""

from __future__ import annotations

from typing import Callable, Mapping, Optional, Union

import numpy as np

from ..errors import UnknownSignal
from ..rtl.ast import (
    Binary, Cast, Concat, Expr, Ident, Index, Number, Past, Repeat, Slice, Ternary, Unary,
)
from ..rtl.exprs import BOOL_BINARY, REDUCTION_UNARY, SHIFT_BINARY, self_width

U64 = np.uint64
Arr = np.ndarray
Value = Union[Arr, int]


def umask(width: int) -> U64:
    return U64((1 << width) - 1) if width < 64 else U64(0xFFFFFFFFFFFFFFFF)


def _bool(x) -> Arr:
    return np.asarray(x, dtype=bool).astype(U64)


class VecEval:
    """Evaluate expressions for ``n`` frames at once.

    ``values`` maps signal names to uint64 arrays of length ``n`` (or plain ints
    for constants), ``widths`` maps names to bit widths.
    """

    def __init__(self, values: Mapping[str, Value], widths: Mapping[str, int], n: int,
                 past: Optional[Callable[[Expr], Arr]] = None):
        self.values = values
        self.widths = widths
        self.n = n
        self.past = past

    def width_of(self, name: str) -> int:
        try:
            return self.widths[name]
        except KeyError:
            raise UnknownSignal(name) from None

    def width(self, e: Expr) -> int:
        return self_width(e, self.width_of)

    def __call__(self, e: Expr, ctx: int = 0) -> Arr:
        w = max(self.width(e), ctx)
        out = self.eval(e, w)
        return np.broadcast_to(np.asarray(out, dtype=U64), (self.n,))

    def truth(self, e: Expr) -> Arr:
        return self(e) != 0

    def _arr(self, v) -> Arr:
        return np.asarray(v, dtype=U64)

    def eval(self, e: Expr, w: int) -> Arr:
        m = umask(w)
        if isinstance(e, Ident):
            if e.name not in self.values:
                raise UnknownSignal(e.name)
            return self._arr(self.values[e.name]) & m
        if isinstance(e, Number):
            return self._arr(e.value & int(m))
        if isinstance(e, Unary):
            if e.op in REDUCTION_UNARY:
                ow = self.width(e.operand)
                return _reduce(e.op, self.eval(e.operand, ow), ow)
            v = self.eval(e.operand, w)
            if e.op == "~":
                return ~v & m
            if e.op == "-":
                return (~v + U64(1)) & m
            return v
        if isinstance(e, Binary):
            return self._binary(e, w, m)
        if isinstance(e, Ternary):
            c = self(e.cond) != 0
            return np.where(c, self.eval(e.then, w), self.eval(e.other, w)).astype(U64)
        if isinstance(e, Concat):
            acc = self._arr(0)
            for part in e.parts:
                pw = self.width(part)
                acc = (acc << U64(pw)) | self.eval(part, pw)
            return acc & m
        if isinstance(e, Repeat):
            count = int(self(e.count)[0]) if self.n else 0
            inner = Concat(e.parts)
            iw = self.width(inner)
            iv = self.eval(inner, iw)
            acc = self._arr(0)
            for _ in range(count):
                acc = (acc << U64(iw)) | iv
            return acc & m
        if isinstance(e, Index):
            base = self.eval(e.base, self.width_of(e.base.name))
            i = self(e.index)
            inside = i < U64(self.width_of(e.base.name))
            bit = (base >> np.minimum(i, U64(63))) & U64(1)
            return np.where(inside, bit, U64(0)).astype(U64)
        if isinstance(e, Slice):
            base = self.eval(e.base, self.width_of(e.base.name))
            msb, lsb = int(self(e.msb)[0]), int(self(e.lsb)[0])
            return (base >> U64(lsb)) & umask(msb - lsb + 1) & m
        if isinstance(e, Past):
            if self.past is None:
                raise ValueError("$past needs a previous frame")
            return self._arr(self.past(e.arg)) & m
        if isinstance(e, Cast):
            inner = self.eval(e.expr, max(e.width, self.width(e.expr)))
            return inner & umask(e.width) & m
        raise TypeError(e)

    def _binary(self, e: Binary, w: int, m: U64) -> Arr:
        op = e.op
        if op in ("&&", "||"):
            lv = self(e.left) != 0
            rv = self(e.right) != 0
            return _bool(lv & rv if op == "&&" else lv | rv)
        if op in BOOL_BINARY:
            ow = max(self.width(e.left), self.width(e.right))
            a, b = self.eval(e.left, ow), self.eval(e.right, ow)
            return _bool(_compare(op, a, b))
        if op in SHIFT_BINARY:
            a = self.eval(e.left, w)
            b = self(e.right)
            shifted = (a << np.minimum(b, U64(63))) & m if op in ("<<", "<<<") else a >> np.minimum(b, U64(63))
            return np.where(b >= U64(w), U64(0), shifted).astype(U64)
        a, b = self.eval(e.left, w), self.eval(e.right, w)
        if op == "+":
            r = a + b
        elif op == "-":
            r = a + (~b + U64(1))
        elif op == "*":
            r = a * b
        elif op in ("/", "%"):
            zero = b == U64(0)
            safe = np.where(zero, U64(1), b)
            r = np.where(zero, U64(0), a // safe if op == "/" else a % safe)
        elif op == "&":
            r = a & b
        elif op == "|":
            r = a | b
        elif op == "^":
            r = a ^ b
        else:  # xnor
            r = ~(a ^ b)
        return self._arr(r) & m


def _reduce(op: str, v: Arr, w: int) -> Arr:
    full = umask(w)
    if op == "!":
        return _bool(v == U64(0))
    if op == "&":
        return _bool(v == full)
    if op == "~&":
        return _bool(v != full)
    if op == "|":
        return _bool(v != U64(0))
    if op == "~|":
        return _bool(v == U64(0))
    parity = np.zeros_like(np.asarray(v, dtype=U64))
    for i in range(w):
        parity ^= (v >> U64(i)) & U64(1)
    return parity if op == "^" else parity ^ U64(1)


def _compare(op: str, a: Arr, b: Arr) -> Arr:
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
