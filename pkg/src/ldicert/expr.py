"""Scalar expressions for the right-hand side ``f(x, u)`` of the dynamics.

Grammar (whitespace is ignored)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?           # right associative
    base   := number | ident | '(' expr ')' | func '(' expr ')' | '-' base

Identifiers are ``x1..x{n_x}``, ``u1..u{n_u}`` and the functions ``exp``,
``ln``, ``sin``, ``cos``, ``tanh``, ``sqrt``, ``abs``.

``a ^ k`` with an integer literal ``k`` becomes an integer power node, valid
for any sign of ``a``; every other power is lowered to ``exp(b * ln(a))`` and
therefore needs ``a > 0`` when evaluated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import interval as iv
from .errors import (
    DimensionOutOfRange,
    DomainError,
    ExpressionSyntaxError,
    NonDifferentiable,
    UnknownIdentifier,
)
from .interval import Interval

FUNCTIONS = ("exp", "ln", "sin", "cos", "tanh", "sqrt", "abs")


class Expression:
    """Immutable expression node."""

    __slots__ = ()

    def evaluate(self, x: Sequence[float], u: Sequence[float] = ()) -> float:
        raise NotImplementedError

    def enclose(self, x: Sequence[Interval], u: Sequence[Interval] = ()) -> Interval:
        raise NotImplementedError

    def derivative(self, var: "Var") -> "Expression":
        raise NotImplementedError

    def depends_on(self, var: "Var") -> bool:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_string()

    def to_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expression):
    value: float
    exact: bool = True

    def evaluate(self, x, u=()):
        return self.value

    def enclose(self, x, u=()):
        return Interval.point(self.value)

    def derivative(self, var):
        return ZERO

    def depends_on(self, var):
        return False

    def to_string(self):
        if self.value == int(self.value) and abs(self.value) < 2**53:
            s = str(int(self.value))
        else:
            s = repr(self.value)
        return f"({s})" if self.value < 0 else s


ZERO = Num(0.0)
ONE = Num(1.0)


@dataclass(frozen=True)
class Var(Expression):
    kind: str  # "x" or "u"
    index: int  # zero based

    def evaluate(self, x, u=()):
        return float((x if self.kind == "x" else u)[self.index])

    def enclose(self, x, u=()):
        return (x if self.kind == "x" else u)[self.index]

    def derivative(self, var):
        return ONE if var == self else ZERO

    def depends_on(self, var):
        return var == self

    def to_string(self):
        return f"{self.kind}{self.index + 1}"

    @classmethod
    def parse(cls, name: str) -> "Var":
        m = re.fullmatch(r"([xu])([1-9][0-9]*)", name)
        if not m:
            raise UnknownIdentifier(f"not a variable name: {name!r}")
        return cls(m.group(1), int(m.group(2)) - 1)


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression

    def evaluate(self, x, u=()):
        return -self.arg.evaluate(x, u)

    def enclose(self, x, u=()):
        return -self.arg.enclose(x, u)

    def derivative(self, var):
        return neg(self.arg.derivative(var))

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def to_string(self):
        return f"(-{self.arg.to_string()})"


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    def evaluate(self, x, u=()):
        a = self.left.evaluate(x, u)
        b = self.right.evaluate(x, u)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b

    def enclose(self, x, u=()):
        a = self.left.enclose(x, u)
        b = self.right.enclose(x, u)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def derivative(self, var):
        a, b = self.left, self.right
        da, db = a.derivative(var), b.derivative(var)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), IntPow(b, 2))

    def depends_on(self, var):
        return self.left.depends_on(var) or self.right.depends_on(var)

    def to_string(self):
        return f"({self.left.to_string()} {self.op} {self.right.to_string()})"


@dataclass(frozen=True)
class IntPow(Expression):
    base: Expression
    exponent: int

    def evaluate(self, x, u=()):
        a = self.base.evaluate(x, u)
        n = self.exponent
        if n < 0 and a == 0.0:
            raise DomainError("negative power of zero")
        r = 1.0
        for _ in range(abs(n)):
            r *= a
        return 1.0 / r if n < 0 else r

    def enclose(self, x, u=()):
        return self.base.enclose(x, u).ipow(self.exponent)

    def derivative(self, var):
        n = self.exponent
        if n == 0:
            return ZERO
        inner = ONE if n == 1 else IntPow(self.base, n - 1)
        return mul(mul(Num(float(n)), inner), self.base.derivative(var))

    def depends_on(self, var):
        return self.base.depends_on(var)

    def to_string(self):
        n = self.exponent
        return f"({self.base.to_string()} ^ {n if n >= 0 else f'({n})'})"


_POINT = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
    "abs": abs,
}
_ENCLOSE = {
    "exp": iv.exp,
    "ln": iv.ln,
    "sin": iv.sin,
    "cos": iv.cos,
    "tanh": iv.tanh,
    "sqrt": iv.sqrt,
    "abs": iv.fabs,
}


@dataclass(frozen=True)
class Func(Expression):
    name: str
    arg: Expression

    def evaluate(self, x, u=()):
        a = self.arg.evaluate(x, u)
        if self.name == "ln" and a <= 0.0:
            raise DomainError(f"ln({a!r})")
        if self.name == "sqrt" and a < 0.0:
            raise DomainError(f"sqrt({a!r})")
        try:
            return _POINT[self.name](a)
        except OverflowError as exc:
            raise DomainError(f"{self.name}({a!r}) overflows") from exc

    def enclose(self, x, u=()):
        return _ENCLOSE[self.name](self.arg.enclose(x, u))

    def derivative(self, var):
        a = self.arg
        da = a.derivative(var)
        if self.name == "abs":
            if a.depends_on(var):
                raise NonDifferentiable(f"abs({a}) is not differentiable")
            return ZERO
        if da == ZERO:
            return ZERO
        if self.name == "exp":
            outer = self
        elif self.name == "ln":
            return div(da, a)
        elif self.name == "sin":
            outer = Func("cos", a)
        elif self.name == "cos":
            outer = neg(Func("sin", a))
        elif self.name == "tanh":
            outer = sub(ONE, IntPow(self, 2))
        else:  # sqrt
            return div(da, mul(Num(2.0), self))
        return mul(outer, da)

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def to_string(self):
        return f"{self.name}({self.arg.to_string()})"


# smart constructors: only exact identities, no rounding-sensitive folding

def neg(a: Expression) -> Expression:
    if isinstance(a, Num):
        return Num(-a.value, a.exact)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expression, b: Expression) -> Expression:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return BinOp("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if b == ZERO:
        return a
    if a == ZERO:
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Num) and isinstance(b, Num) and _is_small_int(a.value) and _is_small_int(b.value):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return BinOp("/", a, b)


def _is_small_int(v: float) -> bool:
    return v == int(v) and abs(v) < 2**26


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, n_x: int, n_u: int):
        self.text = text
        self.n_x = n_x
        self.n_u = n_u
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            raise ExpressionSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", self.text, pos)

    def parse(self) -> Expression:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", self.text, pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = BinOp(op, e, self.factor())
        return e

    def factor(self):
        base = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            exponent = self.factor()
            k = _integer_literal(exponent)
            if k is not None:
                return IntPow(base, k)
            return Func("exp", BinOp("*", exponent, Func("ln", base)))
        return base

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            value = float(val)
            return Num(value, Fraction(val) == Fraction(value))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            try:
                var = Var.parse(val)
            except UnknownIdentifier:
                raise UnknownIdentifier(f"unknown identifier {val!r} at position {pos}") from None
            limit = self.n_x if var.kind == "x" else self.n_u
            if var.index >= limit:
                raise DimensionOutOfRange(f"{val} exceeds declared dimension {var.kind}: {limit}")
            return var
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "op" and val == "-":
            return neg_literal(self.base())
        raise ExpressionSyntaxError(f"unexpected {val or 'end of input'!r}", self.text, pos)


def neg_literal(e: Expression) -> Expression:
    if isinstance(e, Num):
        return Num(-e.value, e.exact)
    return Neg(e)


def _integer_literal(e: Expression):
    if isinstance(e, Num) and e.value == int(e.value) and abs(e.value) <= 64:
        return int(e.value)
    return None


def parse(text: str, n_x: int, n_u: int = 0) -> Expression:
    """Parse ``text`` over variables ``x1..x{n_x}`` and ``u1..u{n_u}``."""
    return _Parser(text, n_x, n_u).parse()


def evaluate(e: Expression, x, u=()) -> float:
    return e.evaluate(x, u)


def differentiate(e: Expression, var) -> Expression:
    """Symbolic partial derivative; ``var`` is a :class:`Var` or a name like ``"x1"``."""
    if isinstance(var, str):
        var = Var.parse(var)
    return e.derivative(var)


def eval_interval(e: Expression, x, u=()) -> Interval:
    """Enclosure of ``e`` over the box given by interval vectors ``x`` and ``u``.

    Entries may be :class:`Interval` objects or ``(lo, hi)`` pairs.
    """
    x = [b if isinstance(b, Interval) else Interval(*b) for b in x]
    u = [b if isinstance(b, Interval) else Interval(*b) for b in u]
    return e.enclose(x, u)


def to_string(e: Expression) -> str:
    return e.to_string()
