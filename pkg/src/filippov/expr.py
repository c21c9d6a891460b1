"""Expression language for the smooth pieces and switching functions.

Expressions are parsed once into an immutable tree and evaluated on floats,
numpy arrays or first-order jets.  Jets carry exact partial derivatives with
respect to the two plane coordinates, and their components may themselves be
jets, which is how compositions (pushforwards through coordinate changes) get
exact Jacobians without symbolic manipulation.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

so ``^`` binds tighter than unary minus (``-x^2`` is ``-(x^2)``) and is
right-associative.
"""

from __future__ import annotations

import contextlib
import contextvars
import re
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import (
    EvaluationDomainError,
    ExprSyntaxError,
    UnknownFunctionError,
    UnknownVariableError,
)

__all__ = [
    "Jet",
    "Num", "Var", "Const", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "ScalarExpr", "VectorFieldExpr", "FieldMixin",
    "parse_scalar", "parse_vector", "eval_jet", "eval_vec", "to_text",
    "lenient_domain", "FUNCTIONS", "CONSTANTS",
]


# --------------------------------------------------------------------------
# Jets


class Jet:
    """Value plus first-order partials ``(d/dx, d/dy)``.

    Components may be floats, numpy arrays or (for nested compositions)
    other jets.
    """

    __slots__ = ("value", "dx", "dy")
    # make ``ndarray <op> Jet`` defer to the Jet reflected operators
    __array_ufunc__ = None

    def __init__(self, value, dx=0.0, dy=0.0):
        self.value = value
        self.dx = dx
        self.dy = dy

    @classmethod
    def var_x(cls, x) -> "Jet":
        return cls(x, 1.0, 0.0)

    @classmethod
    def var_y(cls, y) -> "Jet":
        return cls(y, 0.0, 1.0)

    def __repr__(self):
        return f"Jet(value={self.value!r}, dx={self.dx!r}, dy={self.dy!r})"

    def __iter__(self):
        yield self.value
        yield self.dx
        yield self.dy

    @property
    def grad(self):
        return self.dx, self.dy

    def __neg__(self):
        return Jet(-self.value, -self.dx, -self.dy)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.dx + other.dx, self.dy + other.dy)
        return Jet(self.value + other, self.dx, self.dy)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value - other.value, self.dx - other.dx, self.dy - other.dy)
        return Jet(self.value - other, self.dx, self.dy)

    def __rsub__(self, other):
        return Jet(other - self.value, -self.dx, -self.dy)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value * other.value,
                self.value * other.dx + self.dx * other.value,
                self.value * other.dy + self.dy * other.value,
            )
        return Jet(self.value * other, self.dx * other, self.dy * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            inv = 1.0 / other.value
            q = self.value * inv
            return Jet(q, (self.dx - q * other.dx) * inv, (self.dy - q * other.dy) * inv)
        return Jet(self.value / other, self.dx / other, self.dy / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.value
        q = other * inv
        return Jet(q, -q * self.dx * inv, -q * self.dy * inv)


def _chain(value, slope, a: Jet) -> Jet:
    return Jet(value, slope * a.dx, slope * a.dy)


def real_part(a):
    """Strip jet layers down to the plain numeric value."""
    while isinstance(a, Jet):
        a = a.value
    return a


def sin(a):
    if isinstance(a, Jet):
        return _chain(sin(a.value), cos(a.value), a)
    return np.sin(a)


def cos(a):
    if isinstance(a, Jet):
        return _chain(cos(a.value), -sin(a.value), a)
    return np.cos(a)


def tan(a):
    if isinstance(a, Jet):
        t = tan(a.value)
        return _chain(t, 1.0 + t * t, a)
    return np.tan(a)


def exp(a):
    if isinstance(a, Jet):
        e = exp(a.value)
        return _chain(e, e, a)
    return np.exp(a)


def log(a):
    if isinstance(a, Jet):
        return _chain(log(a.value), 1.0 / a.value, a)
    return np.log(a)


def sqrt(a):
    if isinstance(a, Jet):
        s = sqrt(a.value)
        return _chain(s, 0.5 / s, a)
    return np.sqrt(a)


def atan(a):
    if isinstance(a, Jet):
        return _chain(atan(a.value), 1.0 / (1.0 + a.value * a.value), a)
    return np.arctan(a)


FUNCTIONS: dict[str, Callable[[Any], Any]] = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "atan": atan,
}

CONSTANTS = {"pi": float(np.pi)}


# --------------------------------------------------------------------------
# Domain checking

_LENIENT = contextvars.ContextVar("filippov_lenient_domain", default=False)


@contextlib.contextmanager
def lenient_domain():
    """Evaluate without domain checks; violations produce nan/inf instead.

    Used by the vectorized searches, where a few bad seeds must not abort the
    whole batch.
    """
    token = _LENIENT.set(True)
    try:
        with np.errstate(all="ignore"):
            yield
    finally:
        _LENIENT.reset(token)


def _require(ok, node, why):
    if not _LENIENT.get() and not np.all(ok):
        raise EvaluationDomainError(f"{why} in '{to_text(node)}'", to_text(node))


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, env):
        return self.value


@dataclass(frozen=True)
class Var:
    name: str

    def eval(self, env):
        return env[self.name]


@dataclass(frozen=True)
class Const:
    name: str

    def eval(self, env):
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Neg:
    arg: Any

    def eval(self, env):
        return -self.arg.eval(env)


@dataclass(frozen=True)
class Add:
    left: Any
    right: Any

    def eval(self, env):
        return self.left.eval(env) + self.right.eval(env)


@dataclass(frozen=True)
class Sub:
    left: Any
    right: Any

    def eval(self, env):
        return self.left.eval(env) - self.right.eval(env)


@dataclass(frozen=True)
class Mul:
    left: Any
    right: Any

    def eval(self, env):
        return self.left.eval(env) * self.right.eval(env)


@dataclass(frozen=True)
class Div:
    left: Any
    right: Any

    def eval(self, env):
        num = self.left.eval(env)
        den = self.right.eval(env)
        _require(real_part(den) != 0, self, "division by zero")
        return num / den


def _ipow(base, n: int):
    if n == 0:
        return 1.0
    result = None
    b = base
    k = n
    while k:
        if k & 1:
            result = b if result is None else result * b
        k >>= 1
        if k:
            b = b * b
    return result


@dataclass(frozen=True)
class Pow:
    base: Any
    exponent: Any

    def eval(self, env):
        b = self.base.eval(env)
        e = self.exponent.eval(env)
        if not isinstance(e, Jet) and np.ndim(e) == 0 and float(e).is_integer():
            n = int(e)
            if n >= 0:
                return _ipow(b, n)
            _require(real_part(b) != 0, self, "zero raised to a negative power")
            return 1.0 / _ipow(b, -n)
        _require(real_part(b) > 0, self, "non-integer power of a non-positive base")
        return exp(e * log(b))


@dataclass(frozen=True)
class Call:
    func: str
    arg: Any

    def eval(self, env):
        a = self.arg.eval(env)
        if self.func == "log":
            _require(real_part(a) > 0, self, "log of a non-positive value")
        elif self.func == "sqrt":
            if isinstance(a, Jet):
                _require(real_part(a) > 0, self, "sqrt derivative at a non-positive value")
            else:
                _require(real_part(a) >= 0, self, "sqrt of a negative value")
        return FUNCTIONS[self.func](a)


_BINARY_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


def to_text(node) -> str:
    """Render a tree as fully parenthesized text that parses back to it."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)} ^ {to_text(node.exponent)})"
    sym = _BINARY_SYMBOL[type(node)]
    return f"({to_text(node.left)} {sym} {to_text(node.right)})"


# --------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.lastgroup is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos), src)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


def _byte_offset(src: str, char_pos: int) -> int:
    return len(src[:char_pos].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, variables):
        self.src = src
        self.variables = tuple(variables)
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, tok, message=None):
        kind, text, pos = tok
        if message is None:
            message = "unexpected end of input" if kind == "eof" else f"unexpected {text!r}"
        raise ExprSyntaxError(message, _byte_offset(self.src, pos), self.src)

    def expect(self, text):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            self.error(tok, f"expected {text!r}")
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            self.error(tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self):
        tok = self.advance()
        kind, text, pos = tok
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if text not in FUNCTIONS:
                    raise UnknownFunctionError(
                        f"unknown function {text!r} at offset {_byte_offset(self.src, pos)}"
                    )
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                self.error(nxt, f"expected '(' after {text!r}")
            if text in self.variables:
                return Var(text)
            if text in CONSTANTS:
                return Const(text)
            raise UnknownVariableError(
                f"unknown variable {text!r} at offset {_byte_offset(self.src, pos)}"
                f" (allowed: {', '.join(self.variables)})"
            )
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.error(tok)


# --------------------------------------------------------------------------
# Public expression objects


def _broadcast_like(result, x, y):
    if isinstance(result, Jet) or np.ndim(result) > 0:
        return result
    if np.ndim(x) > 0 or np.ndim(y) > 0:
        return np.full(np.broadcast(x, y).shape, float(result))
    return float(result)


def as_jet(a) -> Jet:
    return a if isinstance(a, Jet) else Jet(a, 0.0, 0.0)


class FieldMixin:
    """Adds ``jet`` to anything whose ``__call__`` accepts jets."""

    def jet(self, x, y):
        out = self(Jet.var_x(x), Jet.var_y(y))
        if isinstance(out, tuple):
            shape = np.broadcast(x, y).shape
            return tuple(as_jet(_broadcast_like(c, np.zeros(shape), 0.0)) for c in out)
        return as_jet(_broadcast_like(out, x, y))


@dataclass(frozen=True)
class ScalarExpr(FieldMixin):
    """Parsed scalar expression in the variables ``x`` and ``y``."""

    node: Any
    source: str = ""
    variables: tuple = ("x", "y")

    def __call__(self, x, y):
        env = {self.variables[0]: x, self.variables[1]: y}
        return _broadcast_like(self.node.eval(env), x, y)

    def __str__(self):
        return self.source or to_text(self.node)

    def to_text(self) -> str:
        return to_text(self.node)


@dataclass(frozen=True)
class VectorFieldExpr(FieldMixin):
    fx: ScalarExpr
    fy: ScalarExpr

    def __call__(self, x, y):
        return self.fx(x, y), self.fy(x, y)

    def __str__(self):
        return f"({self.fx}, {self.fy})"

    @property
    def sources(self):
        return str(self.fx), str(self.fy)


def parse_scalar(src: str, variables=("x", "y")) -> ScalarExpr:
    """Parse ``src`` into a :class:`ScalarExpr`.

    Raises :class:`ExprSyntaxError` (carrying the byte offset),
    :class:`UnknownFunctionError` or :class:`UnknownVariableError`.
    """
    if isinstance(src, (int, float)):
        src = repr(float(src))
    node = _Parser(src, variables).parse()
    return ScalarExpr(node, src, tuple(variables))


def parse_vector(fx, fy=None, variables=("x", "y")) -> VectorFieldExpr:
    """Build a vector field from two component sources (or one 2-sequence)."""
    if fy is None:
        fx, fy = fx
    return VectorFieldExpr(parse_scalar(fx, variables), parse_scalar(fy, variables))


def eval_jet(e: ScalarExpr, x: float, y: float) -> Jet:
    return e.jet(x, y)


def eval_vec(v: VectorFieldExpr, x: float, y: float):
    fx, fy = v(x, y)
    return float(fx), float(fy)
