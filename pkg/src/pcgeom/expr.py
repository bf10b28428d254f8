"""Closed-form scalar expressions in chart coordinates.

Expressions are parsed from a small infix grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

Identifiers are chart coordinates, the constants ``pi`` and ``e``, or one of
the unary functions in :data:`FUNCTIONS`. Note that unary minus binds tighter
than ``^``, so ``-x^2`` is ``(-x)^2``; write ``-(x^2)`` for the other reading.

Evaluation with :meth:`Expression.jet` returns the value together with the
exact gradient and Hessian (second-order forward-mode differentiation).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Expression",
    "ExprSyntaxError",
    "ExprDomainError",
    "Jet2",
    "parse",
    "eval_jet2",
    "constant",
    "coordinate",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprSyntaxError(ValueError):
    """Malformed expression source; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}" + (f" in {source!r}" if source else ""))


class ExprDomainError(ArithmeticError):
    """Expression evaluated outside the domain of one of its operations."""


# ---------------------------------------------------------------------------
# second-order jets


class Jet2:
    """Value, gradient and Hessian of a scalar function at a point.

    The arithmetic is truncated second-order Taylor arithmetic, i.e. the
    algebra of a first-order dual number whose components are themselves
    first-order duals. Every Hessian update is a sum of terms of the form
    ``c*H`` or ``u v^T + v u^T``, so symmetry is exact, not approximate.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = value
        self.grad = grad
        self.hess = hess

    @classmethod
    def const(cls, value: float, dim: int) -> "Jet2":
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def variable(cls, value: float, index: int, dim: int) -> "Jet2":
        grad = np.zeros(dim)
        grad[index] = 1.0
        return cls(float(value), grad, np.zeros((dim, dim)))

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        cross = np.outer(a.grad, b.grad)
        return Jet2(
            a.value * b.value,
            a.value * b.grad + b.value * a.grad,
            a.value * b.hess + b.value * a.hess + (cross + cross.T),
        )

    def scale(self, c: float) -> "Jet2":
        return Jet2(c * self.value, c * self.grad, c * self.hess)

    def chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose a scalar function with value/derivatives (f0, f1, f2) at self.value."""
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def reciprocal(self) -> "Jet2":
        x = self.value
        if x == 0.0:
            raise ExprDomainError("division by zero")
        inv = 1.0 / x
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other: "Jet2") -> "Jet2":
        return self * other.reciprocal()

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"


def _unary_derivs(name: str, x: float) -> tuple[float, float, float]:
    if name == "sin":
        s, c = math.sin(x), math.cos(x)
        return s, c, -s
    if name == "cos":
        s, c = math.sin(x), math.cos(x)
        return c, -s, -c
    if name == "tan":
        c = math.cos(x)
        if c == 0.0:
            raise ExprDomainError(f"tan undefined at {x!r}")
        t = math.tan(x)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2
    if name == "exp":
        v = math.exp(x)
        return v, v, v
    if name == "log":
        if x <= 0.0:
            raise ExprDomainError(f"log of non-positive value {x!r}")
        return math.log(x), 1.0 / x, -1.0 / (x * x)
    if name == "sqrt":
        if x <= 0.0:
            raise ExprDomainError(f"sqrt of non-positive value {x!r} (derivatives undefined)")
        r = math.sqrt(x)
        return r, 0.5 / r, -0.25 / (r * x)
    if name == "sinh":
        s, c = math.sinh(x), math.cosh(x)
        return s, c, s
    if name == "cosh":
        s, c = math.sinh(x), math.cosh(x)
        return c, s, c
    if name == "tanh":
        t = math.tanh(x)
        d = 1.0 - t * t
        return t, d, -2.0 * t * d
    raise KeyError(name)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Const | Coord | Neg | BinOp | Call

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _int_exponent(node: Node) -> int | None:
    if isinstance(node, Const) and float(node.value).is_integer() and abs(node.value) <= 64:
        return int(node.value)
    if isinstance(node, Neg):
        inner = _int_exponent(node.arg)
        return None if inner is None else -inner
    if _is_constant(node):
        try:
            v = _eval_float(node, ())
        except (ExprDomainError, OverflowError, ValueError):
            return None
        if v.is_integer() and abs(v) <= 64:
            return int(v)
    return None


def _is_constant(node: Node) -> bool:
    if isinstance(node, Const):
        return True
    if isinstance(node, Coord):
        return False
    if isinstance(node, (Neg, Call)):
        return _is_constant(node.arg)
    return _is_constant(node.left) and _is_constant(node.right)


def _jet_pow_int(base: Jet2, n: int) -> Jet2:
    if n == 0:
        return Jet2.const(1.0, base.grad.shape[0])
    if n < 0:
        return _jet_pow_int(base, -n).reciprocal()
    result = None
    sq = base
    while n:
        if n & 1:
            result = sq if result is None else result * sq
        n >>= 1
        if n:
            sq = sq * sq
    return result


def _float_pow_int(x: float, n: int) -> float:
    if n < 0:
        if x == 0.0:
            raise ExprDomainError("division by zero")
        return 1.0 / _float_pow_int(x, -n)
    result = 1.0
    sq = x
    while n:
        if n & 1:
            result *= sq
        n >>= 1
        if n:
            sq *= sq
    return result


def _eval_jet(node: Node, point: np.ndarray, dim: int) -> Jet2:
    if isinstance(node, Const):
        return Jet2.const(node.value, dim)
    if isinstance(node, Coord):
        return Jet2.variable(point[node.index], node.index, dim)
    if isinstance(node, Neg):
        return -_eval_jet(node.arg, point, dim)
    if isinstance(node, Call):
        a = _eval_jet(node.arg, point, dim)
        return a.chain(*_unary_derivs(node.func, a.value))
    op = node.op
    if op == "^":
        a = _eval_jet(node.left, point, dim)
        n = _int_exponent(node.right)
        if n is not None:
            return _jet_pow_int(a, n)
        if a.value <= 0.0:
            raise ExprDomainError(f"non-integer power of non-positive base {a.value!r}")
        b = _eval_jet(node.right, point, dim)
        log_a = a.chain(*_unary_derivs("log", a.value))
        prod = b * log_a
        return prod.chain(*_unary_derivs("exp", prod.value))
    a = _eval_jet(node.left, point, dim)
    b = _eval_jet(node.right, point, dim)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b.value == 0.0:
        raise ExprDomainError("division by zero")
    return a / b


def _eval_float(node: Node, point: Sequence[float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Coord):
        return float(point[node.index])
    if isinstance(node, Neg):
        return -_eval_float(node.arg, point)
    if isinstance(node, Call):
        return _unary_derivs(node.func, _eval_float(node.arg, point))[0]
    op = node.op
    a = _eval_float(node.left, point)
    if op == "^":
        n = _int_exponent(node.right)
        if n is not None:
            return _float_pow_int(a, n)
        if a <= 0.0:
            raise ExprDomainError(f"non-integer power of non-positive base {a!r}")
        return math.exp(_eval_float(node.right, point) * math.log(a))
    b = _eval_float(node.right, point)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0.0:
        raise ExprDomainError("division by zero")
    return a / b


def _format_number(value: float) -> str:
    if value == math.pi:
        return "pi"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _to_str(node: Node, parent_prec: int = 0, right_of: str | None = None) -> str:
    if isinstance(node, Const):
        text = _format_number(node.value)
        if node.value < 0:
            return f"({text})"
        return text
    if isinstance(node, Coord):
        return node.name
    if isinstance(node, Neg):
        # '-' base: operand must itself be a base
        return f"(-{_to_str(node.arg, 4)})"
    if isinstance(node, Call):
        return f"{node.func}({_to_str(node.arg)})"
    prec = _PREC[node.op]
    if node.op == "^":
        text = f"{_to_str(node.left, 4)}^{_to_str(node.right, 3)}"
    else:
        text = f"{_to_str(node.left, prec)} {node.op} {_to_str(node.right, prec + 1)}"
    if prec < parent_prec:
        return f"({text})"
    return text


def _remap(node: Node, table: dict[int, Node]) -> Node:
    if isinstance(node, Const):
        return node
    if isinstance(node, Coord):
        return table[node.index]
    if isinstance(node, Neg):
        return _neg(_remap(node.arg, table))
    if isinstance(node, Call):
        return Call(node.func, _remap(node.arg, table))
    return _binop(node.op, _remap(node.left, table), _remap(node.right, table))


def _coord_indices(node: Node, out: set[int]) -> None:
    if isinstance(node, Coord):
        out.add(node.index)
    elif isinstance(node, (Neg, Call)):
        _coord_indices(node.arg, out)
    elif isinstance(node, BinOp):
        _coord_indices(node.left, out)
        _coord_indices(node.right, out)


# light folding so that generated expressions (cone, pullback) stay small
def _is_const(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def _neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _binop(op: str, a: Node, b: Node) -> Node:
    if op == "+":
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
        if _is_const(a) and _is_const(b):
            return Const(a.value + b.value)
    elif op == "-":
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return _neg(b)
        if _is_const(a) and _is_const(b):
            return Const(a.value - b.value)
    elif op == "*":
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return Const(0.0)
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
        if _is_const(a, -1.0):
            return _neg(b)
        if _is_const(b, -1.0):
            return _neg(a)
        if _is_const(a) and _is_const(b):
            return Const(a.value * b.value)
    elif op == "/":
        if _is_const(a, 0.0) and not _is_const(b, 0.0):
            return Const(0.0)
        if _is_const(b, 1.0):
            return a
    elif op == "^":
        if _is_const(b, 1.0):
            return a
        if _is_const(b, 0.0):
            return Const(1.0)
    return BinOp(op, a, b)


def _diff(node: Node, k: int) -> Node:
    """Symbolic partial derivative with respect to coordinate index ``k``."""
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Coord):
        return Const(1.0 if node.index == k else 0.0)
    if isinstance(node, Neg):
        return _neg(_diff(node.arg, k))
    if isinstance(node, Call):
        u = node.arg
        du = _diff(u, k)
        if _is_const(du, 0.0):
            return Const(0.0)
        f = node.func
        if f == "sin":
            outer = Call("cos", u)
        elif f == "cos":
            outer = _neg(Call("sin", u))
        elif f == "tan":
            outer = _binop("+", Const(1.0), _binop("^", Call("tan", u), Const(2.0)))
        elif f == "exp":
            outer = node
        elif f == "log":
            outer = _binop("/", Const(1.0), u)
        elif f == "sqrt":
            outer = _binop("/", Const(0.5), node)
        elif f == "sinh":
            outer = Call("cosh", u)
        elif f == "cosh":
            outer = Call("sinh", u)
        else:  # tanh
            outer = _binop("-", Const(1.0), _binop("^", Call("tanh", u), Const(2.0)))
        return _binop("*", outer, du)
    a, b = node.left, node.right
    da, db = _diff(a, k), _diff(b, k)
    op = node.op
    if op in "+-":
        return _binop(op, da, db)
    if op == "*":
        return _binop("+", _binop("*", da, b), _binop("*", a, db))
    if op == "/":
        num = _binop("-", _binop("*", da, b), _binop("*", a, db))
        return _binop("/", num, _binop("^", b, Const(2.0)))
    n = _int_exponent(b)
    if n is not None:
        return _binop("*", _binop("*", Const(float(n)), _binop("^", a, Const(float(n - 1)))), da)
    # a^b = exp(b log a)
    inner = _binop("+", _binop("*", db, Call("log", a)), _binop("/", _binop("*", b, da), a))
    return _binop("*", node, inner)


# ---------------------------------------------------------------------------
# public expression type


class Expression:
    """Immutable parsed expression over an ordered list of coordinate names."""

    __slots__ = ("root", "coords")

    def __init__(self, root: Node, coords: Sequence[str]):
        self.root = root
        self.coords = tuple(coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __call__(self, point: Sequence[float]) -> float:
        return _eval_float(self.root, point)

    def jet(self, point: Sequence[float]) -> Jet2:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.dim},)")
        return _eval_jet(self.root, point, self.dim)

    def is_zero(self) -> bool:
        return _is_const(self.root, 0.0)

    def constant_value(self) -> float | None:
        return self.root.value if isinstance(self.root, Const) else None

    def used_coords(self) -> set[int]:
        out: set[int] = set()
        _coord_indices(self.root, out)
        return out

    def diff(self, k: int) -> "Expression":
        return Expression(_diff(self.root, k), self.coords)

    def with_coords(self, coords: Sequence[str]) -> "Expression":
        """Re-express over a larger (or reordered) coordinate list, matching by name."""
        index = {name: i for i, name in enumerate(coords)}
        table = {}
        for i, name in enumerate(self.coords):
            if name in index:
                table[i] = Coord(index[name], name)
        missing = self.used_coords() - set(table)
        if missing:
            names = ", ".join(self.coords[i] for i in sorted(missing))
            raise ValueError(f"coordinates {names} not present in {tuple(coords)}")
        return Expression(_remap(self.root, table), coords)

    def substitute(self, replacements: Sequence["Expression"]) -> "Expression":
        """Replace coordinate ``i`` by ``replacements[i]`` (all over one new chart)."""
        if len(replacements) != self.dim:
            raise ValueError("need one replacement per coordinate")
        coords = replacements[0].coords if replacements else ()
        table = {i: r.root for i, r in enumerate(replacements)}
        return Expression(_remap(self.root, table), coords)

    # builders
    def _lift(self, other) -> Node:
        if isinstance(other, Expression):
            if other.coords != self.coords:
                raise ValueError("expressions live on different coordinate lists")
            return other.root
        return Const(float(other))

    def __add__(self, other):
        return Expression(_binop("+", self.root, self._lift(other)), self.coords)

    def __radd__(self, other):
        return Expression(_binop("+", self._lift(other), self.root), self.coords)

    def __sub__(self, other):
        return Expression(_binop("-", self.root, self._lift(other)), self.coords)

    def __rsub__(self, other):
        return Expression(_binop("-", self._lift(other), self.root), self.coords)

    def __mul__(self, other):
        return Expression(_binop("*", self.root, self._lift(other)), self.coords)

    def __rmul__(self, other):
        return Expression(_binop("*", self._lift(other), self.root), self.coords)

    def __truediv__(self, other):
        return Expression(_binop("/", self.root, self._lift(other)), self.coords)

    def __rtruediv__(self, other):
        return Expression(_binop("/", self._lift(other), self.root), self.coords)

    def __pow__(self, other):
        return Expression(_binop("^", self.root, self._lift(other)), self.coords)

    def __neg__(self):
        return Expression(_neg(self.root), self.coords)

    def __str__(self) -> str:
        return _to_str(self.root)

    def __repr__(self) -> str:
        return f"Expression({str(self)!r}, coords={self.coords!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self.coords == other.coords and self.root == other.root

    def __hash__(self) -> int:
        return hash((self.root, self.coords))


def constant(value: float, coords: Sequence[str]) -> Expression:
    return Expression(Const(float(value)), coords)


def coordinate(name: str, coords: Sequence[str]) -> Expression:
    coords = tuple(coords)
    return Expression(Coord(coords.index(name), name), coords)


def eval_jet2(e: Expression, point: Sequence[float]) -> Jet2:
    return e.jet(point)


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos), source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _byte_offset(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.source = source
        self.coords = tuple(coords)
        self.index = {name: i for i, name in enumerate(self.coords)}
        self.tokens = _tokenize(source)
        self.pos = 0

    def error(self, message: str, tok=None) -> ExprSyntaxError:
        tok = tok or self.tokens[self.pos]
        return ExprSyntaxError(message, _byte_offset(self.source, tok[2]), self.source)

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        tok = self.peek()
        if tok[1] != text or tok[0] != "op":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {text!r}, found {found}")
        return self.take()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Node:
        tok = self.peek()
        kind, text = tok[0], tok[1]
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.base())
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            self.take()
            if text in FUNCTIONS:
                nxt = self.peek()
                if nxt[1] != "(":
                    raise self.error(f"function {text!r} must be called with one argument", nxt)
                self.take()
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise self.error(f"function {text!r} takes exactly 1 argument")
                self.expect(")")
                return Call(text, arg)
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                raise self.error(f"unknown function {text!r}", tok)
            if text in self.index:
                return Coord(self.index[text], text)
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            raise self.error(f"unknown identifier {text!r}", tok)
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {text!r}")


def parse(source: str, coords: Sequence[str]) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``coords``.

    Raises :class:`ExprSyntaxError` (with byte offset) on malformed input,
    unknown identifiers or functions, and wrong argument counts.
    """
    for name in coords:
        if name in FUNCTIONS or name in CONSTANTS:
            raise ValueError(f"coordinate name {name!r} clashes with a built-in")
    return Expression(_Parser(source, coords).parse(), coords)
