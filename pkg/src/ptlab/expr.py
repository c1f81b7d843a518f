"""Complex-valued potential expressions.

Grammar (highest precedence last)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names ``x``, ``pi``, ``e`` and ``i`` are reserved; any other bare name is a
free parameter that must be bound at evaluation time. Implicit
multiplication is rejected.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Const",
    "Var",
    "Param",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownFunctionError",
    "EvaluationError",
    "UnboundParameterError",
    "FUNCTIONS",
    "CONSTANTS",
    "parse",
    "format_expr",
    "evaluate",
    "evaluate_on",
    "free_params",
]


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    """Malformed source. ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownFunctionError(ExprSyntaxError):
    pass


class EvaluationError(ExprError):
    pass


class UnboundParameterError(EvaluationError):
    pass


FUNCTIONS = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "tan": cmath.tan,
    "exp": cmath.exp,
    "log": cmath.log,
    "sqrt": cmath.sqrt,
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
}

CONSTANTS = {
    "pi": complex(math.pi, 0.0),
    "e": complex(math.e, 0.0),
    "i": complex(0.0, 1.0),
}

RESERVED = frozenset(CONSTANTS) | {"x"} | frozenset(FUNCTIONS)


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ExprError(f"literal must be finite and non-negative, got {self.value!r}")


@dataclass(frozen=True)
class Const:
    name: str

    def __post_init__(self):
        if self.name not in CONSTANTS:
            raise ExprError(f"unknown constant {self.name!r}")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str

    def __post_init__(self):
        if self.name in RESERVED:
            raise ExprError(f"{self.name!r} is reserved and cannot be a parameter")


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in "+-*/^" or len(self.op) != 1:
            raise ExprError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ExprError(f"unknown function {self.func!r}")


Expr = Union[Num, Const, Var, Param, Neg, BinOp, Call]


# ------------------------------------------------------------------------ parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN.match(source, pos)
            if m is None:
                raise ExprSyntaxError(f"unexpected character {source[pos]!r}", self._byte(pos))
            kind = m.lastgroup
            if kind != "ws":
                self.tokens.append((kind, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", len(source)))
        self.k = 0

    def _byte(self, pos: int) -> int:
        return len(self.source[:pos].encode("utf-8"))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.k]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def error(self, message: str, tok: tuple[str, str, int]) -> ExprSyntaxError:
        return ExprSyntaxError(message, self._byte(tok[2]))

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok[1] != text or tok[0] != "op":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {text!r}, found {found}", tok)

    def parse(self) -> Expr:
        tree = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r} (implicit multiplication is not allowed)", tok)
        return tree

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {text!r}", self._byte(tok[2]))
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                raise self.error(f"function {text!r} requires an argument", tok)
            if text == "x":
                return Var()
            if text in CONSTANTS:
                return Const(text)
            return Param(text)
        if tok[:2] == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(text)
        raise self.error(f"expected a value, found {found}", tok)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    >>> parse("i*x^3")
    BinOp(op='*', left=Const(name='i'), right=BinOp(op='^', left=Var(), right=Num(value=3.0)))
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source).parse()


# --------------------------------------------------------------------- formatter

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(node: Expr, needs: bool) -> str:
    text = format_expr(node)
    return f"({text})" if needs else text


def format_expr(node: Expr) -> str:
    """Render ``node`` with the minimal parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        v = float(node.value)
        return str(int(v)) if v.is_integer() and v < 1e15 else repr(v)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({format_expr(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _prec(node.operand) < _NEG_PREC)
    if isinstance(node, BinOp):
        if node.op == "^":
            left = _wrap(node.left, _prec(node.left) < _ATOM_PREC)
            right = _wrap(node.right, _prec(node.right) < _NEG_PREC)
            return f"{left}^{right}"
        p = _PREC[node.op]
        left = _wrap(node.left, _prec(node.left) < p)
        right = _wrap(node.right, _prec(node.right) <= p)
        sep = " " if p == 1 else ""
        return f"{left}{sep}{node.op}{sep}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------- evaluator


def free_params(node: Expr) -> set[str]:
    if isinstance(node, Param):
        return {node.name}
    if isinstance(node, (Neg,)):
        return free_params(node.operand)
    if isinstance(node, Call):
        return free_params(node.arg)
    if isinstance(node, BinOp):
        return free_params(node.left) | free_params(node.right)
    return set()


def _int_power(base: complex, n: int) -> complex:
    if n == 0:
        return complex(1.0, 0.0)
    result = base
    for _ in range(abs(n) - 1):
        result = result * base
    if n < 0:
        if result == 0:
            raise EvaluationError("division by zero in negative power of 0")
        result = 1 / result
    return result


# Larger integer exponents fall through to the principal-branch formula.
_MAX_INT_EXPONENT = 4096


def _power(a: complex, b: complex) -> complex:
    if b.imag == 0 and b.real.is_integer() and abs(b.real) <= _MAX_INT_EXPONENT:
        return _int_power(a, int(b.real))
    if a.imag == 0 and a.real >= 0 and b.imag == 0:
        if a.real == 0:
            if b.real > 0:
                return complex(0.0, 0.0)
            raise EvaluationError("0 raised to a non-positive power")
        return complex(math.pow(a.real, b.real), 0.0)
    if a == 0:
        if b.real > 0:
            return complex(0.0, 0.0)
        raise EvaluationError("0 raised to a power with non-positive real part")
    if a.imag == 0:
        # drop a signed zero so negative reals take arg = +pi
        a = complex(a.real, 0.0)
    return cmath.exp(b * cmath.log(a))


def _eval(node: Expr, x: complex, params: Mapping[str, complex]) -> complex:
    if isinstance(node, Num):
        return complex(node.value, 0.0)
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Param):
        try:
            return complex(params[node.name])
        except KeyError:
            raise UnboundParameterError(f"parameter {node.name!r} is not bound") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, x, params)
    if isinstance(node, Call):
        arg = _eval(node.arg, x, params)
        if node.func == "log" and arg == 0:
            raise EvaluationError("log(0) is undefined")
        return FUNCTIONS[node.func](arg)
    if isinstance(node, BinOp):
        a = _eval(node.left, x, params)
        b = _eval(node.right, x, params)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise EvaluationError("division by zero")
            return a / b
        return _power(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expr, x: float, params: Mapping[str, complex] | None = None) -> complex:
    """Evaluate ``node`` at the real point ``x``.

    Raises
    ------
    UnboundParameterError
        If a free parameter of ``node`` is missing from ``params``.
    EvaluationError
        On division by zero, ``log(0)``, overflow, or a non-finite result.
    """
    params = params or {}
    try:
        value = _eval(node, complex(float(x), 0.0), params)
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvaluationError(f"{exc} at x={x!r}") from exc
    except ValueError as exc:
        if isinstance(exc, ExprError):
            raise
        raise EvaluationError(f"{exc} at x={x!r}") from exc
    if not cmath.isfinite(value):
        raise EvaluationError(f"non-finite value {value!r} at x={x!r}")
    return value


def evaluate_on(node: Expr, xs, params: Mapping[str, complex] | None = None) -> np.ndarray:
    """Sample ``node`` at every point of ``xs``; errors name the offending point."""
    out = np.empty(len(xs), dtype=complex)
    for j, xj in enumerate(xs):
        try:
            out[j] = evaluate(node, float(xj), params)
        except UnboundParameterError:
            raise
        except EvaluationError as exc:
            raise EvaluationError(f"evaluation failed at x[{j}]={float(xj)!r}: {exc}") from exc
    return out
