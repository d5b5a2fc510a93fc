"""Arithmetic expression parsing for user-defined velocity fields.

Grammar: floating literals, the variables x, y, z, w1..w6, t, binary
+ - * / ^, unary minus, parentheses, and one-argument calls to
sin cos tan tanh exp ln atan sqrt abs. Precedence from loosest to
tightest: + -, * /, unary minus, ^ (right-associative), so "-x^2" is
-(x^2) and "x^-2" parses.

Parse errors carry the byte offset (not character offset) of the
offending input so callers can point at positions in UTF-8 sources.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import LdescError

VARIABLES = ("x", "y", "z", "w1", "w2", "w3", "w4", "w5", "w6", "t")

_SCALAR_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "tanh": math.tanh,
    "exp": math.exp,
    "ln": math.log,
    "atan": math.atan,
    "sqrt": math.sqrt,
    "abs": abs,
}

_ARRAY_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": np.tanh,
    "exp": np.exp,
    "ln": np.log,
    "atan": np.arctan,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

FUNCTIONS = tuple(_SCALAR_FUNCTIONS)


class ExprSyntaxError(LdescError):
    """Malformed source text; `offset` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class UnknownIdentifier(LdescError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} (byte {offset})")
        self.name = name
        self.offset = offset


class UnboundVariable(LdescError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} has no bound value")
        self.name = name


class EvalDomainError(LdescError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Call, Neg, BinOp]

_NUM_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPERATORS = "+-*/^()"


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | one of _OPERATORS | "end"
    text: str
    offset: int  # byte offset into the UTF-8 encoding of the source


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            byte += len(ch.encode("utf-8"))
            continue
        m = _NUM_RE.match(source, pos)
        if m:
            tokens.append(_Token("num", m.group(), byte))
        else:
            m = _NAME_RE.match(source, pos)
            if m:
                tokens.append(_Token("name", m.group(), byte))
            elif ch in _OPERATORS:
                tokens.append(_Token(ch, ch, byte))
                pos += 1
                byte += 1
                continue
            else:
                raise ExprSyntaxError(f"unexpected character {ch!r}", byte)
        text = m.group()
        pos = m.end()
        byte += len(text.encode("utf-8"))  # matched text is ASCII here
    tokens.append(_Token("end", "", byte))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.offset
            )
        return self.advance()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        if self.peek().kind == "^":
            self.advance()
            return BinOp("^", node, self.unary())  # right-associative, allows x^-2
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text in _SCALAR_FUNCTIONS:
                if self.peek().kind != "(":
                    raise ExprSyntaxError(
                        f"expected '(' after function {tok.text!r}", self.peek().offset
                    )
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in VARIABLES:
                return Var(tok.text)
            raise UnknownIdentifier(tok.text, tok.offset)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {tok.text or 'end of input'!r}", tok.offset
        )


def parse(source: str) -> Expr:
    parser = _Parser(_tokenize(source))
    node = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExprSyntaxError(f"unexpected trailing {trailing.text!r}", trailing.offset)
    return node


def free_vars(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Num):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Call):
        return free_vars(expr.arg)
    if isinstance(expr, Neg):
        return free_vars(expr.operand)
    return free_vars(expr.left) | free_vars(expr.right)


def _check_finite(value: float) -> float:
    if not math.isfinite(value):
        raise EvalDomainError("non-finite result")
    return value


def eval_expr(expr: Expr, bindings: Mapping[str, float]) -> float:
    """Strict scalar evaluation: domain faults raise instead of yielding nan/inf."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise UnboundVariable(expr.name) from None
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, bindings)
    if isinstance(expr, Call):
        v = eval_expr(expr.arg, bindings)
        if expr.func == "ln" and v <= 0.0:
            raise EvalDomainError(f"ln of non-positive value {v!r}")
        if expr.func == "sqrt" and v < 0.0:
            raise EvalDomainError(f"sqrt of negative value {v!r}")
        try:
            return _check_finite(_SCALAR_FUNCTIONS[expr.func](v))
        except OverflowError:
            raise EvalDomainError(f"overflow in {expr.func}") from None
    a = eval_expr(expr.left, bindings)
    b = eval_expr(expr.right, bindings)
    if expr.op == "+":
        return _check_finite(a + b)
    if expr.op == "-":
        return _check_finite(a - b)
    if expr.op == "*":
        return _check_finite(a * b)
    if expr.op == "/":
        if b == 0.0:
            raise EvalDomainError("division by zero")
        return _check_finite(a / b)
    try:
        return _check_finite(math.pow(a, b))
    except (ValueError, OverflowError):
        raise EvalDomainError(f"domain error in {a!r} ^ {b!r}") from None


def eval_array(expr: Expr, bindings: Mapping[str, object]) -> np.ndarray:
    """Lenient vectorized evaluation: domain faults become nan/inf in the output.

    Used on batched grids where per-node failures are detected downstream;
    callers are expected to treat non-finite entries as failed nodes.
    """
    with np.errstate(all="ignore"):
        return np.asarray(_eval_array(expr, bindings), dtype=float)


def _eval_array(expr: Expr, bindings: Mapping[str, object]):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return bindings[expr.name]
        except KeyError:
            raise UnboundVariable(expr.name) from None
    if isinstance(expr, Neg):
        return np.negative(_eval_array(expr.operand, bindings))
    if isinstance(expr, Call):
        return _ARRAY_FUNCTIONS[expr.func](_eval_array(expr.arg, bindings))
    a = _eval_array(expr.left, bindings)
    b = _eval_array(expr.right, bindings)
    if expr.op == "+":
        return np.add(a, b)
    if expr.op == "-":
        return np.subtract(a, b)
    if expr.op == "*":
        return np.multiply(a, b)
    if expr.op == "/":
        return np.divide(a, b)
    return np.power(a, b)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return 4 if expr.op == "^" else _PREC[expr.op]
    if isinstance(expr, Neg):
        return 3
    return 5  # atoms and calls never need wrapping


def pretty(expr: Expr) -> str:
    """Render with minimal parentheses; parse(pretty(e)) == e for parsed e."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.func}({pretty(expr.arg)})"
    if isinstance(expr, Neg):
        inner = pretty(expr.operand)
        if _prec(expr.operand) <= 3:  # -(a+b), -(a*b), -(-a)
            inner = f"({inner})"
        return f"-{inner}"
    p = 4 if expr.op == "^" else _PREC[expr.op]
    left = pretty(expr.left)
    right = pretty(expr.right)
    # '^' groups to the right, the others to the left; negations on the
    # right are always wrapped so "a--b" and "x^-y" never appear bare.
    lp = _prec(expr.left)
    if lp < p or (lp == p and expr.op == "^"):
        left = f"({left})"
    rp = _prec(expr.right)
    if rp < p or (rp == p and expr.op != "^") or isinstance(expr.right, Neg):
        right = f"({right})"
    return f"{left}{expr.op}{right}"
