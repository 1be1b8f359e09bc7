"""Tiny expression language for map branches and observables.

Grammar (precedence low to high, ``^`` right associative)::

    expr   := term  (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | NAME "(" expr ")" | "(" expr ")"

Known functions: sin, cos, exp, log, sqrt.  The only variable is ``x``.
Printing and parsing round-trip: ``parse_expr(str(e))`` evaluates
identically to ``e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprSyntaxError",
    "parse_expr",
    "differentiate",
    "evaluate",
    "poly_coefficients",
]

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}

# printing precedence levels
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 25, 30, 99


class ExprSyntaxError(ValueError):
    """Raised on malformed expression text; carries the 0-based position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class Expr:
    """Base class for expression nodes."""

    def __call__(self, x):
        return evaluate(self, x)

    def deriv(self) -> "Expr":
        raise NotImplementedError

    def __str__(self) -> str:
        return _render(self, 0)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def deriv(self) -> Expr:
        return Const(0.0)


@dataclass(frozen=True)
class Var(Expr):
    def deriv(self) -> Expr:
        return Const(1.0)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def deriv(self) -> Expr:
        return _neg(self.arg.deriv())


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr

    def deriv(self) -> Expr:
        a, b = self.lhs, self.rhs
        da, db = a.deriv(), b.deriv()
        if self.op == "+":
            return _add(da, db)
        if self.op == "-":
            return _sub(da, db)
        if self.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if self.op == "/":
            num = _sub(_mul(da, b), _mul(a, db))
            return _div(num, _pow(b, Const(2.0)))
        # power rule; constant exponent kept in closed polynomial form
        if isinstance(b, Const):
            return _mul(_mul(b, _pow(a, Const(b.value - 1.0))), da)
        # a^b = exp(b log a)
        inner = _add(_mul(db, Call("log", a)), _div(_mul(b, da), a))
        return _mul(self, inner)


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr

    def deriv(self) -> Expr:
        a, da = self.arg, self.arg.deriv()
        if self.fn == "sin":
            return _mul(Call("cos", a), da)
        if self.fn == "cos":
            return _neg(_mul(Call("sin", a), da))
        if self.fn == "exp":
            return _mul(self, da)
        if self.fn == "log":
            return _div(da, a)
        if self.fn == "sqrt":
            return _div(da, _mul(Const(2.0), self))
        raise ValueError(f"unknown function {self.fn!r}")


# ---------------------------------------------------------------------------
# folding constructors (keep derivative output tidy)


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return Const(0.0)
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return Const(1.0)
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            return Const(float(a.value**b.value))
        except (OverflowError, ZeroDivisionError):
            pass
    return BinOp("^", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, x):
    """Evaluate ``e`` at ``x`` (scalar or ndarray), broadcasting constants."""
    xv = np.asarray(x, dtype=float)
    out = _eval(e, xv)
    if np.shape(out) != xv.shape:
        out = np.broadcast_to(np.asarray(out, dtype=float), xv.shape).copy()
    if xv.ndim == 0:
        return float(out)
    return out


def _eval(e: Expr, x):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, BinOp):
        a, b = _eval(e.lhs, x), _eval(e.rhs, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            with np.errstate(divide="ignore", invalid="ignore"):
                return a / b
        with np.errstate(invalid="ignore"):
            return np.power(np.asarray(a, dtype=float), b)
    if isinstance(e, Call):
        with np.errstate(invalid="ignore", divide="ignore"):
            return _FUNCS[e.fn](_eval(e.arg, x))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# printing


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Const):
        if e.value < 0 or (e.value == 0 and np.signbit(e.value)):
            return _render(Neg(Const(-e.value)), parent_prec)
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Call):
        return f"{e.fn}({_render(e.arg, 0)})"
    if isinstance(e, Neg):
        s = "-" + _render(e.arg, _PREC_NEG)
        return f"({s})" if parent_prec > _PREC_NEG else s
    if isinstance(e, BinOp):
        return _render_binop(e, parent_prec)
    raise TypeError(f"not an expression node: {e!r}")


def _render_binop(e: BinOp, parent_prec: int) -> str:
    if e.op in ("+", "-"):
        prec = _PREC_ADD
        lhs = _render(e.lhs, prec)
        rhs = _render(e.rhs, prec + 1)  # left associative
        s = f"{lhs} {e.op} {rhs}"
    elif e.op in ("*", "/"):
        prec = _PREC_MUL
        lhs = _render(e.lhs, prec)
        rhs = _render(e.rhs, prec + 1)
        s = f"{lhs}{e.op}{rhs}"
    else:  # ^ is right associative
        prec = _PREC_POW
        lhs = _render(e.lhs, prec + 1)
        rhs = _render(e.rhs, prec)
        s = f"{lhs}^{rhs}"
    return f"({s})" if parent_prec > prec else s


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {text[at]!r}", at)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.take()
                rhs = self.term()
                e = BinOp(val, e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("*", "/"):
                self.take()
                rhs = self.unary()
                e = BinOp(val, e, rhs)
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "x":
                return Var()
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExprSyntaxError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)


def parse_expr(text: str) -> Expr:
    """Parse expression text into an AST; raises ExprSyntaxError with position."""
    return _Parser(text).parse()


def differentiate(e: Expr | str) -> Expr:
    """Closed-form derivative of an expression (or of parsed text)."""
    if isinstance(e, str):
        e = parse_expr(e)
    return e.deriv()


# ---------------------------------------------------------------------------
# polynomial structure (used by the exact correlation path)


def poly_coefficients(e: Expr | str, max_degree: int = 64) -> list[float] | None:
    """Ascending coefficient list if ``e`` is a polynomial in x, else None.

    Only +, -, *, unary minus and integer constant powers qualify; division
    by a nonzero constant is allowed.
    """
    if isinstance(e, str):
        e = parse_expr(e)

    def go(node: Expr) -> list[float] | None:
        if isinstance(node, Const):
            return [node.value]
        if isinstance(node, Var):
            return [0.0, 1.0]
        if isinstance(node, Neg):
            c = go(node.arg)
            return None if c is None else [-v for v in c]
        if isinstance(node, Call):
            return None
        if isinstance(node, BinOp):
            if node.op == "^":
                if not isinstance(node.rhs, Const):
                    return None
                p = node.rhs.value
                if p != int(p) or p < 0 or p > max_degree:
                    return None
                base = go(node.lhs)
                if base is None:
                    return None
                out = [1.0]
                for _ in range(int(p)):
                    out = _poly_mul(out, base)
                    if len(out) > max_degree + 1:
                        return None
                return out
            a = go(node.lhs)
            if a is None:
                return None
            if node.op == "/":
                if isinstance(node.rhs, Const) and node.rhs.value != 0.0:
                    return [v / node.rhs.value for v in a]
                return None
            b = go(node.rhs)
            if b is None:
                return None
            if node.op == "+":
                return _poly_add(a, b, 1.0)
            if node.op == "-":
                return _poly_add(a, b, -1.0)
            out = _poly_mul(a, b)
            return out if len(out) <= max_degree + 1 else None
        return None

    coeffs = go(e)
    if coeffs is None:
        return None
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    return coeffs


def _poly_add(a: list[float], b: list[float], sign: float) -> list[float]:
    n = max(len(a), len(b))
    out = [0.0] * n
    for i, v in enumerate(a):
        out[i] += v
    for i, v in enumerate(b):
        out[i] += sign * v
    return out


def _poly_mul(a: list[float], b: list[float]) -> list[float]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, va in enumerate(a):
        if va == 0.0:
            continue
        for j, vb in enumerate(b):
            out[i + j] += va * vb
    return out
