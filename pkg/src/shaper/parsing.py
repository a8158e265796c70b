"""Polynomial expressions in q1..qn with rational coefficients.

Grammar (standard precedence, ``^`` binds tighter than unary minus)::

    expr    := term (("+" | "-") term)*
    term    := unary ("*" unary)*
    unary   := "-" unary | power
    power   := atom ("^" INT)?
    atom    := INT ("/" INT)? | VAR | "(" expr ")"

so ``-q1^2`` is ``-(q1^2)`` and ``/`` only appears inside rational literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParseError
from .jets import Jet

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, Neg, BinOp, Pow]

# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^/()]))")
_VAR = re.compile(r"q([1-9]\d*)$")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            stripped = rest.lstrip()
            if not stripped:
                toks.append(_Tok("end", "", len(text)))
                return toks
            at = pos + (len(rest) - len(stripped))
            raise _error(text, at, f"unexpected character {stripped[0]!r}")
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()


def _error(text: str, pos: int, message: str, expected=()) -> ParseError:
    line = text.count("\n", 0, pos) + 1
    col0 = pos - (text.rfind("\n", 0, pos) + 1)
    return ParseError(message, text, col0, expected, line)


class _Parser:
    def __init__(self, text: str, n: int | None):
        self.text = text
        self.n = n
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message, expected=()):
        raise _error(self.text, self.tok.pos, message, expected)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            if self.tok.kind == "op" and self.tok.text == ")":
                self.fail("unbalanced parentheses: unexpected ')'")
            self.fail(f"unexpected {self.tok.text!r}", ("+", "-", "*", "^", "end of input"))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.accept("*"):
            e = BinOp("*", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            if self.tok.kind != "int":
                self.fail("integer exponent expected", ("non-negative integer",))
            exp = int(self.tok.text)
            self.i += 1
            if self.tok.kind == "op" and self.tok.text == "^":
                self.fail("chained exponents need parentheses")
            return Pow(base, exp)
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            value = Fraction(int(tok.text))
            if self.accept("/"):
                if self.tok.kind != "int":
                    self.fail("integer denominator expected", ("integer",))
                den = int(self.tok.text)
                if den == 0:
                    self.fail("zero denominator")
                self.i += 1
                value = value / den
            return Num(value)
        if tok.kind == "name":
            m = _VAR.match(tok.text)
            if m is None:
                self.fail(f"unknown variable {tok.text!r}", ("q1..qn",))
            idx = int(m.group(1)) - 1
            if self.n is not None and idx >= self.n:
                self.fail(f"unknown variable {tok.text!r}: only q1..q{self.n} exist", (f"q1..q{self.n}",))
            self.i += 1
            return Var(idx)
        if self.accept("("):
            e = self.expr()
            if not self.accept(")"):
                self.fail("unbalanced parentheses: ')' expected", (")",))
            return e
        if tok.kind == "end":
            self.fail("unexpected end of input", ("number", "variable", "(", "-"))
        if tok.text == "/":
            self.fail("'/' is only allowed inside a rational literal p/q", ("number", "variable", "(", "-"))
        self.fail(f"unexpected {tok.text!r}", ("number", "variable", "(", "-"))


def parse_expression(text: str, n: int | None = None) -> Expr:
    """Parse ``text``; ``n`` (if given) restricts variables to q1..qn."""
    return _Parser(text, n).parse()


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    if isinstance(e, Num) and e.value.denominator != 1:
        return 4  # p/q must be parenthesized as a power base
    return 5


def to_text(e: Expr) -> str:
    """Canonical text; ``parse_expression(to_text(e)) == e``."""
    if isinstance(e, Num):
        v = e.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(e, Var):
        return f"q{e.index + 1}"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return "-" + (f"({inner})" if _prec(e.operand) < 3 else inner)
    if isinstance(e, Pow):
        inner = to_text(e.base)
        return (f"({inner})" if _prec(e.base) < 5 else inner) + f"^{e.exponent}"
    p = _PREC[e.op]
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    if _prec(e.right) <= p:  # left-associative operators
        right = f"({right})"
    sep = "*" if e.op == "*" else f" {e.op} "
    return left + sep + right


# -- evaluation --------------------------------------------------------------

Poly = dict  # exponent tuple -> Fraction


def _padd(a: Poly, b: Poly, sign=1) -> Poly:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + sign * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            nv = out.get(k, 0) + va * vb
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
    return out


def to_polynomial(e: Expr, n: int) -> Poly:
    """Exact expansion as ``{exponents: coefficient}``."""
    zero = (0,) * n
    if isinstance(e, Num):
        return {zero: e.value} if e.value else {}
    if isinstance(e, Var):
        if e.index >= n:
            raise ValueError(f"variable q{e.index + 1} outside q1..q{n}")
        k = [0] * n
        k[e.index] = 1
        return {tuple(k): Fraction(1)}
    if isinstance(e, Neg):
        return {k: -v for k, v in to_polynomial(e.operand, n).items()}
    if isinstance(e, Pow):
        base = to_polynomial(e.base, n)
        out: Poly = {zero: Fraction(1)}
        for _ in range(e.exponent):
            out = _pmul(out, base)
        return out
    a, b = to_polynomial(e.left, n), to_polynomial(e.right, n)
    if e.op == "+":
        return _padd(a, b)
    if e.op == "-":
        return _padd(a, b, -1)
    return _pmul(a, b)


def lower_to_jet(e: Expr, n: int, order: int, notices: list[str] | None = None, label: str = "expression") -> Jet:
    """Jet of the expansion; terms above ``order`` are dropped with a notice."""
    poly = to_polynomial(e, n)
    kept = {k: v for k, v in poly.items() if sum(k) <= order}
    dropped = len(poly) - len(kept)
    if dropped and notices is not None:
        top = max(sum(k) for k in poly)
        notices.append(f"{label}: {dropped} term(s) of degree up to {top} dropped at truncation order {order}")
    return Jet(n, order, kept)


def parse_polynomial(text: str, n: int, order: int, notices: list[str] | None = None, label: str = "expression") -> Jet:
    return lower_to_jet(parse_expression(text, n), n, order, notices, label)
