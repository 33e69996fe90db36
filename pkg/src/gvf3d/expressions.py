"""Parser, AST and pretty-printer for implicit-surface expressions.

Grammar (whitespace insignificant)::

    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := ("-")? atom ("^" integer)?
    atom    := number | "x" | "y" | "z" | func "(" expr ")" | "(" expr ")"
    func    := "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt"

Powers take integer exponents only, and constructs whose second derivative
is discontinuous everywhere on their domain (``abs`` and friends) are
rejected at parse time, so every accepted expression is twice continuously
differentiable away from pointwise domain failures (``ln``, ``sqrt``, ``/``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Expression",
    "ExpressionError",
    "Number",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "parse_expression",
    "format_expression",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt")
VARIABLES = ("x", "y", "z")

# Identifiers we recognise but refuse: accepting them would break the
# twice-differentiability contract of compiled fields.
_NON_SMOOTH = ("abs", "sign", "floor", "ceil", "min", "max", "mod")


class ExpressionError(ValueError):
    """Parse failure with the byte offset of the first offending token.

    ``kind`` is one of ``"syntax"``, ``"unknown-identifier"``,
    ``"non-smooth"``; ``expected`` lists the token descriptions that would
    have been accepted at ``offset``.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = (),
                 kind: str = "syntax"):
        self.offset = offset
        self.expected = tuple(expected)
        self.kind = kind
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " | ".join(expected) + ")"
        super().__init__(detail)


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" | "y" | "z"


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-" | "*" | "/"
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str  # one of FUNCTIONS
    arg: "Expression"


Expression = Union[Number, Var, Neg, BinOp, Pow, Call]


# ---------------------------------------------------------------------------
# Lexer

@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "lparen" | "rparen" | "end"
    text: str
    offset: int


_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INTEGER_RE = re.compile(r"\d+\Z")


def _byte_offset(source: str, index: int) -> int:
    # Identical to the char index for pure-ASCII input; pay the encode cost
    # only when reporting an error position.
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        raise ExpressionError(f"unexpected character {ch!r}",
                              _byte_offset(source, i))
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent, one token of lookahead)

_ATOM_EXPECTED = ("number", "variable", "function", "'('")


class _Parser:
    def __init__(self, source: str, tokens: list[_Token]):
        self.source = source
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token, expected: tuple[str, ...] = (),
              kind: str = "syntax") -> ExpressionError:
        return ExpressionError(message, _byte_offset(self.source, tok.offset),
                               expected, kind)

    def parse(self) -> Expression:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"trailing input {tok.text!r}", tok,
                             ("'+'", "'-'", "'*'", "'/'", "end of input"))
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        negated = False
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            negated = True
        node = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return Neg(node) if negated else node

    def exponent(self) -> int:
        sign = 1
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            sign = -1
        tok = self.peek()
        if tok.kind != "number" or not _INTEGER_RE.match(tok.text):
            raise self.error("power requires an integer exponent", tok,
                             ("integer",))
        self.advance()
        return sign * int(tok.text)

    def atom(self) -> Expression:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            if value != value or value in (float("inf"), float("-inf")):
                raise self.error(f"number literal {tok.text!r} out of range",
                                 tok, ("finite number",))
            return Number(value)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in VARIABLES:
                return Var(name)
            if name in FUNCTIONS:
                open_tok = self.peek()
                if open_tok.kind != "lparen":
                    raise self.error(f"function {name!r} requires an argument "
                                     "list", open_tok, ("'('",))
                self.advance()
                arg = self.expr()
                close_tok = self.peek()
                if close_tok.kind != "rparen":
                    raise self.error("unclosed function argument", close_tok,
                                     ("')'",))
                self.advance()
                return Call(name, arg)
            if name in _NON_SMOOTH:
                raise self.error(
                    f"{name!r} is not twice continuously differentiable",
                    tok, kind="non-smooth")
            raise self.error(f"unknown identifier {name!r}", tok,
                             _ATOM_EXPECTED, kind="unknown-identifier")
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            close_tok = self.peek()
            if close_tok.kind != "rparen":
                raise self.error("unclosed parenthesis", close_tok, ("')'",))
            self.advance()
            return node
        found = repr(tok.text) if tok.text else "end of input"
        raise self.error(f"expected an operand, found {found}", tok,
                         _ATOM_EXPECTED)


def parse_expression(source: str) -> Expression:
    """Parse ``source``; raises :class:`ExpressionError` with position info."""
    return _Parser(source, _tokenize(source)).parse()


# ---------------------------------------------------------------------------
# Pretty-printer.  Emits the minimal parenthesisation so that
# ``parse_expression(format_expression(e)) == e`` structurally.

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _render(expr: Expression) -> tuple[str, int]:
    if isinstance(expr, Number):
        if expr.value < 0 or (expr.value == 0 and str(expr.value)[0] == "-"):
            return f"-{float(-expr.value)!r}", _PREC_NEG
        return repr(float(expr.value)), _PREC_ATOM
    if isinstance(expr, Var):
        return expr.name, _PREC_ATOM
    if isinstance(expr, Call):
        inner, _ = _render(expr.arg)
        return f"{expr.func}({inner})", _PREC_ATOM
    if isinstance(expr, Pow):
        base = _child(expr.base, _PREC_ATOM)
        return f"{base}^{expr.exponent}", _PREC_POW
    if isinstance(expr, Neg):
        return f"-{_child(expr.operand, _PREC_POW)}", _PREC_NEG
    if isinstance(expr, BinOp):
        if expr.op in "+-":
            left = _child(expr.left, _PREC_ADD)
            right = _child(expr.right, _PREC_MUL)
            return f"{left} {expr.op} {right}", _PREC_ADD
        left = _child(expr.left, _PREC_MUL)
        right = _child(expr.right, _PREC_NEG)
        return f"{left} {expr.op} {right}", _PREC_MUL
    raise TypeError(f"not an expression node: {expr!r}")


def _child(expr: Expression, min_prec: int) -> str:
    text, prec = _render(expr)
    if prec < min_prec:
        return f"({text})"
    return text


def format_expression(expr: Expression) -> str:
    """Render ``expr`` back to source text (round-trips through the parser)."""
    return _render(expr)[0]
