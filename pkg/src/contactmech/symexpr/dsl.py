"""Expression text format: a tokenizer, recursive-descent parser and printer.

Grammar (whitespace insensitive)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' ['-'] integer)?
    base   := number | identifier | '(' expr ')' | func '(' expr ')'
    func   := 'sin' | 'cos' | 'exp' | 'ln'

Numbers are decimal rationals (``0.5`` is exactly one half).  Identifiers
resolve against a symbol table; the four function names are reserved.  The
printer emits text that parses back to a structurally identical expression.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import ExprSyntaxError, UnknownSymbolError
from .expr import Expr, Func, Symbol, ZERO, const, func, to_expr

_FUNCS = ("sin", "cos", "exp", "ln")


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            tokens.append(("number", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, table: Mapping[str, Symbol]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.table = table

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.peek()
        if tok[0] != kind:
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2], kind)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ExprSyntaxError(f"trailing input {tok[1]!r}", tok[2], "end of input")
        return e

    def expr(self) -> Expr:
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.advance()[0] == "-" else 1
        value = self.term()
        if sign < 0:
            value = -value
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Expr:
        value = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero_canonical():
                    raise ExprSyntaxError(
                        "division by zero", self.tokens[self.pos - 1][2]
                    )
                value = value / rhs
        return value

    def factor(self) -> Expr:
        value = self.base()
        if self.peek()[0] == "^":
            self.advance()
            sign = 1
            if self.peek()[0] == "-":
                self.advance()
                sign = -1
            tok = self.expect("number")
            if "." in tok[1]:
                raise ExprSyntaxError("exponent must be an integer", tok[2], "integer")
            k = sign * int(tok[1])
            if k < 0 and value.is_zero_canonical():
                raise ExprSyntaxError("zero to a negative power", tok[2])
            value = value**k
        return value

    def base(self) -> Expr:
        tok = self.peek()
        if tok[0] == "number":
            self.advance()
            return const(Fraction(tok[1]))
        if tok[0] == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok[0] == "ident":
            self.advance()
            name = tok[1]
            if name in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(name, arg)
            sym = self.table.get(name)
            if sym is None:
                raise UnknownSymbolError(name, tok[2])
            return to_expr(sym)
        raise ExprSyntaxError(
            f"unexpected token {tok[1]!r}", tok[2], "number, identifier or '('"
        )


def parse(text: str, table: Mapping[str, Symbol]) -> Expr:
    """Parse DSL text against a symbol table; returns the canonical expression."""
    return _Parser(text, table).parse()


def _coeff_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _atom_text(atom) -> str:
    if isinstance(atom, Func):
        return f"{atom.kind}({to_text(atom.arg)})"
    return atom.name


def _term_text(coeff: Fraction, mono) -> str:
    top = []
    bottom = []
    for atom, e in mono:
        target = top if e > 0 else bottom
        k = abs(e)
        target.append(_atom_text(atom) if k == 1 else f"{_atom_text(atom)}^{k}")
    c = abs(coeff)
    if c != 1 or not top:
        top.insert(0, _coeff_text(c))
    text = "*".join(top)
    for piece in bottom:
        text += f"/{piece}"
    return text


def _poly_text(poly) -> str:
    if not poly:
        return "0"
    parts = []
    for i, (coeff, mono) in enumerate(poly):
        body = _term_text(coeff, mono)
        if i == 0:
            parts.append(f"-{body}" if coeff < 0 else body)
        else:
            parts.append(f" - {body}" if coeff < 0 else f" + {body}")
    return "".join(parts)


def to_text(e) -> str:
    """Render an expression in the DSL; inverse of :func:`parse` on canonical forms."""
    e = to_expr(e)
    if e.den_nontrivial():
        return f"({_poly_text(e.num)})/({_poly_text(e.den)})"
    return _poly_text(e.num)
