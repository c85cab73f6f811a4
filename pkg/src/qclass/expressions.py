"""Surface syntax for chart scalars: a small recursive-descent parser and the
matching deterministic printer.

Grammar (whitespace insignificant, ``*`` mandatory, rationals only)::

    expr     := ['-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := atom ['^' natural]
    atom     := rational | coordinate | '(' expr ')'
    rational := natural ('/' natural)?

Exponents larger than one are accepted only on even coordinates and on
parenthesized subexpressions of even parity (anything odd squares to zero or
worse, so the restriction catches typos early).  Multiplication applies left
to right, so a source-ordered odd product like ``th2*th1`` lands in normal
form with the anticommutation sign, ``-th1*th2``.

``to_expression`` prints any polynomial in a form this grammar parses back to
the identical value; reports rely on that round trip.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import Chart, EVEN, SuperPolynomial, mono_sort_key


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
            continue
        if ch.isdigit():
            start = i
            while i < len(src) and src[i].isdigit():
                i += 1
            tokens.append(_Token("number", src[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < len(src) and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(_Token("name", src[start:i], line, col))
            col += i - start
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], chart: Chart):
        self.tokens = tokens
        self.pos = 0
        self.chart = chart

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return self.advance()

    def parse(self) -> SuperPolynomial:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing {tok.text!r}", tok.line,
                             tok.column)
        return value

    def expr(self) -> SuperPolynomial:
        negate = False
        if self.peek().kind == "-":
            self.advance()
            negate = True
        value = self.term()
        if negate:
            value = -value
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            rhs = self.term()
            value = value + rhs if op.kind == "+" else value - rhs
        return value

    def term(self) -> SuperPolynomial:
        value = self.factor()
        while self.peek().kind == "*":
            self.advance()
            value = value * self.factor()
        return value

    def factor(self) -> SuperPolynomial:
        base, exponent_ok = self.atom()
        if self.peek().kind == "^":
            caret = self.advance()
            tok = self.expect("number")
            exponent = int(tok.text)
            if exponent < 1:
                raise ParseError("exponent must be a positive integer",
                                 tok.line, tok.column)
            if exponent > 1 and not exponent_ok:
                raise ParseError(
                    "exponents above 1 apply only to even coordinates and "
                    "even-parity parenthesized subexpressions",
                    caret.line, caret.column)
            return base ** exponent
        return base

    def atom(self) -> tuple[SuperPolynomial, bool]:
        """Returns (value, may-take-exponent-above-one)."""
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            numerator = int(tok.text)
            if self.peek().kind == "/":
                self.advance()
                den = self.expect("number")
                denominator = int(den.text)
                if denominator == 0:
                    raise ParseError("zero denominator", den.line, den.column)
                return (SuperPolynomial.constant(
                    self.chart, Fraction(numerator, denominator)), False)
            return SuperPolynomial.constant(self.chart, numerator), False
        if tok.kind == "name":
            self.advance()
            try:
                index = self.chart.index(tok.text)
            except Exception:
                raise ParseError(f"unknown identifier {tok.text!r}",
                                 tok.line, tok.column) from None
            even = self.chart.parities[index] == EVEN
            return SuperPolynomial.coordinate(self.chart, index), even
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner, inner.parity() == EVEN
        raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}",
                         tok.line, tok.column)


def parse_expression(src: str, chart: Chart) -> SuperPolynomial:
    return _Parser(_tokenize(src), chart).parse()


def to_expression(poly: SuperPolynomial) -> str:
    """Canonical printed form; parses back to the identical polynomial."""
    if poly.is_zero():
        return "0"
    chart = poly.chart
    pieces = []
    for mono in sorted(poly.terms, key=mono_sort_key):
        coeff = poly.terms[mono]
        factors = []
        for idx, exp in mono[0]:
            name = chart.names[idx]
            factors.append(name if exp == 1 else f"{name}^{exp}")
        factors.extend(chart.names[i] for i in mono[1])
        magnitude = abs(coeff)
        if not factors:
            body = str(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = f"{magnitude}*" + "*".join(factors)
        pieces.append(("-" if coeff < 0 else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
