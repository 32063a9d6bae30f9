"""Expression DSL: parser and deterministic pretty-printer.

Surface syntax: jets u, u_x, u_xx, u_xxx (up to four x's), u_4x / u_{4}x;
independent variables x, t; function symbols f(u), f'(u), df^k, r(u),
rhat(u), ln(u+c); any other identifier is a named parameter; integer
rationals with + - * / ^ and parentheses.  xi^k monomials are admitted in
series contexts only.

The printer emits the canonical form: numerator and denominator as sums of
monomials in a fixed dominance order (higher jets first, parameters last
inside a product), jets spelled u_x/u_xx/u_xxx below order four and
numerically from u_4x on.  parse(print(e)) reproduces e exactly.
"""

from __future__ import annotations

import re

from .errors import DslSyntaxError
from .expr import JetExpr, as_expr, fn, ln_shift, par, u, x as x_atom, t as t_atom
from .poly import (
    KIND_FN,
    KIND_JET,
    KIND_PARAM,
    KIND_T,
    KIND_UNKNOWN,
    KIND_X,
    ONE as POLY_ONE,
    Poly,
)
from .series import PsdSeries

_TOKEN_RE = re.compile(r"""
      (?P<ws>\s+)
    | (?P<num>\d+)
    | (?P<ujet>u_\{(?P<braced>\d+)\}x | u_(?P<digits>\d+)x | u_(?P<xs>x{1,4})(?![A-Za-z0-9_']))
    | (?P<dfk>df\^(?P<dford>\d+))
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*'*)
    | (?P<op>\*\*|[-+*/^()])
""", re.VERBOSE)

class _Token:
    __slots__ = ("kind", "value", "line", "column")

    def __init__(self, kind, value, line, column):
        self.kind = kind
        self.value = value
        self.line = line
        self.column = column


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}",
                                 line, pos - line_start + 1)
        if not m.group("ws"):
            col = pos - line_start + 1
            if m.group("num"):
                tokens.append(_Token("num", int(m.group("num")), line, col))
            elif m.group("ujet"):
                if m.group("braced") is not None:
                    k = int(m.group("braced"))
                elif m.group("digits") is not None:
                    k = int(m.group("digits"))
                else:
                    k = len(m.group("xs"))
                tokens.append(_Token("jet", k, line, col))
            elif m.group("dfk"):
                tokens.append(_Token("dfk", int(m.group("dford")), line, col))
            elif m.group("name"):
                tokens.append(_Token("name", m.group("name"), line, col))
            else:
                op = m.group("op")
                tokens.append(_Token("op", "^" if op == "**" else op, line, col))
        else:
            nl = m.group("ws").count("\n")
            if nl:
                line += nl
                line_start = pos + m.group("ws").rfind("\n") + 1
        pos = m.end()
    tokens.append(_Token("end", None, line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, series: bool = False):
        self.tokens = _tokenize(text)
        self.i = 0
        self.series = series

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token, expected=()):
        raise DslSyntaxError(message, tok.line, tok.column, expected)

    def expect_op(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.value != op:
            self.error(f"expected {op!r}", tok, expected=(op,))
        return self.advance()

    # xi bookkeeping: expressions are dicts {xi_power: JetExpr}
    def parse(self):
        v = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error("unexpected trailing input", tok)
        return v

    def expr(self) -> dict:
        v = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "+-":
                self.advance()
                rhs = self.term()
                v = _series_add(v, rhs, 1 if tok.value == "+" else -1)
            else:
                return v

    def term(self) -> dict:
        v = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "*/":
                self.advance()
                rhs = self.factor()
                if tok.value == "*":
                    v = _series_mul(v, rhs, self)
                else:
                    v = _series_div(v, rhs, self, tok)
            else:
                return v

    def factor(self) -> dict:
        tok = self.peek()
        if tok.kind == "op" and tok.value in "+-":
            self.advance()
            v = self.factor()
            if tok.value == "-":
                return {k: -e for k, e in v.items()}
            return v
        return self.power()

    def power(self) -> dict:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.advance()
            n = self.integer_exponent()
            return _series_pow(base, n, self, tok)
        return base

    def integer_exponent(self) -> int:
        tok = self.peek()
        sign = 1
        if tok.kind == "op" and tok.value == "(":
            self.advance()
            inner = self.integer_exponent()
            self.expect_op(")")
            return inner
        if tok.kind == "op" and tok.value in "+-":
            self.advance()
            sign = -1 if tok.value == "-" else 1
            tok = self.peek()
        if tok.kind != "num":
            self.error("expected an integer exponent", tok, expected=("integer",))
        self.advance()
        return sign * tok.value

    def atom(self) -> dict:
        tok = self.advance()
        if tok.kind == "num":
            return {0: as_expr(tok.value)}
        if tok.kind == "jet":
            return {0: u(tok.value)}
        if tok.kind == "dfk":
            self.maybe_call_u(required=False)
            return {0: fn("f", tok.value)}
        if tok.kind == "op" and tok.value == "(":
            v = self.expr()
            self.expect_op(")")
            return v
        if tok.kind == "name":
            return {0: self.named_atom(tok)}
        self.error("expected a value", tok,
                   expected=("number", "identifier", "("))

    def maybe_call_u(self, required: bool) -> None:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            if set(inner) != {0} or inner[0] != u(0):
                self.error("function symbols take the argument (u)", tok)
        elif required:
            self.error("expected (u)", tok, expected=("(",))

    def named_atom(self, tok: _Token) -> JetExpr:
        name = tok.value
        primes = len(name) - len(name.rstrip("'"))
        stem = name.rstrip("'")
        if stem == "u":
            if primes:
                self.error("u takes no primes", tok)
            return u(0)
        if stem == "x" and not primes:
            return x_atom()
        if stem == "t" and not primes:
            return t_atom()
        if stem == "xi" and not primes:
            self.error("xi is only allowed in series contexts", tok)
        if stem == "ln":
            nxt = self.peek()
            if nxt.kind != "op" or nxt.value != "(":
                self.error("ln requires the argument (u+c)", nxt, expected=("(",))
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            if set(inner) != {0} or inner[0] != u(0) + par("c"):
                self.error("ln argument must be u+c", tok)
            return ln_shift()
        if stem in ("f", "r", "rhat"):
            self.maybe_call_u(required=False)
            return fn(stem, primes)
        if primes:
            self.error(f"primes are reserved for function symbols, got {name!r}", tok)
        return par(stem)


class _SeriesParser(_Parser):
    def atom(self) -> dict:
        tok = self.peek()
        if tok.kind == "name" and tok.value == "xi":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.value == "^":
                self.advance()
                n = self.integer_exponent()
                return {n: as_expr(1)}
            return {1: as_expr(1)}
        return super().atom()


def _series_add(a: dict, b: dict, sign: int) -> dict:
    out = dict(a)
    for k, e in b.items():
        out[k] = out.get(k, as_expr(0)) + (e if sign > 0 else -e)
    return out


def _series_mul(a: dict, b: dict, parser: _Parser) -> dict:
    # plain coefficient multiplication: valid because the only xi-bearing
    # factors admitted by the grammar have constant coefficients
    out: dict = {}
    for ka, ea in a.items():
        for kb, eb in b.items():
            k = ka + kb
            out[k] = out.get(k, as_expr(0)) + ea * eb
    return out


def _series_div(a: dict, b: dict, parser: _Parser, tok: _Token) -> dict:
    if set(b) not in ({0}, set()):
        parser.error("cannot divide by a xi-dependent value", tok)
    d = b.get(0, as_expr(0))
    return {k: e / d for k, e in a.items()}


def _series_pow(a: dict, n: int, parser: _Parser, tok: _Token) -> dict:
    if set(a) == {0} or not a:
        return {0: a.get(0, as_expr(0)) ** n}
    if len(a) == 1:
        (k, e), = a.items()
        if n < 0 and not e.is_rational_const:
            parser.error("negative powers require constant coefficients", tok)
        return {k * n: e ** n}
    if n < 0:
        parser.error("negative powers of xi-sums are not supported", tok)
    out = {0: as_expr(1)}
    for _ in range(n):
        out = _series_mul(out, a, parser)
    return out


def parse(text: str) -> JetExpr:
    """Parse an expression; xi is rejected here."""
    v = _Parser(text).parse()
    if set(v) not in ({0}, set()):
        raise DslSyntaxError("xi is only allowed in series contexts", 1, 1)
    return v.get(0, as_expr(0))


def parse_series(text: str) -> PsdSeries:
    """Parse a polynomial-in-xi series literal."""
    v = _SeriesParser(text, series=True).parse()
    return PsdSeries.from_coeffs(v, exact=True)


# -- printing -----------------------------------------------------------------


def _jet_name(k: int) -> str:
    if k == 0:
        return "u"
    if k <= 3:
        return "u_" + "x" * k
    return f"u_{k}x"


def _gen_name(g) -> str:
    if g.kind == KIND_X:
        return "x"
    if g.kind == KIND_T:
        return "t"
    if g.kind == KIND_JET:
        return _jet_name(g.index)
    if g.kind == KIND_FN:
        if g.name == "lnuc":
            return "ln(u+c)"
        if g.name == "f":
            if g.index <= 3:
                return "f" + "'" * g.index + "(u)"
            return f"df^{g.index}"
        return f"{g.name}(u)" if g.index == 0 else f"{g.name}{'~' * g.index}(u)"
    if g.kind == KIND_UNKNOWN:
        if g.index == 0:
            return g.name
        if g.index == 1:
            return f"d{g.name}/dt"
        return f"d^{g.index}{g.name}/dt^{g.index}"
    return g.name


# display dominance: higher jets dominate, then function symbols and
# unknowns, then x and t, parameters least
_PRINT_RANK = {KIND_JET: 0, KIND_FN: 1, KIND_UNKNOWN: 2, KIND_X: 3, KIND_T: 4,
               KIND_PARAM: 5}


def _dominance_key(mono: tuple):
    if not mono:
        return (1, ())  # pure constants print last
    parts = []
    for g, e in mono:
        if g.kind == KIND_JET:
            parts.append(((0, -g.index, "", 0), -e))
        else:
            parts.append(((1, _PRINT_RANK[g.kind], g.name, g.index), -e))
    parts.sort()
    return (0, tuple(parts))


# factor order inside a product: parameters, x, t, unknowns, symbols, jets
_FACTOR_RANK = {KIND_PARAM: 0, KIND_X: 1, KIND_T: 2, KIND_UNKNOWN: 3,
                KIND_FN: 4, KIND_JET: 5}


def _print_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    terms = sorted(p.terms.items(), key=lambda kv: _dominance_key(kv[0]))
    parts = []
    for idx, (mono, coeff) in enumerate(terms):
        factors = sorted(mono, key=lambda ge: (_FACTOR_RANK[ge[0].kind],
                                               ge[0].name, ge[0].index))
        body = "*".join(
            f"{_gen_name(g)}^{e}" if e != 1 else _gen_name(g)
            for g, e in factors)
        mag = abs(coeff)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if idx == 0:
            parts.append(text if coeff > 0 else f"-{text}")
        else:
            parts.append(f" + {text}" if coeff > 0 else f" - {text}")
    return "".join(parts)


def print_expr(e: JetExpr) -> str:
    e = as_expr(e)
    num = _print_poly(e.num)
    if e.den == POLY_ONE:
        return num
    return f"({num})/({_print_poly(e.den)})"


def print_series(s: PsdSeries) -> str:
    parts = []
    for i, c in s.items():
        if c.is_zero:
            continue
        if i == 0:
            parts.append(print_expr(c) if c.den == POLY_ONE and len(c.num.terms) == 1
                         else f"({print_expr(c)})")
        else:
            xi = "xi" if i == 1 else f"xi^{i}" if i > 0 else f"xi^({i})"
            if c == as_expr(1):
                parts.append(xi)
            else:
                parts.append(f"({print_expr(c)})*{xi}")
    if not parts:
        body = "0"
    else:
        body = " + ".join(parts)
    if not s.exact:
        body += f" + O(xi^{s.bottom - 1})"
    return body
