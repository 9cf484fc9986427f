"""A small expression language over the Laurent field.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' int)*          # right-associative, folded
    unary  := '-'? atom
    atom   := number | symbol | fn '(' args ')' | '(' expr ')'

Unary minus binds to the atom, so ``-eps^2`` means ``(-eps)^2``.  Numbers
(integers, decimals, scientific notation) become exact rationals; ``p/q`` is
ordinary division.  ``eps`` and ``dx`` denote the infinitesimal unit,
``omega`` its reciprocal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .errors import NonArchError, ZeroInput
from .nonarch import (
    DEFAULT_TRUNCATION,
    LaurentNumber,
    eq_modal,
    format_laurent,
    lift_smooth,
    shadow,
    tlh_truncate,
    valuation,
)

__all__ = [
    "ArityMismatch",
    "BinOp",
    "Call",
    "EvaluationFailure",
    "Expr",
    "ExprSyntaxError",
    "FUNCTIONS",
    "Neg",
    "NonIntegerExponent",
    "Number",
    "ParseError",
    "SourceSpan",
    "Symbol",
    "UnknownFunction",
    "evaluate",
    "format_number",
    "parse",
]


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets ``[start, end)`` into the UTF-8 input."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid span {self.start}..{self.end}")

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end}


# --- diagnostics -----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = tuple(expected)

    def to_dict(self) -> dict:
        return {
            "kind": type(self).__name__,
            "message": self.message,
            "span": self.span.to_dict(),
            "expected": list(self.expected),
        }


class ExprSyntaxError(ParseError):
    pass


class UnknownFunction(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class NonIntegerExponent(ParseError):
    pass


class EvaluationFailure(Exception):
    """An engine error raised while evaluating, tagged with the offending node."""

    def __init__(self, cause: Exception, span: SourceSpan):
        super().__init__(f"{type(cause).__name__}: {cause}")
        self.cause = cause
        self.span = span

    def to_dict(self) -> dict:
        return {"kind": type(self.cause).__name__, "message": str(self.cause), "span": self.span.to_dict(), "expected": []}


# --- tree ------------------------------------------------------------------------


def _num_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class Number:
    value: Fraction
    span: SourceSpan = field(compare=False)

    def sexpr(self) -> str:
        return _num_text(self.value)


@dataclass(frozen=True)
class Symbol:
    name: str
    span: SourceSpan = field(compare=False)

    def sexpr(self) -> str:
        return self.name


_OP_NAMES = {"+": "add", "-": "sub", "*": "mul", "/": "div", "^": "pow"}


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = field(compare=False)

    def sexpr(self) -> str:
        sep = "," if self.op == "^" else ", "
        return f"{_OP_NAMES[self.op]}({self.left.sexpr()}{sep}{self.right.sexpr()})"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: SourceSpan = field(compare=False)

    def sexpr(self) -> str:
        return f"neg({self.operand.sexpr()})"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    span: SourceSpan = field(compare=False)

    def sexpr(self) -> str:
        return f"call({', '.join([self.name, *(a.sexpr() for a in self.args)])})"


Expr = Union[Number, Symbol, BinOp, Neg, Call]

FUNCTIONS: dict[str, int] = {
    "st": 1, "tlh": 1, "exp": 1, "log": 1, "sin": 1, "cos": 1, "val": 1, "aeq": 2, "geq": 2,
}

# --- lexer -------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    span: SourceSpan


def _tokenize(src: str) -> list[_Token]:
    # spans are byte offsets, so keep a running char -> byte map
    offsets = [0]
    for ch in src:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))
    tokens, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            span = SourceSpan(offsets[pos], offsets[pos + 1])
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", span,
                                  ("number", "symbol", "function", "(", "-"))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), SourceSpan(offsets[m.start()], offsets[m.end()])))
        pos = m.end()
    end = offsets[-1]
    tokens.append(_Token("end", "", SourceSpan(end, end)))
    return tokens


# --- parser ------------------------------------------------------------------------

_ATOM_START = ("number", "symbol", "function", "(")
_MAX_FOLDED_EXPONENT = 4096


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text: str) -> _Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self._advance()
        got = repr(self.tok.text) if self.tok.kind != "end" else "end of input"
        raise ExprSyntaxError(f"expected {text!r}, found {got}", self.tok.span, (text,))

    def _at_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.span, ("+", "-", "*", "/", "^", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self._at_op("+", "-"):
            op = self._advance().text
            rhs = self.term()
            node = BinOp(op, node, rhs, SourceSpan(node.span.start, rhs.span.end))
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self._at_op("*", "/"):
            op = self._advance().text
            rhs = self.factor()
            node = BinOp(op, node, rhs, SourceSpan(node.span.start, rhs.span.end))
        return node

    def factor(self) -> Expr:
        base = self.unary()
        exps: list[tuple[int, SourceSpan]] = []
        while self._at_op("^"):
            self._advance()
            exps.append(self._int_exponent())
        if not exps:
            return base
        # fold the right-associative chain a^b^c into a^(b^c)
        value, span = exps[-1]
        for v, s in reversed(exps[:-1]):
            if value < 0:
                raise NonIntegerExponent(f"{v}^{value} is not an integer", SourceSpan(s.start, span.end), ("integer",))
            if abs(v) > 1 and value > _MAX_FOLDED_EXPONENT:
                raise ExprSyntaxError("exponent chain too large to fold", SourceSpan(s.start, span.end), ("integer",))
            value, span = v**value, SourceSpan(s.start, span.end)
        return BinOp("^", base, Number(Fraction(value), span), SourceSpan(base.span.start, span.end))

    def _int_exponent(self) -> tuple[int, SourceSpan]:
        start = self.tok.span.start
        sign = 1
        if self._at_op("-"):
            self._advance()
            sign = -1
        t = self.tok
        if t.kind == "num" and re.fullmatch(r"\d+", t.text):
            self._advance()
            return sign * int(t.text), SourceSpan(start, t.span.end)
        if t.kind == "end" or (t.kind == "op" and t.text not in "("):
            raise ExprSyntaxError("expected an integer exponent", t.span, ("integer",))
        # consume the offending operand so the span covers it
        bad = self.unary()
        raise NonIntegerExponent("exponents must be integer literals", SourceSpan(start, bad.span.end), ("integer",))

    def unary(self) -> Expr:
        if self._at_op("-"):
            t = self._advance()
            operand = self.atom()
            return Neg(operand, SourceSpan(t.span.start, operand.span.end))
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Number(Fraction(t.text), t.span)
        if t.kind == "name":
            self._advance()
            if self._at_op("("):
                return self._call(t)
            if t.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {t.text!r} needs arguments", self.tok.span, ("(",))
            return Symbol(t.text, t.span)
        if self._at_op("("):
            self._advance()
            inner = self.expr()
            self._expect(")")
            return inner
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"expected an operand, found {got}", t.span, _ATOM_START + ("-",))

    def _call(self, name_tok: _Token) -> Call:
        name = name_tok.text
        if name not in FUNCTIONS:
            raise UnknownFunction(f"unknown function {name!r}", name_tok.span, tuple(sorted(FUNCTIONS)))
        self._expect("(")
        args = []
        if not self._at_op(")"):
            args.append(self.expr())
            while self._at_op(","):
                self._advance()
                args.append(self.expr())
        close = self._expect(")")
        span = SourceSpan(name_tok.span.start, close.span.end)
        if len(args) != FUNCTIONS[name]:
            raise ArityMismatch(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", span,
                                (f"{FUNCTIONS[name]} argument(s)",))
        return Call(name, tuple(args), span)


def parse(src: str) -> Expr:
    """Parse one expression line.

    Raises
    ------
    ParseError
        One of :class:`ExprSyntaxError`, :class:`UnknownFunction`,
        :class:`ArityMismatch` or :class:`NonIntegerExponent`, each carrying a
        span and the list of expected tokens.
    """
    return _Parser(src).parse()


# --- evaluation ---------------------------------------------------------------------

Value = Union[LaurentNumber, bool]

_BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}


class _Evaluator:
    def __init__(self, truncation: int, mode: str, constants: Mapping[str, object] | None):
        if mode not in ("exact", "approx"):
            raise ValueError("mode must be 'exact' or 'approx'")
        self.T = truncation
        self.approx = mode == "approx"
        self.constants = dict(_BUILTIN_CONSTANTS)
        self.constants.update(constants or {})

    def number(self, c) -> LaurentNumber:
        if self.approx:
            c = float(c)
        return LaurentNumber.constant(c, self.T)

    def num(self, node: Expr) -> LaurentNumber:
        v = self.eval(node)
        if isinstance(v, bool):
            raise EvaluationFailure(TypeError("a truth value cannot be used as a number"), node.span)
        return v

    def eval(self, node: Expr) -> Value:
        try:
            return self._eval(node)
        except NonArchError as exc:
            raise EvaluationFailure(exc, node.span) from exc

    def _eval(self, node: Expr) -> Value:
        if isinstance(node, Number):
            return self.number(node.value)
        if isinstance(node, Symbol):
            name = node.name
            if name in ("eps", "dx"):
                return LaurentNumber.monomial(1.0 if self.approx else 1, 1, self.T)
            if name == "omega":
                return LaurentNumber.monomial(1.0 if self.approx else 1, -1, self.T)
            if name in self.constants:
                v = self.constants[name]
                return v.with_truncation(self.T) if isinstance(v, LaurentNumber) else self.number(v)
            raise EvaluationFailure(NameError(f"unknown symbol {name!r}"), node.span)
        if isinstance(node, Neg):
            return -self.num(node.operand)
        if isinstance(node, BinOp):
            lhs = self.num(node.left)
            if node.op == "^":
                return lhs ** int(node.right.value)
            rhs = self.num(node.right)
            if node.op == "+":
                return lhs + rhs
            if node.op == "-":
                return lhs - rhs
            if node.op == "*":
                return lhs * rhs
            try:
                return lhs / rhs
            except NonArchError as exc:
                raise EvaluationFailure(exc, node.right.span) from exc
        if isinstance(node, Call):
            return self._call(node)
        raise TypeError(f"not an expression node: {node!r}")

    def _call(self, node: Call) -> Value:
        args = [self.num(a) for a in node.args]
        try:
            return self._apply(node.name, args)
        except NonArchError as exc:
            # blame the argument, which is where the offending value lives
            span = node.args[0].span if len(node.args) == 1 else node.span
            raise EvaluationFailure(exc, span) from exc

    def _apply(self, name: str, args: list[LaurentNumber]) -> Value:
        x = args[0]
        if name == "st":
            return LaurentNumber.constant(shadow(x), self.T)
        if name == "tlh":
            return tlh_truncate(x)
        if name == "val":
            v = valuation(x)
            if v == math.inf:
                raise ZeroInput("zero has no valuation")
            return self.number(int(v))
        if name == "aeq":
            return eq_modal(x, args[1], "arithmetic")
        if name == "geq":
            return eq_modal(x, args[1], "geometric")
        return lift_smooth(name, x)


def evaluate(
    expr: Expr | str,
    truncation: int = DEFAULT_TRUNCATION,
    mode: str = "exact",
    constants: Mapping[str, object] | None = None,
) -> Value:
    """Evaluate a parsed (or raw) expression bottom-up.

    Returns a :class:`LaurentNumber`, or ``bool`` for ``aeq``/``geq``.
    Engine errors are re-raised as :class:`EvaluationFailure` carrying the
    span of the node responsible.
    """
    if isinstance(expr, str):
        expr = parse(expr)
    return _Evaluator(truncation, mode, constants).eval(expr)


def format_number(x: LaurentNumber | bool) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return format_laurent(x)
