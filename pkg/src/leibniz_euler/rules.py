"""Named term rules and the restricted inline rule syntax used by the CLI.

Inline rules are monomials ``c1*k^a/(c2*N^b)``: a product of numbers and
powers of ``k`` (the running index) and ``N`` (the infinite index) over an
optional denominator of the same shape.  Parentheses around the denominator
are optional; ``1/k^2``, ``k^-2`` and ``3*k/(2*N^2)`` are all accepted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

__all__ = ["CATALOG", "INTEGRANDS", "Integrand", "TermRule", "integrand", "parse_inline_rule", "term_rule"]


@dataclass(frozen=True)
class TermRule:
    """A term ``a(k, N)``; for products the factor is ``1 + a(k, N)``.

    ``float_rule`` accepts numpy arrays in ``k``; ``exact_rule`` (optional)
    returns rationals for rational inputs.
    """

    name: str
    description: str
    float_rule: Callable
    exact_rule: Callable | None = None
    uses_n: bool = False
    default_kind: str = "sum"

    def __call__(self, k, n=None):
        return self.float_rule(k, n)

    def frozen(self, n: int | None) -> Callable:
        """One-argument rule with ``N`` fixed, as E-convergence expects."""
        return lambda k: self.float_rule(k, n)

    def exact(self, k, n=None):
        if self.exact_rule is None:
            raise ValueError(f"rule {self.name!r} has no exact form")
        return self.exact_rule(k, n)


def _sine_factor(x: float) -> TermRule:
    c = x * x / (math.pi * math.pi)
    return TermRule(
        "sine-factor",
        f"-x^2/(k^2 pi^2) with x={x!r}; the product of 1 + a_k gives sin(x)/x",
        lambda k, n: -c / (np.asarray(k, dtype=float) ** 2),
        default_kind="product",
    )


CATALOG: dict[str, TermRule] = {
    "harmonic": TermRule(
        "harmonic", "1/k", lambda k, n: 1.0 / np.asarray(k, dtype=float), lambda k, n: Fraction(1, k),
    ),
    "inverse-square": TermRule(
        "inverse-square", "1/k^2", lambda k, n: 1.0 / np.asarray(k, dtype=float) ** 2, lambda k, n: Fraction(1, k * k),
    ),
    "geometric": TermRule(
        "geometric", "2^-k", lambda k, n: np.exp2(-np.asarray(k, dtype=float)), lambda k, n: Fraction(1, 2**k),
    ),
    "wallis-pair": TermRule(
        "wallis-pair",
        "1/(4k^2 - 1); the product of 1 + a_k is the Wallis product",
        lambda k, n: 1.0 / (4 * np.asarray(k, dtype=float) ** 2 - 1),
        lambda k, n: Fraction(1, 4 * k * k - 1),
        default_kind="product",
    ),
    "sine-factor": _sine_factor(1.0),
}

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_POWER = re.compile(r"([kN])(?:\^\(?([+-]?\d+)\)?)?")


def _parse_monomial(text: str, rule: str) -> tuple[Fraction, int, int]:
    coef, a, b = Fraction(1), 0, 0
    for part in text.split("*"):
        if not part:
            raise ValueError(f"malformed inline rule {rule!r}")
        m = _POWER.fullmatch(part)
        if m:
            e = int(m.group(2)) if m.group(2) else 1
            if m.group(1) == "k":
                a += e
            else:
                b += e
        elif _NUMBER.fullmatch(part):
            coef *= Fraction(part)
        else:
            raise ValueError(f"cannot read {part!r} in inline rule {rule!r}; expected a number, k^a or N^b")
    return coef, a, b


def parse_inline_rule(text: str) -> TermRule:
    """Read ``c1*k^a/(c2*N^b)`` into a :class:`TermRule` with an exact form."""
    src = re.sub(r"\s+", "", text)
    if not src:
        raise ValueError("empty inline rule")
    num_text, sep, den_text = src.partition("/")
    if "/" in den_text:
        raise ValueError(f"inline rule {text!r} has more than one '/'")
    c, a, b = _parse_monomial(num_text, text)
    if sep:
        if den_text.startswith("(") and den_text.endswith(")"):
            den_text = den_text[1:-1]
        if "(" in den_text or ")" in den_text:
            raise ValueError(f"unbalanced parentheses in inline rule {text!r}")
        c2, a2, b2 = _parse_monomial(den_text, text)
        if c2 == 0:
            raise ValueError(f"zero denominator in inline rule {text!r}")
        c, a, b = c / c2, a - a2, b - b2
    # the rule is c * k^a * N^b with all signs folded in
    cf = float(c)

    def float_rule(k, n):
        if b and n is None:
            raise ValueError(f"rule {text!r} depends on N, which is not fixed here")
        out = cf * np.asarray(k, dtype=float) ** a
        return out * float(n) ** b if b else out

    def exact_rule(k, n):
        if b and n is None:
            raise ValueError(f"rule {text!r} depends on N, which is not fixed here")
        out = c * Fraction(k) ** a
        return out * Fraction(n) ** b if b else out

    return TermRule(text, f"{c}*k^{a}*N^{b}", float_rule, exact_rule, uses_n=bool(b))


def term_rule(spec: str, *, x: float | None = None) -> TermRule:
    """A catalog rule by name, or an inline rational rule."""
    if spec == "sine-factor" and x is not None:
        return _sine_factor(float(x))
    if spec in CATALOG:
        return CATALOG[spec]
    try:
        return parse_inline_rule(spec)
    except ValueError as exc:
        raise ValueError(f"{exc}; known rules: {', '.join(CATALOG)}") from None


# --- integrands ------------------------------------------------------------------


@dataclass(frozen=True)
class Integrand:
    name: str
    f: Callable
    exact_ok: bool


INTEGRANDS: dict[str, Integrand] = {
    "exp": Integrand("exp", np.exp, False),
    "sin": Integrand("sin", np.sin, False),
    "cos": Integrand("cos", np.cos, False),
    "inverse": Integrand("inverse", lambda x: 1 / (1 + x), True),
}

_X_POWER = re.compile(r"(?:([+-]?(?:\d+\.?\d*|\.\d+)(?:/\d+)?)\*)?x(?:\^(\d+))?")


def integrand(spec: str) -> Integrand:
    """Named integrand, or a monomial ``c*x^m`` (rational ``c``, ``m >= 0``)."""
    spec = spec.strip()
    if spec in INTEGRANDS:
        return INTEGRANDS[spec]
    m = _X_POWER.fullmatch(spec.replace(" ", ""))
    if not m:
        raise ValueError(f"unknown integrand {spec!r}; use c*x^m or one of {', '.join(INTEGRANDS)}")
    c = Fraction(m.group(1)) if m.group(1) else Fraction(1)
    p = int(m.group(2)) if m.group(2) else 1
    cf = float(c)

    def f(x):
        if isinstance(x, Fraction):
            return c * x**p
        return cf * np.asarray(x, dtype=float) ** p if isinstance(x, np.ndarray) else cf * float(x) ** p

    return Integrand(spec, f, True)
