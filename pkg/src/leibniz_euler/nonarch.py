"""Truncated Laurent series in one positive infinitesimal ``eps``.

A :class:`LaurentNumber` is a finite sum ``sum c_q * eps**q`` over integer
orders ``q``.  Ordering is lexicographic: the sign of the lowest-order
coefficient decides, so ``eps`` is positive and smaller than every positive
rational, while ``omega = 1/eps`` exceeds every rational.

Only the ``truncation + 1`` lowest orders starting at the valuation are kept.
Two numbers agreeing on all retained orders are equal; that is the resolution
of the model.

Coefficients are either exact (``int`` or :class:`fractions.Fraction`) or
approximate (``float``).  Mixing the two promotes the whole number to floats.
In approximate mode a coefficient produced by cancellation is treated as zero
when it is below ``APPROX_SLACK`` times the magnitude of the contributions.
"""

from __future__ import annotations

import enum
import math
import numbers
from fractions import Fraction
from typing import Callable, Mapping, Union

from .errors import (
    DivisionByZero,
    DomainError,
    GeometricZeroDenominator,
    NonFiniteCoefficient,
    NonpositiveInput,
    TruncationUnderflow,
    UnlimitedInput,
    ZeroInput,
)

__all__ = [
    "APPROX_SLACK",
    "DEFAULT_TRUNCATION",
    "Coefficient",
    "EqualityModality",
    "LaurentNumber",
    "Ordering",
    "compare",
    "eps",
    "eq_modal",
    "field_arith",
    "is_archimedean_pair",
    "lift_smooth",
    "omega",
    "shadow",
    "tlh_truncate",
    "valuation",
]

DEFAULT_TRUNCATION = 16
APPROX_SLACK = 1e-12
# leading orders beyond this magnitude raise TruncationUnderflow
MAX_ORDER = 100_000

Coefficient = Union[int, Fraction, float]


_PLAIN_COEFFICIENTS = (int, Fraction)


def _coerce_coefficient(c) -> Coefficient:
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, (int, Fraction, float)):
        value = c
    elif isinstance(c, numbers.Integral):
        value = int(c)
    elif isinstance(c, numbers.Rational):
        value = Fraction(c.numerator, c.denominator)
    elif isinstance(c, numbers.Real):
        value = float(c)
    else:
        raise TypeError(f"unsupported coefficient type {type(c).__name__}")
    if isinstance(value, float) and not math.isfinite(value):
        raise NonFiniteCoefficient(f"non-finite coefficient {value!r}")
    return value


def _as_float(c: Coefficient) -> float:
    value = float(c)
    if not math.isfinite(value):
        raise NonFiniteCoefficient(f"non-finite coefficient {value!r}")
    return value


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class EqualityModality(enum.Enum):
    """Three ways of declaring two quantities equal.

    ``ARITHMETIC``: the difference is infinitesimal (or zero).
    ``GEOMETRIC``: the ratio is limited and infinitely close to 1.
    ``EXACT``: identical retained terms.
    """

    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    EXACT = "exact"


class LaurentNumber:
    """Element of the truncated Laurent field in ``eps``.

    Parameters
    ----------
    terms
        Mapping ``order -> coefficient`` or iterable of ``(order, coefficient)``
        pairs.  Repeated orders are summed, zero coefficients dropped.
    truncation
        Number of orders kept above the valuation.
    exact
        Force the exactness kind.  ``False`` converts every coefficient to
        float; ``None`` infers it from the coefficients.
    """

    __slots__ = ("_terms", "_trunc", "_exact", "_int_form")

    def __init__(self, terms=(), truncation: int = DEFAULT_TRUNCATION, exact: bool | None = None):
        if truncation < 0:
            raise ValueError("truncation must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Coefficient] = {}
        for q, c in items:
            if type(q) is not int:
                if isinstance(q, bool) or int(q) != q:
                    raise TypeError("orders must be integers")
                q = int(q)
            if type(c) not in _PLAIN_COEFFICIENTS:
                c = _coerce_coefficient(c)
            elif type(c) is Fraction:
                c = _norm(c)
            acc[q] = acc[q] + c if q in acc else c
        inferred = not any(isinstance(c, float) for c in acc.values())
        if exact is None:
            exact = inferred
        elif exact and not inferred:
            raise TypeError("float coefficients cannot form an exact number")
        if not exact:
            acc = {q: _as_float(c) for q, c in acc.items()}
        pairs = sorted((q, c) for q, c in acc.items() if c != 0)
        self._set(_truncate(pairs, truncation), truncation, exact)

    def _set(self, terms, trunc, exact):
        self._terms = tuple(terms)
        self._trunc = trunc
        self._exact = exact
        self._int_form = None

    @classmethod
    def _raw(cls, terms, trunc: int, exact: bool) -> LaurentNumber:
        obj = cls.__new__(cls)
        obj._set(terms, trunc, exact)
        return obj

    @classmethod
    def constant(cls, c, truncation: int = DEFAULT_TRUNCATION) -> LaurentNumber:
        return cls({0: c}, truncation)

    @classmethod
    def monomial(cls, c, order: int, truncation: int = DEFAULT_TRUNCATION) -> LaurentNumber:
        return cls({order: c}, truncation)

    # --- inspection -------------------------------------------------------

    @property
    def terms(self) -> tuple[tuple[int, Coefficient], ...]:
        """Retained ``(order, coefficient)`` pairs in increasing order."""
        return self._terms

    @property
    def truncation(self) -> int:
        return self._trunc

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def valuation(self) -> int | float:
        """Lowest order present; ``math.inf`` for zero."""
        return self._terms[0][0] if self._terms else math.inf

    def coefficient(self, order: int) -> Coefficient:
        for q, c in self._terms:
            if q == order:
                return c
        return 0 if self._exact else 0.0

    def is_zero(self) -> bool:
        return not self._terms

    def is_limited(self) -> bool:
        return self.valuation >= 0

    def is_infinitesimal(self) -> bool:
        return self.valuation > 0

    def approx(self) -> LaurentNumber:
        """Same number with float coefficients."""
        if not self._exact:
            return self
        return LaurentNumber._raw(
            [(q, _as_float(c)) for q, c in self._terms], self._trunc, False
        )

    def with_truncation(self, truncation: int) -> LaurentNumber:
        return LaurentNumber._raw(_truncate(self._terms, truncation), truncation, self._exact)

    # --- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> LaurentNumber | None:
        if isinstance(other, LaurentNumber):
            return other
        if type(other) in _PLAIN_COEFFICIENTS:
            return LaurentNumber._raw(((0, _norm(other)),) if other else (), self._trunc, True)
        if isinstance(other, numbers.Real):
            return LaurentNumber({0: other}, self._trunc)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _add(self, other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _add(self, other, -1)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _add(other, self, -1)

    def __neg__(self):
        return LaurentNumber._raw([(q, -c) for q, c in self._terms], self._trunc, self._exact)

    def __pos__(self):
        return self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, _inverse(other))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other._terms == ((0, 1),) and other._trunc >= self._trunc:
            return _inverse(self)
        return _mul(other, _inverse(self))

    def __pow__(self, exponent):
        if isinstance(exponent, bool) or not isinstance(exponent, numbers.Integral):
            return NotImplemented
        return _int_pow(self, int(exponent))

    def reciprocal(self) -> LaurentNumber:
        return _inverse(self)

    # --- ordering ---------------------------------------------------------

    def sign(self) -> int:
        if not self._terms:
            return 0
        return 1 if self._terms[0][1] > 0 else -1

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is None:
            raise TypeError(f"cannot compare LaurentNumber with {type(other).__name__}")
        if self._exact and other._exact:
            return _exact_cmp(self._terms, other._terms)
        return (self - other).sign()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self._exact and other._exact:
            return self._terms == other._terms
        return (self - other).is_zero()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if len(self._terms) == 1 and self._terms[0][0] == 0:
            return hash(self._terms[0][1])
        if not self._terms:
            return hash(0)
        return hash(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"LaurentNumber({dict(self._terms)!r}, truncation={self._trunc})"

    def __str__(self):
        return format_laurent(self)


def _truncate(pairs, truncation: int):
    if not pairs:
        return pairs
    lead = pairs[0][0]
    if abs(lead) > MAX_ORDER:
        raise TruncationUnderflow(f"leading order {lead} outside [-{MAX_ORDER}, {MAX_ORDER}]")
    limit = lead + truncation
    if pairs[-1][0] <= limit:
        return pairs
    return [p for p in pairs if p[0] <= limit]


def _exact_cmp(a_terms, b_terms) -> int:
    """Sign of ``a - b`` read off the first order where the terms differ."""
    i = j = 0
    na, nb = len(a_terms), len(b_terms)
    while i < na or j < nb:
        qa = a_terms[i][0] if i < na else math.inf
        qb = b_terms[j][0] if j < nb else math.inf
        if qa < qb:
            return 1 if a_terms[i][1] > 0 else -1
        if qb < qa:
            return -1 if b_terms[j][1] > 0 else 1
        ca, cb = a_terms[i][1], b_terms[j][1]
        if ca != cb:
            return 1 if ca > cb else -1
        i += 1
        j += 1
    return 0


def _norm(c):
    # integral Fractions fall back to int, whose arithmetic is much cheaper
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _ratio(n: int, d: int):
    # n/d in lowest terms, as an int when d divides n
    if d < 0:
        n, d = -n, -d
    g = math.gcd(n, d)
    if g == d:
        return n // d
    return Fraction(n // g, d // g)


def _scaled(x: LaurentNumber):
    """Integer numerators over the least common denominator of an exact ``x``."""
    if x._int_form is None:
        x._int_form = _scaled_terms(x._terms)
    return x._int_form


def _scaled_terms(terms):
    den = 1
    for _, c in terms:
        if type(c) is not int:
            d = c.denominator
            den = den * d // math.gcd(den, d)
    if den == 1:
        return terms, 1
    return [(q, c * den if type(c) is int else c.numerator * (den // c.denominator)) for q, c in terms], den


def _add(a: LaurentNumber, b: LaurentNumber, sign: int) -> LaurentNumber:
    trunc = min(a._trunc, b._trunc)
    exact = a._exact and b._exact
    if exact:
        # integer sums over a common denominator, as in _mul
        na, la = _scaled(a)
        nb, lb = _scaled(b)
        den = la * lb // math.gcd(la, lb)
        fa, fb = den // la, sign * (den // lb)
        acc = {q: c * fa for q, c in na}
        for q, c in nb:
            acc[q] = acc[q] + c * fb if q in acc else c * fb
        if den == 1:
            pairs = [(q, c) for q, c in sorted(acc.items()) if c != 0]
        else:
            pairs = [(q, _ratio(c, den)) for q, c in sorted(acc.items()) if c != 0]
    else:
        acc = {q: float(c) for q, c in a._terms}
        scale = {q: abs(c) for q, c in acc.items()}
        for q, c in b._terms:
            c = sign * float(c)
            acc[q] = acc.get(q, 0.0) + c
            scale[q] = max(scale.get(q, 0.0), abs(c))
        pairs = []
        for q in sorted(acc):
            c = acc[q]
            if not math.isfinite(c):
                raise NonFiniteCoefficient(f"non-finite coefficient at order {q}")
            if abs(c) > APPROX_SLACK * scale[q]:
                pairs.append((q, c))
    return LaurentNumber._raw(_truncate(pairs, trunc), trunc, exact)


def _mul(a: LaurentNumber, b: LaurentNumber) -> LaurentNumber:
    trunc = min(a._trunc, b._trunc)
    exact = a._exact and b._exact
    if not a._terms or not b._terms:
        return LaurentNumber._raw((), trunc, exact)
    limit = a._terms[0][0] + b._terms[0][0] + trunc
    acc: dict[int, Coefficient] = {}
    if exact:
        # integer convolution over a common denominator, normalised once per order
        na, la = _scaled(a)
        nb, lb = _scaled(b)
        for qa, ca in na:
            for qb, cb in nb:
                q = qa + qb
                if q > limit:
                    break
                p = ca * cb
                acc[q] = acc[q] + p if q in acc else p
        den = la * lb
        if den == 1:
            pairs = [(q, c) for q, c in sorted(acc.items()) if c != 0]
        else:
            pairs = [(q, _ratio(c, den)) for q, c in sorted(acc.items()) if c != 0]
    else:
        scale: dict[int, float] = {}
        for qa, ca in a._terms:
            ca = float(ca)
            for qb, cb in b._terms:
                q = qa + qb
                if q > limit:
                    break
                p = ca * float(cb)
                acc[q] = acc.get(q, 0.0) + p
                scale[q] = scale.get(q, 0.0) + abs(p)
        pairs = []
        for q in sorted(acc):
            c = acc[q]
            if not math.isfinite(c):
                raise NonFiniteCoefficient(f"non-finite coefficient at order {q}")
            if abs(c) > APPROX_SLACK * scale[q]:
                pairs.append((q, c))
    return LaurentNumber._raw(_truncate(pairs, trunc), trunc, exact)


def _inverse(b: LaurentNumber) -> LaurentNumber:
    """Reciprocal by inverting the leading term and summing the geometric series.

    With ``b = c0 * eps**v * (1 + u)`` the reciprocal is
    ``eps**-v / c0 * sum_j (-u)**j``; the coefficients of that series are
    produced by the equivalent recurrence ``d_m = -(1/c0) sum_j c_j d_{m-j}``.
    """
    if not b._terms:
        raise DivisionByZero("division by a number with no retained terms")
    trunc = b._trunc
    v, c0 = b._terms[0]
    if b._exact:
        return LaurentNumber._raw(_exact_reciprocal(b, trunc), trunc, True)
    rel = {q - v: float(c) for q, c in b._terms}
    inv0 = 1.0 / float(c0)
    d = [inv0]
    for m in range(1, trunc + 1):
        s = 0.0
        for j in range(1, m + 1):
            cj = rel.get(j)
            if cj is not None:
                s += cj * d[m - j]
        d.append(-inv0 * s)
    pairs = []
    for m, c in enumerate(d):
        if not math.isfinite(c):
            raise NonFiniteCoefficient("non-finite coefficient in reciprocal")
        if c != 0.0:
            pairs.append((m - v, c))
    return LaurentNumber._raw(_truncate(pairs, trunc), trunc, False)


def _exact_reciprocal(b: LaurentNumber, trunc: int):
    # With integer numerators n_j over a common denominator L,
    # d_m = L * E_m / n0**(m+1) where E_0 = 1, E_m = -sum_j n_j n0**(j-1) E_(m-j),
    # so the recurrence runs in ints and each output is normalised once.
    scaled, L = _scaled(b)
    v, n0 = scaled[0]
    tail = [(q - v, nq) for q, nq in scaled[1:]]
    E = [1]
    n0_pows = [1]
    for m in range(1, trunc + 1):
        n0_pows.append(n0_pows[-1] * n0)
        s = 0
        for j, nj in tail:
            if j > m:
                break
            s += nj * n0_pows[j - 1] * E[m - j]
        E.append(-s)
    pairs = []
    for m, e in enumerate(E):
        if e:
            pairs.append((m - v, _ratio(L * e, n0_pows[m] * n0)))
    return pairs


def _int_pow(x: LaurentNumber, n: int) -> LaurentNumber:
    if n < 0:
        if x.is_zero():
            raise DivisionByZero("zero raised to a negative power")
        return _int_pow(_inverse(x), -n)
    result = LaurentNumber._raw(((0, 1 if x._exact else 1.0),), x._trunc, x._exact)
    base = x
    while n:
        if n & 1:
            result = _mul(result, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return result


def _as_laurent(x, truncation: int = DEFAULT_TRUNCATION) -> LaurentNumber:
    if isinstance(x, LaurentNumber):
        return x
    return LaurentNumber({0: x}, truncation)


# --- named constructors -----------------------------------------------------


def eps(truncation: int = DEFAULT_TRUNCATION) -> LaurentNumber:
    """The positive infinitesimal generator (Leibniz's ``dx``)."""
    return LaurentNumber({1: 1}, truncation)


def omega(truncation: int = DEFAULT_TRUNCATION) -> LaurentNumber:
    """The infinite number ``1/eps``."""
    return LaurentNumber({-1: 1}, truncation)


# --- operations -------------------------------------------------------------

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def field_arith(lhs, op: str, rhs) -> LaurentNumber:
    """Apply one of ``add``, ``sub``, ``mul``, ``div``, ``int_pow``."""
    lhs = _as_laurent(lhs)
    if op == "int_pow":
        if isinstance(rhs, bool) or not isinstance(rhs, numbers.Integral):
            raise TypeError("int_pow needs an integer exponent")
        return _int_pow(lhs, int(rhs))
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(lhs, _as_laurent(rhs, lhs.truncation))


def valuation(x) -> int | float:
    return _as_laurent(x).valuation


def compare(lhs, rhs) -> Ordering:
    lhs = _as_laurent(lhs)
    return Ordering((lhs - rhs).sign())


def shadow(x) -> Coefficient:
    """Standard part of a limited number: its order-0 coefficient."""
    x = _as_laurent(x)
    if x.valuation < 0:
        raise UnlimitedInput(f"number with valuation {x.valuation} is infinite and has no shadow")
    return x.coefficient(0)


def tlh_truncate(x) -> LaurentNumber:
    """Keep only the dominant (lowest-order) term, e.g. ``a + dx -> a``."""
    x = _as_laurent(x)
    if x.is_zero():
        raise ZeroInput("zero has no dominant order")
    return LaurentNumber._raw(x.terms[:1], x.truncation, x.exact)


def _shadow_is_one(c: Coefficient, exact: bool) -> bool:
    if exact:
        return c == 1
    return abs(float(c) - 1.0) <= APPROX_SLACK


def eq_modal(lhs, rhs, modality: EqualityModality | str) -> bool:
    modality = EqualityModality(modality)
    lhs = _as_laurent(lhs)
    rhs = _as_laurent(rhs, lhs.truncation)
    if modality is EqualityModality.EXACT:
        return lhs.exact == rhs.exact and lhs.terms == rhs.terms
    if modality is EqualityModality.ARITHMETIC:
        return (lhs - rhs).valuation > 0
    if rhs.is_zero():
        raise GeometricZeroDenominator("geometric comparison against zero")
    if lhs.exact and rhs.exact:
        # the ratio has shadow 1 exactly when the leading terms coincide
        return not lhs.is_zero() and lhs.terms[0] == rhs.terms[0]
    ratio = lhs / rhs
    if not ratio.is_limited():
        return False
    return _shadow_is_one(ratio.coefficient(0), ratio.exact)


def is_archimedean_pair(x, y) -> tuple[bool, int | None]:
    """Decide whether some finite multiple ``n*x`` exceeds ``y``.

    Returns ``(True, least n)`` or ``(False, None)`` when ``x`` is
    infinitesimal relative to ``y``.
    """
    x = _as_laurent(x)
    y = _as_laurent(y, x.truncation)
    if x.sign() <= 0 or y.sign() <= 0:
        raise NonpositiveInput("both arguments must be positive")
    vx, vy = x.valuation, y.valuation
    if vx > vy:
        return False, None
    if vx < vy:
        return True, 1
    ratio = y.terms[0][1] / x.terms[0][1]
    n = max(1, math.floor(ratio))
    while not n * x > y:
        n += 1
    return True, n


# --- smooth functions -------------------------------------------------------


def _taylor_exp(x0, exact: bool, count: int):
    if exact and x0 == 0:
        out, fact = [], 1
        for n in range(count):
            if n:
                fact *= n
            out.append(Fraction(1, fact))
        return out
    e = math.exp(float(x0))
    return [e / math.factorial(n) for n in range(count)]


def _taylor_log(x0, exact: bool, count: int):
    if x0 <= 0:
        raise DomainError("log needs a positive shadow")
    if exact:
        a0 = 0 if x0 == 1 else math.log(x0)
        x0 = Fraction(x0)
        return [a0] + [Fraction((-1) ** (n + 1), n) / x0**n for n in range(1, count)]
    x0 = float(x0)
    return [math.log(x0)] + [(-1) ** (n + 1) / (n * x0**n) for n in range(1, count)]


def _taylor_trig(x0, exact: bool, count: int, phase: int):
    # phase 0: sin, phase 1: cos; derivative n is sin(x0 + (n + phase) * pi/2)
    if exact and x0 == 0:
        cycle = [0, 1, 0, -1]
    else:
        s, c = math.sin(float(x0)), math.cos(float(x0))
        cycle = [s, c, -s, -c]
    out, fact = [], 1
    for n in range(count):
        if n:
            fact *= n
        v = cycle[(n + phase) % 4]
        out.append(Fraction(v, fact) if isinstance(v, int) else v / fact)
    return out


def _taylor_pow(x0, exact: bool, count: int, p):
    if x0 <= 0:
        raise DomainError("real power needs a positive shadow")
    if exact and x0 == 1 and isinstance(p, (int, Fraction)):
        out, binom = [], Fraction(1)
        for n in range(count):
            out.append(binom)
            binom = binom * (p - n) / (n + 1)
        return out
    x0, p = float(x0), float(p)
    out, binom = [], 1.0
    for n in range(count):
        out.append(binom * x0 ** (p - n))
        binom = binom * (p - n) / (n + 1)
    return out


_SMOOTH: dict[str, Callable] = {
    "exp": _taylor_exp,
    "log": _taylor_log,
    "sin": lambda x0, exact, count: _taylor_trig(x0, exact, count, 0),
    "cos": lambda x0, exact, count: _taylor_trig(x0, exact, count, 1),
}


def lift_smooth(f: str, x, exponent=None) -> LaurentNumber:
    """Extend ``exp``, ``log``, ``sin``, ``cos`` or ``pow`` to limited numbers.

    ``f(x0 + d) = sum_n f^(n)(x0)/n! * d**n`` where ``x0`` is the shadow of
    ``x`` and ``d`` the infinitesimal remainder.  The sum stops once further
    powers of ``d`` fall outside the truncation window.  ``pow`` needs
    ``exponent``; an integer exponent is handled by field multiplication.
    """
    x = _as_laurent(x)
    if x.valuation < 0:
        raise UnlimitedInput(f"{f} of an infinite number")
    if f == "pow":
        if exponent is None:
            raise TypeError("pow needs an exponent")
        if isinstance(exponent, numbers.Integral) and not isinstance(exponent, bool):
            return _int_pow(x, int(exponent))
        coeffs_for = lambda x0, exact, count: _taylor_pow(x0, exact, count, exponent)  # noqa: E731
    else:
        try:
            coeffs_for = _SMOOTH[f]
        except KeyError:
            raise ValueError(f"unknown smooth function {f!r}") from None
    x0 = shadow(x)
    delta = x - x0
    trunc = x.truncation
    if delta.is_zero():
        return LaurentNumber({0: coeffs_for(x0, x.exact, 1)[0]}, trunc)
    dv = delta.valuation
    # enough powers to fill the window even if a few leading coefficients vanish
    count = trunc // dv + 4
    coeffs = coeffs_for(x0, x.exact, count)
    lead = next((n for n, c in enumerate(coeffs) if c != 0), count)
    if lead + trunc // dv + 1 > count:
        count = lead + trunc // dv + 1
        coeffs = coeffs_for(x0, x.exact, count)
    power = LaurentNumber._raw(((0, 1),), trunc, delta.exact)
    total = None
    window = lead * dv + trunc
    for n, c in enumerate(coeffs):
        if n:
            power = _mul(power, delta)
        if n * dv > window:
            break
        if c == 0:
            continue
        term = power * c
        total = term if total is None else total + term
    if total is None:
        return LaurentNumber((), trunc, exact=x.exact)
    return total.with_truncation(trunc)


# --- formatting --------------------------------------------------------------


def _coef_text(c: Coefficient) -> str:
    if isinstance(c, float):
        return repr(c)
    if isinstance(c, Fraction) and c.denominator != 1:
        return f"{c.numerator}/{c.denominator}"
    return str(int(c))


def _monomial(q: int) -> str:
    if q == 1:
        return "eps"
    if q > 1:
        return f"eps^{q}"
    if q == -1:
        return "omega"
    return f"omega^{-q}"


def format_laurent(x: LaurentNumber) -> str:
    """Canonical ascending-order text, e.g. ``2*omega + 3 - 1/2*eps^2``."""
    if x.is_zero():
        return "0" if x.exact else "0.0"
    parts = []
    for i, (q, c) in enumerate(x.terms):
        negative = c < 0
        mag = -c if negative else c
        if q == 0:
            body = _coef_text(mag)
        elif mag == 1:
            body = _monomial(q)
            if i == 0 and negative and abs(q) > 1:
                # a leading "-eps^2" would parse as (-eps)^2
                body = f"1*{body}"
        else:
            body = f"{_coef_text(mag)}*{_monomial(q)}"
        if i == 0:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f" - {body}" if negative else f" + {body}")
    return "".join(parts)
