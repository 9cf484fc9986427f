"""Shared generators and an untruncated reference arithmetic for the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from leibniz_euler.nonarch import LaurentNumber

# With valuations in [-2, 2], at most SPAN orders above the valuation and
# truncation T >= 8, no sum of three and no product of two generated numbers
# ever reaches the truncation limit, so the field axioms hold exactly.
PROP_T = 8
SPAN = 2
VAL_RANGE = (-2, 2)


def _uniform_int(rng: random.Random, lo: int, hi: int) -> int:
    # rng.randint is several times slower and dominates large batches
    return lo + int(rng.random() * (hi - lo + 1))


def _coef(rng: random.Random):
    if rng.random() < 0.3:
        return Fraction(_uniform_int(rng, -9, 9), _uniform_int(rng, 1, 6))
    return _uniform_int(rng, -5, 5)


def random_laurent(rng: random.Random, *, limited: bool = False, positive: bool = False,
                   nonzero: bool = True, T: int = PROP_T) -> LaurentNumber:
    lo = 0 if limited else VAL_RANGE[0]
    while True:
        v = _uniform_int(rng, lo, VAL_RANGE[1])
        terms = {v + j: _coef(rng) for j in range(SPAN + 1) if j == 0 or rng.random() < 0.6}
        x = LaurentNumber(terms, T)
        if nonzero and x.is_zero():
            continue
        if positive and x.sign() < 0:
            x = -x
        if positive and x.is_zero():
            continue
        return x


@st.composite
def laurent_numbers(draw, *, limited: bool = False, nonzero: bool = False, T: int = PROP_T):
    v = draw(st.integers(0 if limited else VAL_RANGE[0], VAL_RANGE[1]))
    coefs = draw(st.lists(
        st.one_of(st.integers(-20, 20), st.fractions(min_value=-10, max_value=10, max_denominator=12)),
        min_size=1, max_size=SPAN + 1,
    ))
    x = LaurentNumber({v + j: c for j, c in enumerate(coefs)}, T)
    if nonzero and x.is_zero():
        x = LaurentNumber({v: 1}, T)
    return x


# --- reference arithmetic: plain dicts, no truncation -----------------------------


def as_dict(x: LaurentNumber) -> dict[int, Fraction]:
    return {q: Fraction(c) for q, c in x.terms}


def ref_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for q, c in b.items():
        out[q] = out.get(q, 0) + sign * c
    return {q: c for q, c in out.items() if c != 0}


def ref_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for qa, ca in a.items():
        for qb, cb in b.items():
            out[qa + qb] = out.get(qa + qb, 0) + ca * cb
    return {q: c for q, c in out.items() if c != 0}


def ref_window(d: dict, T: int) -> tuple:
    """The terms a truncated result must hold: orders up to lead + T."""
    if not d:
        return ()
    lead = min(d)
    return tuple(sorted((q, c) for q, c in d.items() if q <= lead + T))


def terms_equal(x: LaurentNumber, ref: tuple) -> bool:
    return tuple((q, Fraction(c)) for q, c in x.terms) == tuple((q, Fraction(c)) for q, c in ref)
