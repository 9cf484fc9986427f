from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helpers import PROP_T, as_dict, laurent_numbers, ref_add, ref_mul, ref_window, terms_equal
from leibniz_euler.errors import (
    DivisionByZero,
    DomainError,
    GeometricZeroDenominator,
    NonFiniteCoefficient,
    NonpositiveInput,
    TruncationUnderflow,
    UnlimitedInput,
    ZeroInput,
)
from leibniz_euler.nonarch import (
    LaurentNumber,
    Ordering,
    compare,
    eps,
    eq_modal,
    field_arith,
    format_laurent,
    is_archimedean_pair,
    lift_smooth,
    omega,
    shadow,
    tlh_truncate,
    valuation,
)

E = eps()
W = omega()


def L(terms, T=16):
    return LaurentNumber(terms, T)


# --- construction and invariants -----------------------------------------------


def test_zero_has_no_terms_and_infinite_valuation():
    z = L({0: 0, 3: 0})
    assert z.terms == ()
    assert valuation(z) == math.inf
    assert z.is_zero()


def test_terms_sorted_nonzero_and_truncated():
    x = L({5: 1, 0: 2, 3: 0, 40: 7}, T=16)
    assert x.terms == ((0, 2), (5, 1))


def test_mixing_promotes_to_approximate():
    x = L({0: Fraction(1, 3)}) + L({1: 0.5})
    assert not x.exact
    assert isinstance(x.coefficient(0), float)


def test_exact_stays_exact():
    x = (L({0: Fraction(1, 3)}) + E) * 3
    assert x.exact
    assert x.coefficient(0) == 1 and x.coefficient(1) == 3


def test_nonfinite_coefficients_rejected():
    with pytest.raises(NonFiniteCoefficient):
        L({0: math.inf})
    with pytest.raises(NonFiniteCoefficient):
        L({0: 1e308}) * L({0: 1e308})


def test_truncation_underflow():
    with pytest.raises(TruncationUnderflow):
        E ** 200_000


# --- field arithmetic examples ---------------------------------------------------


def test_difference_of_squares():
    assert format_laurent((1 + E) * (1 - E)) == "1 - eps^2"


def test_omega_times_eps_is_one():
    assert (W * E).terms == ((0, 1),)


def test_geometric_series_reciprocal():
    r = 1 / (1 - eps(3))
    assert r.terms == ((0, 1), (1, 1), (2, 1), (3, 1))
    # oracle: multiplying back gives 1 within the window
    assert ((1 - eps(3)) * r).terms == ((0, 1),)


def test_field_arith_dispatch():
    assert field_arith(E, "add", 1) == 1 + E
    assert field_arith(E, "sub", E).is_zero()
    assert field_arith(2 * E, "div", E) == 2
    assert field_arith(1 + E, "int_pow", 2) == 1 + 2 * E + E * E
    assert field_arith(E, "int_pow", -2) == W * W
    with pytest.raises(ValueError):
        field_arith(E, "mod", 2)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        E / (E - E)
    with pytest.raises(DivisionByZero):
        L({}) ** -1
    with pytest.raises(ZeroDivisionError):
        1 / L({})


def test_division_by_infinitesimal_gives_infinite():
    x = (1 + E) / E
    assert x.terms == ((-1, 1), (0, 1))
    assert not x.is_limited()


# --- ordering ----------------------------------------------------------------------


@pytest.mark.parametrize("lhs, rhs, want", [
    (E, 0, Ordering.GREATER),
    (E, Fraction(1, 10**6), Ordering.LESS),
    (W, 10**9, Ordering.GREATER),
    (-E, 0, Ordering.LESS),
    (1 + E, 1 + E, Ordering.EQUAL),
    (3 + 7 * E, 3, Ordering.GREATER),
])
def test_compare_examples(lhs, rhs, want):
    assert compare(lhs, rhs) is want


def test_comparison_operators_and_scalars():
    assert 0 < E < 1e-300
    assert W > 1e300
    assert -W < -1e300
    assert sorted([W, 1, E, 0, -E]) == [-E, 0, E, 1, W]


# --- shadow, tlh, modal equality -------------------------------------------------


def test_shadow_examples():
    assert shadow(1 + E) == 1
    assert shadow((E + E * E) / E) == 1
    assert shadow(E) == 0
    with pytest.raises(UnlimitedInput):
        shadow(W)


@pytest.mark.parametrize("x, want", [
    (5 + E, ((0, 5),)),
    (E + E * E, ((1, 1),)),
    (3 * E**2 + 7 * E**5, ((2, 3),)),
])
def test_tlh_examples(x, want):
    assert tlh_truncate(x).terms == want


def test_tlh_of_zero():
    with pytest.raises(ZeroInput):
        tlh_truncate(L({}))


def test_eq_modal_examples():
    assert eq_modal(3 + 7 * E, 3, "geometric")
    assert eq_modal(E, 2 * E, "arithmetic")
    assert not eq_modal(E, 2 * E, "geometric")
    assert eq_modal(E, 0, "arithmetic")
    assert not eq_modal(1 + E, 1, "exact")
    assert eq_modal(1 + E, 1 + E, "exact")
    with pytest.raises(GeometricZeroDenominator):
        eq_modal(E, 0, "geometric")


def test_exact_modality_distinguishes_kinds():
    assert not eq_modal(L({0: 1}), L({0: 1.0}), "exact")
    assert eq_modal(L({0: 1}), L({0: 1.0}), "geometric")


def test_approximate_geometric_slack():
    x = L({0: 1.0 + 1e-14})
    assert eq_modal(x, 1.0, "geometric")
    assert not eq_modal(L({0: 1.0 + 1e-9}), 1.0, "geometric")


def test_approximate_cancellation_uses_relative_slack():
    a = L({0: 0.1, 1: 1.0})
    b = L({0: 0.1 + 1e-17})
    assert (a - b).valuation == 1


# --- Archimedean property -------------------------------------------------------


@pytest.mark.parametrize("x, y, want", [
    (E, 1, (False, None)),
    (3, 7, (True, 3)),
    (2 * E, 5 * E, (True, 3)),
    (1, E, (True, 1)),
    (W, 10**9, (True, 1)),
    (Fraction(1, 2), 1, (True, 3)),
])
def test_archimedean_examples(x, y, want):
    assert is_archimedean_pair(x, y) == want


def test_archimedean_requires_positive():
    with pytest.raises(NonpositiveInput):
        is_archimedean_pair(-E, 1)
    with pytest.raises(NonpositiveInput):
        is_archimedean_pair(E, 0)


# --- smooth lifts ------------------------------------------------------------------


def test_exp_maclaurin():
    r = lift_smooth("exp", eps(3))
    assert r.terms == ((0, 1), (1, 1), (2, Fraction(1, 2)), (3, Fraction(1, 6)))


def test_log_mercator():
    r = lift_smooth("log", 1 + eps(6))
    assert r.exact
    assert [r.coefficient(q) for q in range(1, 7)] == [Fraction((-1) ** (q + 1), q) for q in range(1, 7)]


def test_cos_quadratic_term_matches_replacement():
    r = lift_smooth("cos", 2 * math.pi * eps(6))
    assert r.coefficient(0) == 1
    assert r.coefficient(2) == pytest.approx(-2 * math.pi**2, rel=1e-14)
    assert r.coefficient(4) == pytest.approx(2 * math.pi**4 / 3, rel=1e-14)
    assert r.coefficient(1) == 0 and r.coefficient(3) == 0


@pytest.mark.parametrize("f, x0", [("exp", 0.3), ("log", 2.5), ("sin", 1.1), ("cos", -0.7)])
def test_lift_matches_mpmath_taylor(f, x0):
    # oracle: mpmath's numerical Taylor coefficients at x0
    r = lift_smooth(f, x0 + eps(8))
    want = mpmath.taylor(getattr(mpmath, f), x0, 8)
    for q in range(9):
        assert float(r.coefficient(q)) == pytest.approx(float(want[q]), rel=1e-12, abs=1e-15)


def test_pow_lift():
    r = lift_smooth("pow", 1 + eps(3), Fraction(1, 2))
    assert r.terms == ((0, 1), (1, Fraction(1, 2)), (2, Fraction(-1, 8)), (3, Fraction(1, 16)))
    r = lift_smooth("pow", 4 + eps(2), 0.5)
    assert float(r.coefficient(1)) == pytest.approx(0.25)
    assert lift_smooth("pow", 1 + E, 3) == (1 + E) ** 3


def test_lift_errors():
    with pytest.raises(UnlimitedInput):
        lift_smooth("exp", W)
    with pytest.raises(DomainError):
        lift_smooth("log", E)
    with pytest.raises(DomainError):
        lift_smooth("log", -1 + E)
    with pytest.raises(ValueError):
        lift_smooth("tan", E)


@pytest.mark.parametrize("f, fn, x0", [
    ("exp", math.exp, 0.4), ("log", math.log, 1.7), ("sin", math.sin, 0.9), ("cos", math.cos, 2.2),
])
@pytest.mark.parametrize("h", [1e-3, 1e-4])
def test_lift_first_order_matches_central_difference(f, fn, x0, h):
    slope = float(lift_smooth(f, x0 + E).coefficient(1))
    fd = (fn(x0 + h) - fn(x0 - h)) / (2 * h)
    # central differences err by f'''(x0) h^2 / 6; all four have |f'''| < 3 here
    assert abs(slope - fd) <= 0.5 * h * h + 1e-10


# --- formatting ---------------------------------------------------------------------


@pytest.mark.parametrize("x, text", [
    (1 - E * E / 2, "1 - 1/2*eps^2"),
    (W, "omega"),
    (L({}), "0"),
    (2 * W + 3, "2*omega + 3"),
    (-E * E, "-1*eps^2"),
    (-E, "-eps"),
    (3 * W**2 - E, "3*omega^2 - eps"),
])
def test_format_examples(x, text):
    assert format_laurent(x) == text


# --- properties ---------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(), laurent_numbers())
def test_add_mul_match_reference(a, b):
    assert terms_equal(a + b, ref_window(ref_add(as_dict(a), as_dict(b)), PROP_T))
    assert terms_equal(a * b, ref_window(ref_mul(as_dict(a), as_dict(b)), PROP_T))


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(), laurent_numbers(nonzero=True))
def test_division_inverts_multiplication(a, b):
    q = a / b
    # q*b agrees with a on every order the truncated quotient can determine
    back = ref_mul(as_dict(q), as_dict(b))
    top = valuation(a) + PROP_T if not a.is_zero() else None
    if top is not None:
        assert {k: v for k, v in back.items() if k <= top} == as_dict(a)


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(), laurent_numbers(), laurent_numbers())
def test_field_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()
    if not a.is_zero():
        assert (a * (1 / a)).terms == ((0, 1),)


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(), laurent_numbers(), laurent_numbers())
def test_order_axioms(a, b, c):
    assert sum([a < b, a == b, a > b]) == 1
    if a < b:
        z = b - a
        assert z > 0 and a + z == b
        assert a + c < b + c
    if a > 0 and b > 0:
        assert a * b > 0


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(), laurent_numbers())
def test_valuation_laws(a, b):
    assume(not a.is_zero() and not b.is_zero())
    assert valuation(a * b) == valuation(a) + valuation(b)
    assert valuation(a + b) >= min(valuation(a), valuation(b))


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(limited=True), laurent_numbers(limited=True))
def test_shadow_homomorphism(a, b):
    assert shadow(a + b) == shadow(a) + shadow(b)
    assert shadow(a * b) == shadow(a) * shadow(b)


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(nonzero=True))
def test_tlh_idempotent_and_geometrically_equal(x):
    t = tlh_truncate(x)
    assert tlh_truncate(t) == t
    assert eq_modal(x, t, "geometric")


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(limited=True), laurent_numbers(limited=True, nonzero=True))
def test_modality_chain(a, b):
    # exact => geometric => arithmetic for finite nonzero operands
    assume(shadow(b) != 0)
    if eq_modal(a, b, "exact"):
        assert eq_modal(a, b, "geometric")
    if eq_modal(a, b, "geometric"):
        assert eq_modal(a, b, "arithmetic")


@settings(max_examples=300, deadline=None)
@given(laurent_numbers(), laurent_numbers(nonzero=True), st.booleans())
def test_geometric_equality_matches_ratio(a, b, nudge):
    # oracle: shadow of the exact ratio, computed in reference arithmetic
    if nudge:
        a = b + b * eps(PROP_T) * a
    ratio = a / b
    want = ratio.is_limited() and shadow(ratio) == 1
    assert eq_modal(a, b, "geometric") == want
    assert eq_modal(a.approx(), b.approx(), "geometric") == want
    assert terms_equal(ratio * b, ref_window(as_dict(a), PROP_T)) or a.is_zero()


@settings(max_examples=200, deadline=None)
@given(laurent_numbers(nonzero=True), laurent_numbers(nonzero=True))
def test_archimedean_criterion(x, y):
    x = x if x > 0 else -x
    y = y if y > 0 else -y
    ok, n = is_archimedean_pair(x, y)
    assert ok == (valuation(x) <= valuation(y))
    if ok:
        assert n * x > y and not (n - 1) * x > y


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.fractions(min_value=Fraction(1, 50), max_value=100, max_denominator=50))
def test_berkeley_conjunction_never_asserted(k, c):
    # a constructed infinitesimal is discarded, never identical to zero
    d = c * E**k
    assert compare(d, 0) is Ordering.GREATER
    assert eq_modal(d, 0, "arithmetic")
    assert not eq_modal(d, 0, "exact")
