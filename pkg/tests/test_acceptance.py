"""Acceptance criteria, one test per criterion.

Each test prints ``A<k> PASS|FAIL <detail>`` and records the line so that
the terminal summary (see ``conftest.py``) repeats all of them after the run.
Runtimes are measured around the work itself, not test setup.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import numpy as np

from helpers import random_laurent
from leibniz_euler.euler import (
    basel_partial,
    check_step2_factorization,
    check_step4_replacement,
    derive_exp_series,
    derive_sine_product,
    wallis_partial,
    wallis_partials,
)
from leibniz_euler.expr import evaluate, parse
from leibniz_euler.nonarch import (
    eq_modal,
    format_laurent,
    is_archimedean_pair,
    shadow,
    tlh_truncate,
)
from leibniz_euler.sequence import (
    InfiniteIndex,
    econvergence_check,
    hyperfinite_integral,
    seq_shadow,
)

RESULTS: list[str] = []


def record(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# --- A1 -----------------------------------------------------------------------------------


def test_a1_exponential_series():
    idx = InfiniteIndex.geometric(15625, 2, 7)  # ends at 10^6
    with Timer() as t:
        report = derive_exp_series(1, 1, 10, idx)
    n = 10**6
    assert idx.schedule[-1] == n
    # oracle: integer binomials, independent of the derivation code
    coeff_gap = max(abs(Fraction(math.comb(n, r), n**r) - Fraction(1, math.factorial(r))) for r in range(11))
    cumulative = report.step("cumulative")
    res = cumulative.detail["residuals"]
    ratio = res[-1] / res[-2]
    ok = (
        float(coeff_gap) <= 5e-5
        and float(report.step("coefficients").residual) == float(coeff_gap)
        and float(cumulative.residual) <= 1e-4
        and 0.4 <= ratio <= 0.6
        and report.overall
        and t.elapsed < 1.0
    )
    record("A1", ok, f"coef gap {float(coeff_gap):.2e}, cumulative {float(cumulative.residual):.2e}, "
                     f"doubling ratio {ratio:.4f}, {t.elapsed:.2f}s")


# --- A2 -----------------------------------------------------------------------------------


def test_a2_sine_product():
    idx = InfiniteIndex((6250, 12500, 25000, 50000, 100000))
    K = 10**4
    finals, oks = [], []
    with Timer() as t:
        reports = {x: derive_sine_product(x, "sin", K, idx) for x in (0.5, 1.0, math.pi / 2)}
    for x, report in reports.items():
        final = report.step("final")
        # oracle: direct product of the K factors
        direct = float(np.prod(1 - x * x / (np.arange(1, K + 1) ** 2 * math.pi**2)))
        oks.append(report.overall and final.residual <= 1e-3
                   and abs(final.detail["partial_product"] - direct) <= 1e-12)
        finals.append(final.residual)
    half_pi = reports[math.pi / 2].step("final").detail["partial_product"]
    ok = all(oks) and abs(half_pi - 0.636620) <= 1e-4 and t.elapsed < 5.0
    record("A2", ok, f"final residuals {', '.join(f'{r:.2e}' for r in finals)}, "
                     f"product at pi/2 {half_pi:.6f}, {t.elapsed:.2f}s")


# --- A3 -----------------------------------------------------------------------------------


def test_a3_wallis():
    N = 10**4
    with Timer() as t:
        value = float(wallis_partial(N))
        partials = wallis_partials(N)
    # oracle: log-sum of the factors
    oracle = math.exp(math.fsum(math.log(4 * n * n) - math.log(4 * n * n - 1) for n in range(1, N + 1)))
    gap = abs(value - math.pi / 2)
    ok = (gap <= 1e-4 and abs(value - oracle) <= 1e-12 and bool(np.all(np.diff(partials) > 0))
          and t.elapsed < 2.0)
    record("A3", ok, f"|W_N - pi/2| = {gap:.2e}, monotone over 1..{N}, {t.elapsed:.2f}s")


# --- A4 -----------------------------------------------------------------------------------


def test_a4_basel():
    with Timer() as t:
        direct, report = basel_partial(10**4)
        matches = []
        running = Fraction(0)
        for N in range(1, 101):
            running += Fraction(1, N * N)
            _, rep = basel_partial(N, "coefficient-comparison")
            matches.append(rep.step("vieta").detail["c3_times_pi2"] == -running)
    gap = abs(float(direct) - math.pi**2 / 6)
    ok = gap <= 2e-4 and report.overall and all(matches) and t.elapsed < 2.0
    record("A4", ok, f"|S_N - pi^2/6| = {gap:.2e}, coefficient route exact for N <= 100: {all(matches)}, "
                     f"{t.elapsed:.2f}s")


# --- A5 -----------------------------------------------------------------------------------


def test_a5_integral():
    with Timer() as t:
        est = seq_shadow(hyperfinite_integral(lambda x: x * x, 0.0, 1.0))
    gap = abs(est.value - 1 / 3)
    ok = gap <= 1e-6 and est.order >= 2 and t.elapsed < 1.0
    record("A5", ok, f"shadow {est.value!r}, gap {gap:.1e}, order {est.order}, {t.elapsed:.2f}s")


# --- A6 -----------------------------------------------------------------------------------


def test_a6_factorization():
    rng = random.Random(2024)
    pairs = [(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(100)]
    with Timer() as t:
        exact_ok = all(
            (c := check_step2_factorization(i, a, b)).exact and c.residual == 0
            for i in (2, 3, 4, 6) for a, b in pairs
        )
        worst = max(float(check_step2_factorization(i, a, b).relative) for i in range(5, 65) for a, b in pairs)
    ok = exact_ok and worst <= 1e-9 and t.elapsed < 1.0
    record("A6", ok, f"exact for i in 2,3,4,6: {exact_ok}, worst relative {worst:.2e}, {t.elapsed:.2f}s")


# --- A7 -----------------------------------------------------------------------------------


def test_a7_step4():
    idx = InfiniteIndex((100, 200, 400, 800, 3125, 6250, 12500, 25000, 50000, 100000))
    with Timer() as t:
        lemma = check_step4_replacement(1.0, 500, idx)
    ratios = [r for _, _, r in lemma.p1_ratios]
    ok = (math.isfinite(lemma.gamma) and lemma.validated and lemma.passed and ratios
          and all(3.5 <= r <= 4.5 for r in ratios) and t.elapsed < 5.0)
    record("A7", ok, f"gamma {lemma.gamma:.6f} validated={lemma.validated}, "
                     f"p1 ratios {min(ratios):.4f}..{max(ratios):.4f}, {t.elapsed:.2f}s")


# --- A8 -----------------------------------------------------------------------------------


def test_a8_econvergence():
    with Timer() as t:
        geometric = econvergence_check("sum", lambda k: 2.0**-k)
        harmonic = econvergence_check("sum", lambda k: 1.0 / k)
        wallis = econvergence_check("product", lambda k: 1 / (4.0 * k * k - 1))
    ok = (geometric.overall == "pass" and harmonic.condition_ii.status == "fail"
          and wallis.overall == "pass" and t.elapsed < 1.0)
    record("A8", ok, f"geometric {geometric.overall}, harmonic (ii) {harmonic.condition_ii.status}, "
                     f"wallis-pair {wallis.overall}, {t.elapsed:.2f}s")


# --- A9 -----------------------------------------------------------------------------------


def _field_case(rng):
    a, b, c = random_laurent(rng, nonzero=False), random_laurent(rng, nonzero=False), random_laurent(rng)
    zero = a - a
    return (
        a + b == b + a and a * b == b * a
        and (a + b) + c == a + (b + c) and (a * b) * c == a * (b * c)
        and a * (b + c) == a * b + a * c
        and (a + (-a)).is_zero() and zero.is_zero()
        and c * (1 / c) == 1
        # order: trichotomy, translation and positive products
        and ((a < b) + (a == b) + (a > b)) == 1
        and ((a < b) == (a + c < b + c))
        and (not (a > 0 and b > 0) or a * b > 0)
    )


def _shadow_case(rng):
    a, b = random_laurent(rng, limited=True, nonzero=False), random_laurent(rng, limited=True, nonzero=False)
    # oracle: the order-0 coefficient read off the raw terms
    sa, sb = dict(a.terms).get(0, 0), dict(b.terms).get(0, 0)
    return shadow(a + b) == sa + sb and shadow(a * b) == sa * sb


def _tlh_case(rng):
    x = random_laurent(rng)
    t = tlh_truncate(x)
    return tlh_truncate(t) == t and len(t.terms) == 1 and t.terms[0] == x.terms[0] and eq_modal(x, t, "geometric")


def _archimedean_case(rng):
    x, y = random_laurent(rng, positive=True), random_laurent(rng, positive=True)
    arch, _ = is_archimedean_pair(x, y)
    # oracle: leading coefficients are bounded by 9 and at least 1/6, so any
    # equal-valuation pair is beaten by n = 55; 10^6 separates the cases
    beaten = 10**6 * x > y
    return (x.valuation > y.valuation) == (not arch) and arch == beaten


def test_a9_property_suites():
    rng = random.Random(99)
    counts = {"field": 0, "shadow": 0, "tlh": 0, "archimedean": 0}
    failures = {k: 0 for k in counts}
    with Timer() as t:
        for name, case in (("field", _field_case), ("shadow", _shadow_case),
                           ("tlh", _tlh_case), ("archimedean", _archimedean_case)):
            for _ in range(25_000):
                counts[name] += 1
                if not case(rng):
                    failures[name] += 1
    total = sum(counts.values())
    ok = total == 10**5 and not any(failures.values()) and t.elapsed < 10.0
    record("A9", ok, f"{total} cases, failures {failures}, {t.elapsed:.2f}s")


# --- A10 ----------------------------------------------------------------------------------


def test_a10_parser():
    rng = random.Random(5)
    trees = {
        "st((dx + dx^2)/dx)": "call(st, div(add(dx, pow(dx,2)), dx))",
        "1 - 2*eps^2": "sub(1, mul(2, pow(eps,2)))",
    }
    with Timer() as t:
        tree_ok = all(parse(src).sexpr() == want for src, want in trees.items())
        try:
            parse("tlh(5 + eps")
            paren_ok = False
        except SyntaxError:
            paren_ok = False
        except ValueError as exc:
            paren_ok = exc.span.start == len("tlh(5 + eps") and exc.expected == (")",)
        mismatches = 0
        for _ in range(10**4):
            x = random_laurent(rng, nonzero=False, T=rng.randint(2, 16))
            if evaluate(parse(format_laurent(x)), truncation=x.truncation) != x:
                mismatches += 1
    ok = tree_ok and paren_ok and mismatches == 0 and t.elapsed < 2.0
    record("A10", ok, f"trees {tree_ok}, unbalanced paren diagnostic {paren_ok}, "
                      f"round-trip mismatches {mismatches}/10000, {t.elapsed:.2f}s")
