"""Step-by-step audits of Euler's classical infinitesimal derivations.

Each ``derive_*`` function replays one derivation along an index schedule and
returns a :class:`DerivationReport`: one record per inferential step with the
numeric residual, an analytic bound where one is available, and a verdict.
Anchors name the formula each step manipulates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FactorizationMismatch, FitFailure, NormalizationFailure
from .nonarch import DEFAULT_TRUNCATION, LaurentNumber, eps, lift_smooth
from .sequence import DEFAULT_INDEX, InfiniteIndex

__all__ = [
    "DerivationReport",
    "FactorizationCheck",
    "HiddenLemmaBound",
    "ProtolimitResult",
    "StepRecord",
    "basel_partial",
    "check_step2_factorization",
    "check_step4_replacement",
    "cosine_remainder",
    "derive_exp_series",
    "derive_sine_product",
    "fraction_text",
    "lhopital_protolimit",
    "wallis_partial",
    "wallis_partials",
]

PI = math.pi


# --- reports -------------------------------------------------------------------


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return fraction_text(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return str(v)


# rationals larger than this are written as rounded decimals
_EXACT_TEXT_BITS = 4096
_ROUNDED_DIGITS = 40


def _rounded_decimal(q: Fraction, digits: int) -> str:
    """``q`` correctly rounded to ``digits`` significant digits, in E notation."""
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    q = abs(q)
    # decimal exponent estimate, corrected below
    e = int((q.numerator.bit_length() - q.denominator.bit_length()) * 0.30102999566398120)
    while True:
        scaled = q * Fraction(10) ** (digits - 1 - e)
        m = round(scaled)
        if m >= 10**digits:
            e += 1
        elif m < 10 ** (digits - 1):
            e -= 1
        else:
            break
    text = str(m)
    return f"{sign}{text[0]}.{text[1:]}E{e:+d}"


def fraction_text(q: Fraction) -> str:
    """Exact decimal string when the expansion terminates, else ``p/q``."""
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    big = max(q.numerator.bit_length(), q.denominator.bit_length()) > _EXACT_TEXT_BITS
    if d != 1 and not big:
        return f"{q.numerator}/{q.denominator}"
    if d != 1 or big:
        return _rounded_decimal(q, _ROUNDED_DIGITS)
    places = max(twos, fives)
    scaled = q * 10**places
    return str(Decimal(scaled.numerator).scaleb(-places))


@dataclass
class StepRecord:
    id: str
    anchor: str
    claim: str
    residual: float | Fraction
    bound: float | Fraction | None
    passed: bool
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residuals are magnitudes and must be non-negative")

    def to_dict(self, include_detail: bool = False) -> dict:
        out = {
            "id": self.id,
            "anchor": self.anchor,
            "claim": self.claim,
            "residual": _json_value(self.residual),
            "bound": _json_value(self.bound),
            "pass": self.passed,
        }
        if include_detail and self.detail:
            out["detail"] = _json_value(self.detail)
        return out


@dataclass
class DerivationReport:
    derivation: str
    steps: list[StepRecord]
    config: dict

    @property
    def overall(self) -> bool:
        return bool(self.steps) and all(s.passed for s in self.steps)

    def step(self, step_id: str) -> StepRecord:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(step_id)

    def to_dict(self, include_detail: bool = False) -> dict:
        return {
            "derivation": self.derivation,
            "config": _json_value(self.config),
            "steps": [s.to_dict(include_detail) for s in self.steps],
            "overall": "pass" if self.overall else "fail",
        }

    def to_json(self, include_detail: bool = False, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(include_detail), indent=indent)

    def to_text(self) -> str:
        lines = [f"derivation: {self.derivation}"]
        for s in self.steps:
            bound = "-" if s.bound is None else f"{float(s.bound):.3e}"
            lines.append(
                f"  [{'PASS' if s.passed else 'FAIL'}] {s.id}: residual={float(s.residual):.3e} bound={bound}  {s.claim}"
            )
        lines.append(f"overall: {'pass' if self.overall else 'fail'}")
        return "\n".join(lines)


def _nonincreasing(xs, rel: float = 1e-9, abs_: float = 1e-15) -> bool:
    xs = [float(x) for x in xs]
    return all(b <= a * (1 + rel) + abs_ for a, b in zip(xs, xs[1:]))


def _schedule_config(index: InfiniteIndex) -> dict:
    return {"schedule": list(index.schedule), "symbol": index.symbol, "parity": index.parity}


# --- exponential series ----------------------------------------------------------


def _binomial_ratio(n: int, r: int) -> Fraction:
    """``C(n, r) / n**r`` as an exact rational."""
    return Fraction(math.comb(n, r), n**r)


def derive_exp_series(
    k=1,
    z=1,
    r_max: int = 10,
    index: InfiniteIndex | None = None,
    *,
    coefficient_tolerance: float = 5e-5,
    cumulative_tolerance: float = 1e-4,
) -> DerivationReport:
    """Replay the binomial route from ``(1 + kz/i)**i`` to the exponential series.

    At each schedule point ``n`` the coefficient of ``(kz)**r`` is
    ``C(n, r)/n**r = prod_{j<r}(1 - j/n) / r!`` and is computed exactly.  The
    report audits the substitutions ``(n-j)/n -> 1`` one order at a time and
    their cumulative effect on the truncated series, which must vanish like
    ``1/n``.
    """
    if r_max > 12 or r_max < 1:
        raise ValueError("r_max must be in 1..12")
    index = index or DEFAULT_INDEX
    ns = index.schedule
    kz = Fraction(k) * Fraction(z)
    inv_fact = [Fraction(1, math.factorial(r)) for r in range(r_max + 1)]
    powers = [kz**r for r in range(r_max + 1)]

    low_order = []
    per_sub, cumulative, coeff_gap = [], [], []
    for n in ns:
        ratios = [_binomial_ratio(n, r) for r in range(r_max + 1)]
        low_order.append(abs(ratios[0] - 1) + abs(ratios[1] * kz - kz))
        # |prod_{j<r}(1 - j/n) - 1| for each substituted order r
        per_sub.append(max(abs(ratios[r] / inv_fact[r] - 1) for r in range(r_max + 1)))
        cumulative.append(abs(sum((ratios[r] - inv_fact[r]) * powers[r] for r in range(r_max + 1))))
        coeff_gap.append(max(abs(ratios[r] - inv_fact[r]) for r in range(r_max + 1)))

    n_last = ns[-1]
    steps = []
    steps.append(StepRecord(
        "low-orders",
        "(1 + k*omega)^i = 1 + i*k*omega + ...",
        "coefficients of (kz)^0 and (kz)^1 are exactly 1 and 1 at every n",
        max(low_order), Fraction(0), max(low_order) == 0,
    ))

    sub_bound = Fraction(r_max * (r_max - 1), 2 * n_last)
    steps.append(StepRecord(
        "substitutions",
        "(i-1)/i = 1, (i-1)/(2i) = 1/2, (i-2)/(3i) = 1/3, ...",
        f"each substitution prod_(j<r)(1 - j/n) -> 1 for r <= {r_max} errs by at most r(r-1)/(2n)",
        per_sub[-1], sub_bound,
        per_sub[-1] <= sub_bound and _nonincreasing(per_sub),
        {"schedule": list(ns), "residuals": [float(x) for x in per_sub]},
    ))

    akz = abs(float(kz))
    cum_bound = akz**2 * math.exp(akz) / (2 * n_last)
    steps.append(StepRecord(
        "cumulative",
        "(1 + kz/i)^i = 1 + kz + i(i-1)/(i*2i) k^2 z^2 + ...",
        "the accumulated effect of all substitutions on the truncated series vanishes like 1/n",
        cumulative[-1], cum_bound,
        float(cumulative[-1]) <= min(cum_bound, cumulative_tolerance) and _nonincreasing(cumulative),
        {"schedule": list(ns), "residuals": [float(x) for x in cumulative]},
    ))

    pairs = [(i, j) for i in range(len(ns)) for j in range(i + 1, len(ns)) if ns[j] == 2 * ns[i]]
    if cumulative[-1] == 0:
        decay = Fraction(0)
        decay_detail = {"note": "residual vanishes identically"}
        decay_ok = True
    elif pairs:
        i, j = pairs[-1]
        ratio = float(cumulative[j]) / float(cumulative[i])
        decay = abs(ratio - 0.5)
        decay_detail = {"n": ns[i], "2n": ns[j], "ratio": ratio}
        decay_ok = decay <= 0.1
    else:
        decay, decay_detail, decay_ok = 1.0, {"note": "schedule has no doubling pair"}, False
    steps.append(StepRecord(
        "first-order-decay",
        "(i-1)(i-2)...(i-r) = i^r",
        "doubling n halves the cumulative residual (ratio 1/2 within 20%)",
        decay, 0.1, decay_ok, decay_detail,
    ))

    steps.append(StepRecord(
        "coefficients",
        "a^z = 1 + kz + k^2 z^2/2 + k^3 z^3/6 + ...",
        f"C(n,r)/n^r matches 1/r! for every r <= {r_max} at the largest n",
        coeff_gap[-1], coefficient_tolerance, float(coeff_gap[-1]) <= coefficient_tolerance,
        {"n": n_last, "coefficients": [float(_binomial_ratio(n_last, r)) for r in range(r_max + 1)]},
    ))

    config = {"k": float(k), "z": float(z), "r_max": r_max, **_schedule_config(index),
              "tolerances": {"coefficient": coefficient_tolerance, "cumulative": cumulative_tolerance},
              "mode": "exact"}
    return DerivationReport("exp-series", steps, config)


# --- factorisation of a^i - b^i ---------------------------------------------------


class FactorizationCheck(NamedTuple):
    residual: float | Fraction
    scale: float | Fraction
    relative: float | Fraction
    passed: bool
    exact: bool


def _rational_cos(k: int, i: int) -> Fraction | None:
    """``cos(2k*pi/i)`` when it is rational, else ``None``."""
    g = math.gcd(2 * k, i)
    p, q = 2 * k // g, i // g
    if q == 1:
        return Fraction((-1) ** p)
    if q == 2:
        return Fraction(0)
    if q == 3:
        return Fraction(1, 2) if p % 6 in (1, 5) else Fraction(-1, 2)
    return None


def check_step2_factorization(i: int, a, b, tolerance: float = 1e-9) -> FactorizationCheck:
    """Residual of ``a^i - b^i = (a-b) [(a+b) if i even] prod_k (a^2 + b^2 - 2ab cos(2k*pi/i))``.

    ``k`` runs over ``1 <= k < i/2``.  When every cosine involved is rational
    the identity is checked in exact arithmetic (floats are taken at their
    exact binary value) and the residual is exactly zero.
    """
    if i < 2:
        raise ValueError("i must be at least 2")
    ks = [k for k in range(1, i) if 2 * k < i]
    cosines = [_rational_cos(k, i) for k in ks]
    exact = all(c is not None for c in cosines)
    if exact:
        a, b = Fraction(a), Fraction(b)
    else:
        a, b = float(a), float(b)
        cosines = [math.cos(2 * k * PI / i) for k in ks]
    rhs = a - b
    if i % 2 == 0:
        rhs *= a + b
    for c in cosines:
        rhs *= a * a + b * b - 2 * a * b * c
    residual = abs(a**i - b**i - rhs)
    scale = (abs(a) + abs(b)) ** i
    relative = residual / scale if scale else residual
    return FactorizationCheck(residual, scale, relative, residual <= tolerance * scale, exact)


# --- the cosine replacement bound ---------------------------------------------


def cosine_remainder(k: int, n: int) -> float:
    """``cos(2k*pi/n) - (1 - 2k^2 pi^2/n^2)``: what the quadratic replacement drops."""
    return math.cos(2 * k * PI / n) - (1 - 2 * k * k * PI * PI / (n * n))


@dataclass
class HiddenLemmaBound:
    """Evidence for ``T_k(x) = C_k (U_k(x) + p_k x^2)`` with ``|p_k| <= gamma / k^2``.

    ``T_k`` is the quadratic factor after substituting ``a, b = 1 +- x/n``,
    ``U_k`` the factor Euler keeps after replacing the cosine by its
    quadratic Taylor polynomial.  Arrays are keyed by schedule point.
    """

    x: float
    factors: int
    schedule: tuple[int, ...]
    C: dict[int, np.ndarray]
    p: dict[int, np.ndarray]
    gamma: float
    fit_residual: float
    validated: bool
    p1: dict[int, float]
    p1_ratios: list[tuple[int, int, float]]
    replacement_gap: dict[int, float]
    perturbation: dict[int, float]
    perturbation_bound: dict[int, float]
    gamma_bound: dict[int, float]
    calibration: int | None = None

    @property
    def perturbation_decreasing(self) -> bool:
        return _nonincreasing([self.perturbation[n] for n in sorted(self.perturbation)])

    @property
    def within_bounds(self) -> bool:
        return all(
            self.perturbation[n] <= min(self.perturbation_bound[n], self.gamma_bound[n]) * (1 + 1e-9) + 1e-300
            for n in self.perturbation
        )

    @property
    def passed(self) -> bool:
        return self.validated and self.perturbation_decreasing and self.within_bounds

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "factors": self.factors,
            "schedule": list(self.schedule),
            "gamma": self.gamma,
            "calibration": self.calibration,
            "fit_residual": self.fit_residual,
            "validated": self.validated,
            "p1": {str(n): v for n, v in self.p1.items()},
            "p1_ratios": [[a, b, r] for a, b, r in self.p1_ratios],
            "replacement_gap": {str(n): v for n, v in self.replacement_gap.items()},
            "perturbation": {str(n): v for n, v in self.perturbation.items()},
            "perturbation_bound": {str(n): v for n, v in self.perturbation_bound.items()},
            "gamma_bound": {str(n): v for n, v in self.gamma_bound.items()},
            "pass": self.passed,
        }


def _lemma_terms(x: float, n: int, ks: np.ndarray):
    theta = 2 * PI * ks / n
    # T_k(0) = 2 - 2cos(theta) = 4 sin^2(k pi / n), written in the stable form
    C = 4 * np.sin(PI * ks / n) ** 2
    # T_k(x) - T_k(0) = x^2 (2 + 2cos(theta)) / n^2, so
    # p_k = (T_k(x)/C_k - U_k(x)) / x^2 needs no division by x
    p = (2 + 2 * np.cos(theta)) / (n * n * C) - 1 / (ks * ks * PI * PI) + 1 / (n * n)
    U = 1 + x * x / (ks * ks * PI * PI) - x * x / (n * n)
    return C, p, U


def check_step4_replacement(
    x: float,
    factors: int,
    index: InfiniteIndex | None = None,
    *,
    validation_slack: float = 1e-6,
) -> HiddenLemmaBound:
    """Fit and validate the bound behind replacing ``cos(2k*pi/i)`` by ``1 - 2k^2 pi^2/i^2``.

    At each schedule point ``n`` the factors ``k = 1..min(K, n/2)`` are
    decomposed as ``T_k = C_k (U_k + p_k x^2)`` with ``C_k = T_k(0)``, which
    is the only normalisation that leaves ``p_k`` independent of ``x``.

    ``gamma`` is the largest ``|p_k| k^2`` over ``k <= K/2``, taken at all
    schedule points plus one calibration point ``n = 2*(K//2)`` at which the
    fit range reaches ``k = n/2``; the held-out factors ``K/2 < k <= K`` at
    the schedule points must respect it.  The
    aggregate effect of the replacement on the product of the ``K`` factors
    is compared with ``exp(sum |delta_k|) - 1`` at schedule points where all
    ``K`` factors exist.
    """
    if factors < 1:
        raise ValueError("need at least one factor")
    index = index or DEFAULT_INDEX
    x = float(x)
    half = factors // 2 if factors > 1 else 1
    C_all, p_all = {}, {}
    fit_vals, held_vals = [], []
    p1, replacement_gap = {}, {}
    perturbation, pert_bound, gamma_inputs = {}, {}, {}
    used = []
    for n in index.schedule:
        kmax = min(factors, n // 2)
        if kmax < 1:
            continue
        used.append(n)
        ks = np.arange(1, kmax + 1, dtype=float)
        C, p, U = _lemma_terms(x, n, ks)
        C_all[n], p_all[n] = C, p
        p1[n] = float(p[0])
        scaled = np.abs(p) * ks * ks
        fit_vals.append(scaled[: min(half, kmax)])
        if kmax > half:
            held_vals.append(scaled[half:])
        replacement_gap[n] = float(np.max(np.abs(4 * ks * ks * PI * PI / (n * n) / C - 1)))
        if kmax == factors:
            delta = p * x * x / U
            if np.all(1 + delta > 0):
                perturbation[n] = abs(float(np.expm1(np.sum(np.log1p(delta)))))
            else:
                perturbation[n] = abs(float(np.prod(1 + delta)) - 1)
            pert_bound[n] = float(np.expm1(np.sum(np.abs(delta))))
            gamma_inputs[n] = float(np.sum(1 / (ks * ks)) / np.min(U))

    if not fit_vals:
        raise FitFailure("no schedule point admits even one factor")
    # the bound is uniform in n, so a small n covering k/n up to 1/2 may join the fit
    calibration = 2 * half
    if calibration not in C_all:
        ks = np.arange(1, half + 1, dtype=float)
        _, p_cal, _ = _lemma_terms(x, calibration, ks)
        fit_vals.append(np.abs(p_cal) * ks * ks)
    fit = np.concatenate(fit_vals)
    if not np.all(np.isfinite(fit)):
        raise FitFailure("non-finite p_k in the fit range")
    gamma = float(np.max(fit))
    if held_vals:
        held = np.concatenate(held_vals)
        if not np.all(np.isfinite(held)):
            raise FitFailure("non-finite p_k in the held-out range")
        fit_residual = float(np.max(held) / gamma - 1) if gamma > 0 else math.inf
    else:
        fit_residual = -1.0
    validated = fit_residual <= validation_slack

    p1_ratios = []
    for a, b in zip(used, used[1:]):
        if b == 2 * a and p1[b] != 0:
            p1_ratios.append((a, b, p1[a] / p1[b]))

    gamma_bound = {n: float(np.expm1(gamma * x * x * s)) for n, s in gamma_inputs.items()}
    return HiddenLemmaBound(
        x=x, factors=factors, schedule=tuple(used), C=C_all, p=p_all, gamma=gamma,
        fit_residual=fit_residual, validated=validated, p1=p1, p1_ratios=p1_ratios,
        replacement_gap=replacement_gap, perturbation=perturbation,
        perturbation_bound=pert_bound, gamma_bound=gamma_bound, calibration=calibration,
    )


# --- the sine / sinh product ------------------------------------------------------


def _sinh_binomial(x: float, n: int) -> float:
    """``(1 + x/n)^n - (1 - x/n)^n`` without forming the powers directly."""
    return math.exp(n * math.log1p(x / n)) - math.exp(n * math.log1p(-x / n))


def derive_sine_product(
    x: float,
    which: str = "sin",
    factors: int = 100,
    index: InfiniteIndex | None = None,
    truncation: int = DEFAULT_TRUNCATION,
    *,
    factorization_tolerance: float = 1e-9,
    normalization_tolerance: float = 1e-12,
) -> DerivationReport:
    """Audit the seven steps from ``2 sinh x = (1+x/i)^i - (1-x/i)^i`` to the product formula.

    Steps that depend on the infinite integer use the schedule points
    ``n >= 2K``.  Step 5 measures the omission of ``x^2/n^2`` over the ``K``
    retained factors only.

    Raises
    ------
    FactorizationMismatch
        If the finite factorisation of ``a^i - b^i`` breaks down.
    NormalizationFailure
        If the linear Maclaurin coefficient of ``x * prod(...)`` is not 1.
    """
    if which not in ("sin", "sinh"):
        raise ValueError("which must be 'sin' or 'sinh'")
    index = index or DEFAULT_INDEX
    K = int(factors)
    if K < 1:
        raise ValueError("need at least one factor")
    ns = [n for n in index.schedule if n >= 2 * K]
    if not ns:
        raise ValueError(f"{K} factors need a schedule point n >= {2 * K}")
    x = float(x)
    sign = 1.0 if which == "sinh" else -1.0
    steps: list[StepRecord] = []

    # 1: binomial difference
    res1 = [abs(_sinh_binomial(x, n) - 2 * math.sinh(x)) for n in ns]
    bound1 = x * x * math.exp(abs(x)) / ns[-1]
    steps.append(StepRecord(
        "step-1", "2 sinh x = e^x - e^(-x) = (1 + x/i)^i - (1 - x/i)^i",
        "the binomial difference approaches 2 sinh x like x^2 sinh(x)/n",
        res1[-1], bound1, res1[-1] <= bound1 and _nonincreasing(res1),
        {"schedule": ns, "residuals": res1},
    ))

    # 2: finite factorisation, for every stand-in i up to 64
    worst, worst_i = 0.0, None
    for i in range(2, 65):
        chk = check_step2_factorization(i, 1 + x / i, 1 - x / i, factorization_tolerance)
        if not chk.passed:
            raise FactorizationMismatch(f"a^i - b^i factorisation fails at i={i}: relative residual {float(chk.relative):.3e}")
        if float(chk.relative) >= worst:
            worst, worst_i = float(chk.relative), i
    steps.append(StepRecord(
        "step-2", "a^i - b^i = (a - b)(a + b) prod (a^2 + b^2 - 2ab cos(2k pi/i)), 1 <= k < i/2",
        "a^i - b^i splits into the linear and quadratic factors for every i in 2..64",
        worst, factorization_tolerance, True, {"worst_i": worst_i},
    ))

    # 3: substituting a, b = 1 +- x/n into the quadratic factor, exactly
    X = Fraction(x)
    res3 = Fraction(0)
    for n in ns:
        a, b = 1 + X / n, 1 - X / n
        res3 = max(res3, abs(a * a + b * b - (2 + 2 * X * X / (n * n))), abs(2 * a * b - 2 * (1 - X * X / (n * n))))
    steps.append(StepRecord(
        "step-3", "2 + 2x^2/i^2 - 2(1 - x^2/i^2) cos(2k pi/i)",
        "with a, b = 1 +- x/n the factor a^2 + b^2 - 2ab cos becomes 2 + 2x^2/n^2 - 2(1 - x^2/n^2) cos",
        res3, Fraction(0), res3 == 0,
    ))

    # 4: cosine replacement, through the fitted gamma bound
    lemma = check_step4_replacement(x, K, index)
    n_top = max(lemma.perturbation) if lemma.perturbation else None
    steps.append(StepRecord(
        "step-4", "cos(2k pi/i) = 1 - 2k^2 pi^2/i^2",
        "replacing each factor by (4k^2 pi^2/i^2)(1 + x^2/(k^2 pi^2) - x^2/i^2) perturbs the product "
        "by a vanishing amount; |p_k| <= gamma/k^2 holds on held-out k",
        lemma.perturbation.get(n_top, 0.0) if n_top else 0.0,
        lemma.perturbation_bound.get(n_top) if n_top else None,
        lemma.passed,
        {"gamma": lemma.gamma, "fit_residual": lemma.fit_residual,
         "perturbation": lemma.perturbation, "gamma_bound": lemma.gamma_bound,
         "p1_ratios": lemma.p1_ratios},
    ))

    # 5: dropping x^2/n^2 from each of the K retained factors
    ks = np.arange(1, K + 1, dtype=float)
    kept = 1 + sign * x * x / (ks * ks * PI * PI)
    sinh_kept = 1 + x * x / (ks * ks * PI * PI)
    res5, bound5 = [], []
    for n in ns:
        delta = (x * x / (n * n)) / sinh_kept
        res5.append(abs(float(np.expm1(np.sum(np.log1p(-delta))))))
        bound5.append(K * x * x / (n * n))
    steps.append(StepRecord(
        "step-5", "1 + x^2/(k^2 pi^2) - x^2/i^2",
        f"omitting x^2/n^2 in all {K} retained factors changes their product by at most K x^2/n^2",
        res5[-1], bound5[-1],
        all(r <= bd * (1 + 1e-9) + 1e-300 for r, bd in zip(res5, bound5)) and _nonincreasing(res5),
        {"schedule": ns, "residuals": res5, "bounds": bound5,
         "all_factor_omission": [x * x / (2 * n) for n in ns]},
    ))

    # 6: normalisation, read off the Maclaurin series of x * prod(...)
    e = eps(truncation)
    e2 = e * e
    series = e
    for k in range(1, K + 1):
        series = series * (1 + e2 * (sign / (k * k * PI * PI)))
    c1 = float(series.coefficient(1))
    c3 = float(series.coefficient(3))
    res6 = abs(c1 - 1.0)
    if res6 > normalization_tolerance:
        raise NormalizationFailure(f"linear coefficient {c1!r} differs from 1")
    steps.append(StepRecord(
        "step-6", "the resulting first term will be x",
        "the x^1 coefficient of x * prod_k (1 +- x^2/(k^2 pi^2)) equals 1",
        res6, normalization_tolerance, True,
        {"x3_coefficient": c3, "x3_target": sign / 6.0},
    ))

    # 7: sin from sinh by x^2 -> -x^2
    es = eps(truncation)
    sinh_series = (lift_smooth("exp", es) - lift_smooth("exp", -es)) / 2
    sin_series = lift_smooth("sin", es)
    res7 = Fraction(0)
    for q in range(0, truncation + 1):
        expected = sinh_series.coefficient(q) * (-1) ** ((q - 1) // 2) if q % 2 else 0
        res7 = max(res7, abs(sin_series.coefficient(q) - expected))
    swapped = 1 + (-(x * x)) / (ks * ks * PI * PI)
    direct = 1 - x * x / (ks * ks * PI * PI)
    factor_gap = float(np.max(np.abs(swapped - direct)))
    res7 = float(res7) + factor_gap
    steps.append(StepRecord(
        "step-7", "x -> sqrt(-1) x",
        "replacing x^2 by -x^2 turns the sinh series and factors into the sin ones"
        + ("" if which == "sin" else " (not needed for the sinh target)"),
        res7, 0.0, res7 == 0,
    ))

    # final: truncated product against the target
    partial = float(np.prod(kept))
    product = x * partial
    target = math.sinh(x) if which == "sinh" else math.sin(x)
    residual = abs(product - target)
    tail_sum = x * x / (PI * PI * K)
    if which == "sinh":
        bound = abs(product) * math.expm1(tail_sum)
    else:
        bound = abs(product) * tail_sum if abs(x) < PI * (K + 1) else math.inf
    # the same product built from the exact factors T_k/C_k at each stand-in n
    chain = []
    for n in ns:
        theta = 2 * PI * ks / n
        exact_factors = 1 + sign * x * x * (1 + np.cos(theta)) / (2 * n * n * np.sin(PI * ks / n) ** 2)
        chain.append(abs(x * float(np.prod(exact_factors)) - target))
    detail = {"partial_product": partial, "target": target, "schedule": ns, "chain_residuals": chain}
    if x != 0:
        detail["ratio_target"] = target / x
        detail["ratio_residual"] = abs(partial - target / x)
    steps.append(StepRecord(
        "final", f"{which} x = x (1 {'+' if which == 'sinh' else '-'} x^2/pi^2)(1 {'+' if which == 'sinh' else '-'} x^2/(4pi^2)) ...",
        f"x * prod_(k<={K}) (1 {'+' if which == 'sinh' else '-'} x^2/(k^2 pi^2)) approaches {which} x within the tail bound",
        residual, bound, residual <= bound * (1 + 1e-9) + 1e-15, detail,
    ))

    config = {"x": x, "which": which, "factors": K, "truncation": truncation, **_schedule_config(index),
              "points_used": ns,
              "tolerances": {"factorization": factorization_tolerance, "normalization": normalization_tolerance},
              "mode": "approx"}
    return DerivationReport(f"{which}-product", steps, config)


# --- Wallis and Basel ----------------------------------------------------------------


def wallis_partial(N: int) -> Fraction:
    """Exact ``prod_{n<=N} (2n/(2n-1)) (2n/(2n+1))``.

    Evaluated through the closed form ``16^N (N!)^4 / ((2N)!^2 (2N+1))`` so a
    single reduction is needed.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    f = math.factorial(N)
    g = math.factorial(2 * N)
    return Fraction(16**N * f**4, g * g * (2 * N + 1))


def wallis_partials(N: int) -> np.ndarray:
    """Floating partial Wallis products for ``1..N``."""
    n = np.arange(1, N + 1, dtype=float)
    return np.cumprod(4 * n * n / (4 * n * n - 1))


def _inverse_square_sum(N: int) -> Fraction:
    L = math.lcm(*range(1, N + 1)) ** 2
    return Fraction(sum(L // (k * k) for k in range(1, N + 1)), L)


def basel_partial(N: int, route: str = "direct-sum") -> tuple[Fraction, DerivationReport]:
    """Partial sum of ``1 + 1/4 + 1/9 + ...`` by direct summation or by Vieta.

    ``coefficient-comparison`` expands ``x prod_{k<=N}(1 - x^2/(k^2 pi^2))`` to
    order ``x^3``.  With ``u = x^2/pi^2`` as an exact infinitesimal the
    ``x^3`` coefficient is ``c3 = -(sum 1/k^2)/pi^2``; the rational part is
    recovered exactly and compared with the direct sum.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    direct = _inverse_square_sum(N)
    target = PI * PI / 6
    steps = []
    if route == "direct-sum":
        value = direct
        residual = abs(float(direct) - target)
        steps.append(StepRecord(
            "direct-sum", "1 + 1/4 + 1/9 + 1/16 + ... = pi^2/6",
            f"sum_(k<={N}) 1/k^2 is within the tail bound 1/N of pi^2/6",
            residual, 1.0 / N, residual <= 1.0 / N, {"value": direct},
        ))
    elif route == "coefficient-comparison":
        u = eps(2)
        prod = LaurentNumber.constant(1, 2)
        for k in range(1, N + 1):
            prod = prod * (1 - u / (k * k))
        linear = prod.coefficient(1)
        value = -Fraction(linear)
        gap = abs(value - direct)
        steps.append(StepRecord(
            "vieta", "sin x = x(1 - x^2/pi^2)(1 - x^2/(4pi^2)) ...",
            "the x^3 coefficient of the product is minus the sum of 1/(k^2 pi^2), exactly",
            gap, Fraction(0), gap == 0, {"c3_times_pi2": linear},
        ))
        c3 = float(linear) / (PI * PI)
        res = abs(c3 + 1 / 6)
        bound = 1.0 / (PI * PI * N)
        steps.append(StepRecord(
            "maclaurin-match", "sin x = x - x^3/6 + ...",
            "the x^3 coefficient approaches the Maclaurin value -1/6",
            res, bound, res <= bound, {"c3": c3},
        ))
    else:
        raise ValueError("route must be 'direct-sum' or 'coefficient-comparison'")
    config = {"N": N, "route": route, "mode": "exact"}
    return value, DerivationReport("basel", steps, config)


# --- l'Hopital protolimit --------------------------------------------------------------


class ProtolimitResult(NamedTuple):
    expansion: LaurentNumber
    shadow: float


def lhopital_protolimit(x: float, truncation: int = DEFAULT_TRUNCATION) -> ProtolimitResult:
    """Evaluate ``(1 - x^z)/z`` at an infinitesimal ``z`` and take its shadow ``-log x``."""
    if x <= 0:
        raise DomainError("x must be positive")
    if x == 1:
        raise DomainError("x = 1 makes 1 - x^z vanish identically")
    z = eps(truncation)
    power = lift_smooth("exp", z * math.log(x))
    expansion = (1 - power) / z
    return ProtolimitResult(expansion, float(expansion.coefficient(0)))
