"""Hyperreals as sequences evaluated along a finite schedule of indices.

An infinite integer ``i`` is stood in for by a schedule of growing finite
integers ``n_0 < n_1 < ... < n_m``.  A hyperfinite sum ``a_1 + ... + a_i``
becomes the sequence of ordinary sums at each ``n_j``, and its shadow is
estimated by extrapolating that sequence to ``1/n -> 0``.

Nothing here is a proof about all infinite indices: every verdict reports
the finite evidence it was computed from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceDetected, EvaluationError, PrerequisiteFailed

__all__ = [
    "ConditionResult",
    "EConvergenceVerdict",
    "InfiniteIndex",
    "SeqHyperreal",
    "ShadowEstimate",
    "TransferReport",
    "econvergence_check",
    "hyperfinite_integral",
    "hyperfinite_product",
    "hyperfinite_sum",
    "seq_shadow",
    "termwise_transfer_check",
]

# successive growth increments shrinking by less than this factor are
# treated as sustained growth
_GROWTH_RATIO = 0.9


@dataclass(frozen=True)
class InfiniteIndex:
    """Finite stand-ins for an infinite integer.

    The default schedule is ``10 * 2**j`` for ``j = 0..14``.
    """

    schedule: tuple[int, ...] = tuple(10 * 2**j for j in range(15))
    symbol: str = "i"
    parity: str | None = None

    def __post_init__(self):
        sched = tuple(int(n) for n in self.schedule)
        object.__setattr__(self, "schedule", sched)
        if len(sched) < 5:
            raise ValueError("schedule needs at least 5 points for extrapolation")
        if sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("schedule must be strictly increasing positive integers")
        if self.parity not in (None, "even", "odd"):
            raise ValueError(f"unknown parity {self.parity!r}")
        want = {"even": 0, "odd": 1}.get(self.parity)
        if want is not None and any(n % 2 != want for n in sched):
            raise ValueError(f"schedule violates parity constraint {self.parity!r}")

    @classmethod
    def geometric(
        cls, base: int = 10, ratio: int = 2, count: int = 15, symbol: str = "i", parity: str | None = None
    ) -> InfiniteIndex:
        points = []
        for j in range(count):
            n = int(base * ratio**j)
            if parity == "even" and n % 2:
                n += 1
            elif parity == "odd" and n % 2 == 0:
                n += 1
            points.append(n)
        return cls(tuple(points), symbol, parity)

    def __len__(self):
        return len(self.schedule)

    def __iter__(self):
        return iter(self.schedule)


DEFAULT_INDEX = InfiniteIndex()


class SeqHyperreal:
    """A quantity given by a rule ``n -> value`` sampled on an index schedule."""

    def __init__(self, rule: Callable[[int], object], index: InfiniteIndex | None = None, label: str = ""):
        self.rule = rule
        self.index = index or DEFAULT_INDEX
        self.label = label
        self._values: tuple | None = None

    @property
    def schedule(self) -> tuple[int, ...]:
        return self.index.schedule

    @property
    def values(self) -> tuple:
        if self._values is None:
            self._values = tuple(self.rule(n) for n in self.index.schedule)
        return self._values

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values)

    def at(self, n: int):
        return self.rule(n)

    def shadow(self, tolerance: float = 1e-8) -> ShadowEstimate:
        return seq_shadow(self, tolerance)

    def _lift(self, other, op, label):
        if isinstance(other, SeqHyperreal):
            return SeqHyperreal(lambda n: op(self.rule(n), other.rule(n)), self.index, label)
        return SeqHyperreal(lambda n: op(self.rule(n), other), self.index, label)

    def __add__(self, other):
        return self._lift(other, lambda a, b: a + b, f"({self.label}) + c")

    __radd__ = __add__

    def __sub__(self, other):
        return self._lift(other, lambda a, b: a - b, f"({self.label}) - c")

    def __mul__(self, other):
        return self._lift(other, lambda a, b: a * b, f"({self.label}) * c")

    __rmul__ = __mul__

    def __neg__(self):
        return SeqHyperreal(lambda n: -self.rule(n), self.index, f"-({self.label})")

    def __repr__(self):
        return f"SeqHyperreal({self.label or self.rule!r}, schedule={self.schedule[0]}..{self.schedule[-1]})"


# --- term evaluation ----------------------------------------------------------


def _float_terms(term: Callable, lo: int, hi: int, *args) -> np.ndarray:
    """Evaluate ``term(k, *args)`` for ``k = lo..hi`` as a float array.

    Tries one vectorised call first and falls back to a Python loop, which
    also pinpoints the offending ``k`` when a value is undefined.
    """
    if hi < lo:
        return np.zeros(0)
    ks = np.arange(lo, hi + 1, dtype=float)
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(term(ks, *args), dtype=float)
        if out.shape == ():
            out = np.full(ks.shape, float(out))
        if out.shape == ks.shape and np.all(np.isfinite(out)):
            return out
    except Exception:
        pass
    vals = np.empty(ks.shape)
    for idx, k in enumerate(range(lo, hi + 1)):
        try:
            v = float(term(k, *args))
        except Exception as exc:
            raise EvaluationError(f"term rule failed at k={k}{_fmt_args(args)}: {exc}") from exc
        if not math.isfinite(v):
            raise EvaluationError(f"term rule is not finite at k={k}{_fmt_args(args)}")
        vals[idx] = v
    return vals


def _fmt_args(args) -> str:
    return f", n={args[0]}" if args else ""


def _exact_terms(term: Callable, lo: int, hi: int, *args) -> list:
    vals = []
    for k in range(lo, hi + 1):
        try:
            v = term(k, *args)
        except Exception as exc:
            raise EvaluationError(f"term rule failed at k={k}{_fmt_args(args)}: {exc}") from exc
        if isinstance(v, float) and not math.isfinite(v):
            raise EvaluationError(f"term rule is not finite at k={k}{_fmt_args(args)}")
        vals.append(v)
    return vals


def _exact_sum(vals: list):
    if any(isinstance(v, float) for v in vals):
        return math.fsum(float(v) for v in vals)
    return sum(vals, Fraction(0))


def _exact_prod(vals: list):
    if any(isinstance(v, float) for v in vals):
        return math.prod(float(v) for v in vals)
    return math.prod(vals, start=Fraction(1))


def _check_mode(mode: str):
    if mode not in ("exact", "approx"):
        raise ValueError(f"mode must be 'exact' or 'approx', not {mode!r}")


def hyperfinite_sum(
    term: Callable,
    index: InfiniteIndex | None = None,
    *,
    upper: Callable[[int], int] | None = None,
    lower: int = 1,
    mode: str = "approx",
) -> SeqHyperreal:
    """``sum_{k=lower}^{upper(n)} term(k, n)`` at every schedule point ``n``.

    ``upper`` defaults to ``n``.  In exact mode the terms are summed as
    rationals; a rule returning floats silently falls back to ``math.fsum``.
    """
    _check_mode(mode)
    upper = upper or (lambda n: n)

    if mode == "exact":
        def rule(n):
            return _exact_sum(_exact_terms(term, lower, upper(n), n))
    else:
        def rule(n):
            return math.fsum(_float_terms(term, lower, upper(n), n))

    return SeqHyperreal(rule, index, label="hyperfinite sum")


def hyperfinite_product(
    factor: Callable,
    index: InfiniteIndex | None = None,
    *,
    upper: Callable[[int], int] | None = None,
    lower: int = 1,
    mode: str = "approx",
) -> SeqHyperreal:
    """``prod_{k=lower}^{upper(n)} factor(k, n)`` at every schedule point ``n``."""
    _check_mode(mode)
    upper = upper or (lambda n: n)

    if mode == "exact":
        def rule(n):
            return _exact_prod(_exact_terms(factor, lower, upper(n), n))
    else:
        def rule(n):
            return float(np.prod(_float_terms(factor, lower, upper(n), n)))

    return SeqHyperreal(rule, index, label="hyperfinite product")


def hyperfinite_integral(
    integrand: Callable,
    a,
    b,
    index: InfiniteIndex | None = None,
    *,
    mode: str = "approx",
) -> SeqHyperreal:
    """Left Riemann sum ``alpha * sum_{j<n} f(a + j*alpha)`` with ``alpha = (b-a)/n``.

    In exact mode ``a`` and ``b`` are taken as rationals and the sample
    points are exact.
    """
    _check_mode(mode)
    if not a < b:
        raise ValueError("integration bounds need a < b")

    if mode == "exact":
        fa, fb = Fraction(a), Fraction(b)

        def rule(n):
            alpha = (fb - fa) / n
            vals = _exact_terms(lambda j: integrand(fa + j * alpha), 0, n - 1)
            return alpha * _exact_sum(vals)
    else:
        fa, fb = float(a), float(b)

        def rule(n):
            alpha = (fb - fa) / n
            vals = _float_terms(lambda j: integrand(fa + j * alpha), 0, n - 1)
            return alpha * math.fsum(vals)

    return SeqHyperreal(rule, index, label="hyperfinite integral")


# --- shadow extrapolation -----------------------------------------------------


@dataclass(frozen=True)
class ShadowEstimate:
    value: float
    error_bound: float
    method: str  # "richardson" or "raw-limit"
    order: int | None
    converged: bool
    diagnostic: str = ""


def _growth_profile(ns: Sequence[int], vals: Sequence[float], window: int = 4) -> tuple[str, float]:
    """Classify the tail of a sequence as ``divergent``, ``settling`` or ``unclear``.

    Increments are normalised by ``log(n_{j+1}/n_j)`` so the test does not
    depend on the schedule spacing.  Returns the class and the last
    normalised increment (growth per e-fold of ``n``).
    """
    g = [
        (vals[j + 1] - vals[j]) / math.log(ns[j + 1] / ns[j])
        for j in range(max(0, len(vals) - 1 - window), len(vals) - 1)
    ]
    last = g[-1] if g else 0.0
    if all(x == 0 for x in g):
        return "settling", 0.0
    signs = {x > 0 for x in g if x != 0}
    ratios = [abs(b) / abs(a) for a, b in zip(g, g[1:]) if a != 0]
    if len(signs) == 1 and all(x != 0 for x in g) and ratios and min(ratios) >= _GROWTH_RATIO:
        return "divergent", last
    tail = ratios[-2:]
    if tail and max(tail) < _GROWTH_RATIO:
        return "settling", last
    if abs(last) == 0:
        return "settling", last
    return "unclear", last


def _richardson_tableau(hs: Sequence[float], vals: Sequence[float], max_order: int) -> list[list[float]]:
    """Neville tableau for polynomial extrapolation in ``h`` to ``h = 0``.

    ``R[i][j]`` combines points ``i-j..i`` and cancels ``h, ..., h**j``.
    """
    m = len(vals)
    R = [[v] for v in vals]
    for j in range(1, min(max_order, m - 1) + 1):
        for i in range(j, m):
            hi, hl = hs[i], hs[i - j]
            R[i].append((hl * R[i][j - 1] - hi * R[i - 1][j - 1]) / (hl - hi))
    return R


def seq_shadow(x: SeqHyperreal | Sequence, tolerance: float = 1e-8, *, index: InfiniteIndex | None = None,
               max_order: int = 8) -> ShadowEstimate:
    """Estimate the shadow of a sequence hyperreal.

    Richardson extrapolation in ``1/n`` picks the order whose last two
    extrapolants agree best; their difference is the reported error bound.
    When no order beats the raw difference of the last two samples the raw
    last value is returned instead.

    Raises
    ------
    DivergenceDetected
        If the samples grow without sign of settling.
    """
    if isinstance(x, SeqHyperreal):
        ns, raw = x.schedule, x.values
    else:
        ns, raw = (index or DEFAULT_INDEX).schedule, tuple(x)
    if len(raw) < 5:
        raise ValueError("need at least 5 schedule evaluations")
    vals = [float(v) for v in raw]
    if not all(math.isfinite(v) for v in vals):
        raise DivergenceDetected("sequence overflows along the schedule")
    kind, growth = _growth_profile(ns, vals)
    if kind == "divergent":
        raise DivergenceDetected(
            f"monotone growth of about {growth:.4g} per e-fold of n across the schedule", growth
        )

    raw_err = abs(vals[-1] - vals[-2])
    if raw_err == 0.0:
        return ShadowEstimate(vals[-1], 0.0, "raw-limit", None, 0.0 <= tolerance, "sequence is constant at the tail")

    hs = [1.0 / n for n in ns]
    R = _richardson_tableau(hs, vals, max_order)
    m = len(vals)
    best = None
    for j in range(1, len(R[-1])):
        if len(R[m - 2]) <= j:
            break
        err = abs(R[m - 1][j] - R[m - 2][j])
        if best is None or err < best[1]:
            best = (j, err)
    if best is not None and best[1] < raw_err:
        j, err = best
        diag = ""
        if err > 0.5 * raw_err:
            diag = "extrapolation gains little; error law may not be a power series in 1/n"
        return ShadowEstimate(R[m - 1][j], err, "richardson", j, err <= tolerance, diag)
    return ShadowEstimate(
        vals[-1], raw_err, "raw-limit", None, raw_err <= tolerance,
        "extrapolation unstable; error law is not a power series in 1/n",
    )


# --- E-convergence ------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    status: str  # "pass", "fail" or "inconclusive"
    evidence: str
    data: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class EConvergenceVerdict:
    kind: str
    condition_i: ConditionResult
    condition_ii: ConditionResult
    condition_iii: ConditionResult
    schedule: tuple[int, ...]
    partials: tuple[float, ...]
    shadow: ShadowEstimate | None = None

    @property
    def overall(self) -> str:
        statuses = [c.status for c in (self.condition_i, self.condition_ii, self.condition_iii)]
        if all(s == "pass" for s in statuses):
            return "pass"
        if "fail" in statuses:
            return "fail"
        return "inconclusive"

    @property
    def passed(self) -> bool:
        return self.overall == "pass"

    def to_dict(self) -> dict:
        def cond(c):
            return {"status": c.status, "evidence": c.evidence, "data": list(c.data)}

        out = {
            "kind": self.kind,
            "condition_i": cond(self.condition_i),
            "condition_ii": cond(self.condition_ii),
            "condition_iii": cond(self.condition_iii),
            "schedule": list(self.schedule),
            "partials": list(self.partials),
            "overall": self.overall,
        }
        if self.shadow is not None:
            out["shadow"] = {
                "value": self.shadow.value,
                "error_bound": self.shadow.error_bound,
                "method": self.shadow.method,
                "order": self.shadow.order,
                "converged": self.shadow.converged,
            }
        return out


def _tail_trend(tails: Sequence[float]) -> str:
    mags = [abs(t) for t in tails]
    recent = mags[-4:]
    if all(m == 0 for m in recent):
        return "vanishing"
    ratios = [b / a for a, b in zip(recent, recent[1:]) if a != 0]
    if ratios and min(ratios) >= _GROWTH_RATIO:
        return "persistent"
    if all(b <= a for a, b in zip(recent, recent[1:])):
        return "decreasing"
    return "irregular"


def econvergence_check(
    kind: str,
    term: Callable,
    index: InfiniteIndex | None = None,
    tolerance: float = 1e-5,
) -> EConvergenceVerdict:
    """Finite-evidence test of the three E-convergence conditions.

    For ``kind="sum"`` the rule gives ``a_k``; for ``kind="product"`` it gives
    ``b_k`` and the factors are ``1 + b_k``.

    (i) is accepted for every evaluable rule.  (ii) asks that the partial
    aggregates along the schedule show no sustained growth.  (iii) asks that
    the block tails over ``(n_j, n_{j+1}]`` shrink, ending below
    ``tolerance`` (distance from 1 for products).
    """
    if kind not in ("sum", "product"):
        raise ValueError("kind must be 'sum' or 'product'")
    index = index or DEFAULT_INDEX
    ns = index.schedule
    vals = _float_terms(term, 1, ns[-1])
    cond_i = ConditionResult("pass", "term rule is an evaluable closed form; accepted by construction")

    if kind == "sum":
        cumulative = np.cumsum(vals)
        tails = [math.fsum(vals[a:b]) for a, b in zip(ns, ns[1:])]
    else:
        factors = 1.0 + vals
        cumulative = np.cumprod(factors)
        tails = []
        for a, b in zip(ns, ns[1:]):
            block = factors[a:b]
            if np.all(block > 0):
                tails.append(float(np.expm1(np.sum(np.log(block)))))
            else:
                tails.append(float(np.prod(block)) - 1.0)
    partials = tuple(float(cumulative[n - 1]) for n in ns)

    what = "partial sums" if kind == "sum" else "partial products"
    if not all(math.isfinite(p) for p in partials):
        cond_ii = ConditionResult("fail", f"{what} overflow along the schedule", partials)
    else:
        profile, growth = _growth_profile(ns, partials)
        if profile == "divergent":
            cond_ii = ConditionResult(
                "fail", f"{what} grow by about {growth:.4g} per e-fold of n (unbounded, log-like or faster)", partials
            )
        elif profile == "settling":
            cond_ii = ConditionResult("pass", f"{what} settle; last growth {growth:.3g} per e-fold of n", partials)
        else:
            cond_ii = ConditionResult("inconclusive", f"{what} neither settle nor grow steadily", partials)

    trend = _tail_trend(tails)
    last = abs(tails[-1])
    label = "block sums" if kind == "sum" else "block products minus 1"
    if trend == "persistent" and last > tolerance:
        cond_iii = ConditionResult("fail", f"{label} do not shrink (last {last:.4g})", tuple(tails))
    elif trend in ("decreasing", "vanishing") and last <= tolerance:
        cond_iii = ConditionResult("pass", f"{label} shrink to {last:.4g} <= {tolerance:g}", tuple(tails))
    else:
        cond_iii = ConditionResult(
            "inconclusive", f"{label} {trend}, last {last:.4g} vs tolerance {tolerance:g}", tuple(tails)
        )

    estimate = None
    if cond_ii.status == "pass":
        try:
            estimate = seq_shadow(partials, index=index)
        except DivergenceDetected:
            estimate = None
    return EConvergenceVerdict(kind, cond_i, cond_ii, cond_iii, ns, partials, estimate)


# --- termwise transfer checks ----------------------------------------------


@dataclass(frozen=True)
class TransferReport:
    kind: str
    schedule: tuple[int, ...]
    aggregate_gaps: tuple[float, ...]
    term_gaps: tuple[float, ...]
    decreasing: bool
    final_gap: float
    tolerance: float
    coefficient_gaps: tuple[float, ...] | None = None
    prerequisites: tuple[EConvergenceVerdict, EConvergenceVerdict] | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        ok = self.decreasing and self.final_gap <= self.tolerance
        if self.coefficient_gaps is not None:
            ok = ok and _nonincreasing(self.coefficient_gaps)
        return ok

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "schedule": list(self.schedule),
            "aggregate_gaps": list(self.aggregate_gaps),
            "term_gaps": list(self.term_gaps),
            "decreasing": self.decreasing,
            "final_gap": self.final_gap,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.coefficient_gaps is not None:
            out["coefficient_gaps"] = list(self.coefficient_gaps)
        return out


def _nonincreasing(xs: Sequence[float]) -> bool:
    return all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(xs, xs[1:]))


def termwise_transfer_check(
    a: Callable,
    b: Callable,
    index: InfiniteIndex | None = None,
    tolerance: float = 1e-4,
    *,
    kind: str = "sum",
    lower: int = 1,
    upper: Callable[[int], int] | None = None,
    coefficient_orders: int | None = None,
    check_prerequisites: bool = True,
) -> TransferReport:
    """Compare two hyperfinite aggregates whose terms agree up to small gaps.

    Rules take ``(k, n)``.  At each schedule point the aggregates over
    ``k = lower..upper(n)`` are compared: ``|sum a - sum b|`` for sums,
    ``|prod(1+a)/prod(1+b) - 1|`` for products.  The check passes when these
    gaps shrink along the schedule and end below ``tolerance``.

    With ``coefficient_orders=R`` the termwise gaps ``|a(r, n) - b(r, n)|``
    for ``r = lower..R`` are also required to shrink; this is the
    coefficient-recovery direction (close expansions have close
    coefficients).

    Both rules must pass :func:`econvergence_check` when frozen at the largest
    schedule point; otherwise :class:`PrerequisiteFailed` is raised.
    """
    if kind not in ("sum", "product"):
        raise ValueError("kind must be 'sum' or 'product'")
    index = index or DEFAULT_INDEX
    ns = index.schedule
    upper = upper or (lambda n: n)

    prereq = None
    if check_prerequisites:
        n_max = ns[-1]
        verdicts = tuple(
            econvergence_check(kind, lambda k, r=rule: r(k, n_max), index) for rule in (a, b)
        )
        for name, v in zip("ab", verdicts):
            if not v.passed:
                raise PrerequisiteFailed(f"rule {name} is not E-convergent on the schedule ({v.overall})")
        prereq = verdicts

    agg, term_gaps = [], []
    for n in ns:
        va = _float_terms(a, lower, upper(n), n)
        vb = _float_terms(b, lower, upper(n), n)
        term_gaps.append(float(np.max(np.abs(va - vb))) if len(va) else 0.0)
        if kind == "sum":
            agg.append(abs(math.fsum(va) - math.fsum(vb)))
        else:
            fa, fb = 1.0 + va, 1.0 + vb
            if np.all(fa > 0) and np.all(fb > 0):
                agg.append(abs(float(np.expm1(np.sum(np.log(fa)) - np.sum(np.log(fb))))))
            else:
                agg.append(abs(float(np.prod(fa) / np.prod(fb)) - 1.0))

    coeff = None
    if coefficient_orders is not None:
        coeff = []
        for n in ns:
            hi = min(coefficient_orders, upper(n))
            va = _float_terms(a, lower, hi, n)
            vb = _float_terms(b, lower, hi, n)
            coeff.append(float(np.max(np.abs(va - vb))) if len(va) else 0.0)
        coeff = tuple(coeff)

    half = len(agg) // 2
    return TransferReport(
        kind=kind,
        schedule=ns,
        aggregate_gaps=tuple(agg),
        term_gaps=tuple(term_gaps),
        decreasing=_nonincreasing(agg[half:]),
        final_gap=agg[-1],
        tolerance=tolerance,
        coefficient_gaps=coeff,
        prerequisites=prereq,
    )
