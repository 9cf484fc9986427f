"""Computable model of the Leibniz-Euler infinitesimal calculus.

A truncated Laurent-series field supplies infinitesimals and infinite
numbers; a sequence model stands in for hyperfinite sums and products; the
``euler`` module audits Euler's classical derivations step by step.
"""

from __future__ import annotations

from .errors import (
    DivergenceDetected,
    DivisionByZero,
    DomainError,
    EvaluationError,
    FactorizationMismatch,
    FitFailure,
    GeometricZeroDenominator,
    NonArchError,
    NonFiniteCoefficient,
    NonpositiveInput,
    NormalizationFailure,
    PrerequisiteFailed,
    TruncationUnderflow,
    UnlimitedInput,
    ZeroInput,
)
from .euler import (
    DerivationReport,
    StepRecord,
    basel_partial,
    check_step2_factorization,
    check_step4_replacement,
    derive_exp_series,
    derive_sine_product,
    lhopital_protolimit,
    wallis_partial,
)
from .expr import evaluate, format_number, parse
from .nonarch import (
    DEFAULT_TRUNCATION,
    EqualityModality,
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
from .sequence import (
    DEFAULT_INDEX,
    InfiniteIndex,
    SeqHyperreal,
    econvergence_check,
    hyperfinite_integral,
    hyperfinite_product,
    hyperfinite_sum,
    seq_shadow,
    termwise_transfer_check,
)

__version__ = "0.1.0"
