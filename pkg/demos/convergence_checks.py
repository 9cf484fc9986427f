"""
Hyperfinite sums and convergence checks
=======================================

Sequences evaluated along a schedule of finite stand-ins for an infinite
index, their extrapolated shadows, and the three-condition convergence test.
"""

import math

from leibniz_euler import (
    InfiniteIndex,
    check_step4_replacement,
    econvergence_check,
    hyperfinite_integral,
    hyperfinite_sum,
    seq_shadow,
)
from leibniz_euler.errors import DivergenceDetected

# the default schedule doubles from 10 up to 163840
idx = InfiniteIndex.geometric(10, 2, 15)
print("schedule:", idx.schedule[:4], "...", idx.schedule[-1])

# sum of 1/k^2 up to the infinite index, and its shadow by Richardson extrapolation
s = hyperfinite_sum(lambda k, n: 1.0 / k**2, idx)
est = seq_shadow(s)
print(f"shadow {est.value:.12f} vs pi^2/6 = {math.pi**2 / 6:.12f} (order {est.order})")

# the harmonic sum has no shadow
try:
    seq_shadow(hyperfinite_sum(lambda k, n: 1.0 / k, idx))
except DivergenceDetected as exc:
    print("harmonic:", exc)

# Riemann sums of x^2 on [0, 1]
est = seq_shadow(hyperfinite_integral(lambda x: x * x, 0.0, 1.0, idx))
print(f"integral of x^2: {est.value!r}")

# three verdicts: geometric and Wallis-pair pass, harmonic fails (ii)
for kind, name, rule in (
    ("sum", "2^-k", lambda k: 2.0**-k),
    ("sum", "1/k", lambda k: 1.0 / k),
    ("product", "1/(4k^2-1)", lambda k: 1 / (4.0 * k * k - 1)),
):
    v = econvergence_check(kind, rule, idx)
    print(f"{kind:7} {name:11} (i) {v.condition_i.status:5} (ii) {v.condition_ii.status:5} "
          f"(iii) {v.condition_iii.status:5} -> {v.overall}")

# replacing cos(2k pi/n) by its quadratic Taylor polynomial perturbs each
# factor by p_k x^2 with |p_k| k^2 <= gamma = 1/4 - 1/pi^2
lemma = check_step4_replacement(1.0, 500, InfiniteIndex((100, 200, 400, 800, 3125, 6250, 12500, 25000)))
print(f"gamma = {lemma.gamma:.6f} (1/4 - 1/pi^2 = {0.25 - 1 / math.pi**2:.6f}), validated={lemma.validated}")
for a, b, r in lemma.p1_ratios[-3:]:
    print(f"  p_1({a}) / p_1({b}) = {r:.5f}")
