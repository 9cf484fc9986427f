"""
Replaying classical derivations
===============================

Step reports for the binomial route to the exponential series and for the
product formula of the sine, followed by the Wallis and Basel partials.
"""

import math

from leibniz_euler import (
    InfiniteIndex,
    basel_partial,
    derive_exp_series,
    derive_sine_product,
    wallis_partial,
)

# (1 + kz/i)^i with i infinite: each coefficient C(i, r)/i^r tends to 1/r!
report = derive_exp_series(k=1, z=1, r_max=10)
print(report.to_text())

# residuals of the truncated series along the schedule halve with n
cum = report.step("cumulative").detail
for n, r in zip(cum["schedule"][-4:], cum["residuals"][-4:]):
    print(f"  n={n:7d}  residual={r:.3e}")

# the sine product at x = pi/2 reproduces 2/pi = prod(1 - 1/(4k^2))
report = derive_sine_product(math.pi / 2, "sin", factors=100)
print()
print(report.to_text())
final = report.step("final").detail
print(f"partial product {final['partial_product']:.6f} vs 2/pi = {2 / math.pi:.6f}")

# more factors shrink the final residual roughly like 1/K
print()
for K in (10, 100, 1000):
    r = derive_sine_product(math.pi / 2, "sin", K).step("final").residual
    print(f"  K={K:5d}  residual={r:.3e}  residual*K={r * K:.4f}")

# the hyperbolic variant uses the same seven steps
idx = InfiniteIndex.geometric(500, 2, 6)
print()
print("sinh at x=1:", derive_sine_product(1.0, "sinh", 200, idx).overall)

# Wallis: partial products increase towards pi/2
print()
for N in (1, 2, 10, 1000):
    w = wallis_partial(N)
    print(f"  W_{N:<5d} = {float(w):.10f}  (gap {math.pi / 2 - float(w):.2e})")

# Basel: the direct sum and the coefficient of x^3 in the sine product agree
print()
for route in ("direct-sum", "coefficient-comparison"):
    value, rep = basel_partial(50, route)
    print(f"  {route:24} S_50 = {float(value):.12f}  overall={rep.overall}")
