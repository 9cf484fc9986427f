"""
Working with infinitesimals
===========================

A tour of the truncated Laurent field: the generator ``eps``, its inverse
``omega``, the shadow, leading-term truncation and the two weak equalities.
"""

from fractions import Fraction

from leibniz_euler import (
    eps,
    eq_modal,
    evaluate,
    format_laurent,
    is_archimedean_pair,
    lhopital_protolimit,
    omega,
    shadow,
    tlh_truncate,
)

# a first-order increment and its ratio to the base quantity
dx = eps()
q = (dx + dx**2) / dx
print("(dx + dx^2)/dx =", format_laurent(q))
print("its shadow      =", shadow(q))

# omega is infinite, so it has no shadow, but products with eps are finite
print("omega * eps     =", format_laurent(omega() * dx))

# keeping only the dominant term
x = 3 * dx**2 + 7 * dx**5
print("tlh(3 eps^2 + 7 eps^5) =", format_laurent(tlh_truncate(x)))

# a + n*dx equals a up to an infinitesimal (arithmetic), and the ratio
# (a + n*dx)/a has shadow 1 (geometric)
a = 3 + 7 * dx
print("arithmetic:", eq_modal(a, 3, "arithmetic"), " geometric:", eq_modal(a, 3, "geometric"))
# eps and 2*eps differ by an infinitesimal, but their ratio is 2
print("eps vs 2 eps, arithmetic:", eq_modal(dx, 2 * dx, "arithmetic"),
      " geometric:", eq_modal(dx, 2 * dx, "geometric"))

# no finite multiple of eps reaches 1
print("is (eps, 1) Archimedean?", is_archimedean_pair(dx, 1))
print("is (2, 7) Archimedean? ", is_archimedean_pair(2, 7))

# exact rationals survive division
print("1/(1 - eps) to T=4:", format_laurent(1 / (1 - eps(4))))
print("with rational coefficients:", format_laurent(Fraction(1, 3) / (3 - eps(3))))

# the expression language reads the same notation
for src in ("st((dx + dx^2)/dx)", "geq(3 + 7*dx, 3)", "val(3*eps^2 + eps^5)", "exp(eps)"):
    value = evaluate(src, truncation=5)
    print(f"{src:24} -> {value if isinstance(value, bool) else format_laurent(value)}")

# (1 - x^z)/z at infinitesimal z: the shadow is -log x
res = lhopital_protolimit(2.0, truncation=4)
print("(1 - 2^z)/z =", format_laurent(res.expansion))
print("shadow      =", res.shadow)
