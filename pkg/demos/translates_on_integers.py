"""Which functions on Z have a finite-dimensional space of translates?

Functions on the integers form the multiplier algebra of the dual of Z.  For
x in it, the slices of delta(x)(g, n) = x(g + n) are exactly the translates of
x, so x is almost periodic precisely when its translates span a finite
dimensional space.  We test three candidates.
"""

from fractions import Fraction

from dqgm import (
    EXACT,
    CharacterRule,
    Multiplier,
    PointMassRule,
    PolynomialRule,
    dual_of_group,
    integers,
    is_almost_periodic,
)

Z = dual_of_group(integers())
A = Z.algebra

candidates = {
    "i**n": CharacterRule(Fraction(1, 4)),
    "n": PolynomialRule((0, 1)),
    "n**2 + 1": PolynomialRule((1, 0, 1)),
    "delta_0": PointMassRule(0),
}

for name, rule in candidates.items():
    res = is_almost_periodic(Multiplier(A, rule), Z, budget=4)
    dims = res.slices.dimensions
    print(f"{name:>9}: {res.verdict:<22} dimension history {dims}")

# The translate example in detail: delta(x) = x (x) 1 + 1 (x) x, recovered up to a change of basis.
res = is_almost_periodic(Multiplier(A, PolynomialRule((0, 1))), Z)
fac = res.factorization
print("\nfactor pairs on a few blocks (x_k(g), y_k(n)):")
for k, (x, y) in enumerate(zip(fac.x, fac.y)):
    xs = [x.block(g)[0, 0] for g in range(-2, 3)]
    ys = [y.block(n)[0, 0] for n in range(-2, 3)]
    print(f"  k={k}: x = {[str(v) for v in xs]}, y = {[str(v) for v in ys]}")
print("sum_k x_k(7) y_k(-3) =", fac.product(7, -3, EXACT)[0, 0])
print("checked", fac.pairs_checked, "block pairs, including probes outside the window")
