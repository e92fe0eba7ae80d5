"""The dual of S3: convolution of point functionals reproduces the group law.

For the dual of a finite group the reduced functionals are just functions on
the group, and convolution of point masses is multiplication in the group.
The unit of the dual is found by solving the unit equations, not assumed.
"""

import itertools

from dqgm import (
    LEFT,
    Element,
    ReducedFunctional,
    convolve,
    dual_of_group,
    dual_unit,
    symmetric_group,
    verify_mhopf_axioms,
)

g = symmetric_group(3)
s3 = dual_of_group(g)


def point(k):
    return ReducedFunctional(s3.haar, Element.unit(s3.algebra, k), LEFT)


print("convolution table, entries are indices of permutations:")
for k, p in enumerate(g.labels):
    print(f"  {k} = {p}")
print("     " + " ".join(str(b) for b in range(6)))
for a in range(6):
    row = []
    for b in range(6):
        (c,) = convolve(point(a), point(b), s3).support
        row.append(str(c))
    print(f"  {a}: " + " ".join(row))

u = dual_unit(s3)
print("\nunit of the dual is supported on", u.support, "- the identity permutation is", g.labels[g.identity])

assoc = all(
    convolve(convolve(point(a), point(b), s3), point(c), s3).equals(convolve(point(a), convolve(point(b), point(c), s3), s3))
    for a, b, c in itertools.product(range(6), repeat=3)
)
print("associative on all 216 basis triples:", assoc)

report = verify_mhopf_axioms(s3)
print("multiplier Hopf axioms (with the opposite comultiplication):", report.passed)
