"""The dual of SU(2) in float mode: matrix blocks and Clebsch-Gordan fusion.

Block j (doubled spin) is M_{j+1}.  The Haar functional has weights
d_j = j + 1, and (id (x) phi) delta(a) = phi(a) 1 holds up to rounding.
The unit multiplier is almost periodic (rank one); a point mass on a
block is not.
"""

import numpy as np

from dqgm import (
    IdentityRule,
    Multiplier,
    PointMassRule,
    dual_of_su2,
    is_almost_periodic,
    verify_fusion,
    verify_left_invariance,
)
from dqgm.slicing import random_element

su = dual_of_su2(3)
win = su.algebra.window(0).indices
rng = np.random.default_rng(0)

fus = verify_fusion(su, win)
print(f"fusion on spins {win}: isometry error {fus.max_isometry_error:.1e}, completeness error {fus.max_completeness_error:.1e}")

worst = max(verify_left_invariance(su, random_element(su.algebra, win, rng), win).max_deviation for _ in range(10))
print(f"left invariance, 10 random elements: max deviation {worst:.1e}")

one = is_almost_periodic(Multiplier(su.algebra, IdentityRule()), su, budget=3)
print("identity:", one.verdict, "dimension", one.dimension, "history", one.slices.dimensions)

p = is_almost_periodic(Multiplier(su.algebra, PointMassRule(1)), su, budget=3)
print("point mass at spin 1/2:", p.verdict, "history", p.slices.dimensions)
