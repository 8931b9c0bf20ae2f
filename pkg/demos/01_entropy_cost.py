"""How the entropy-like cost reacts to the shape of a residual vector.

Run: python3 demos/01_entropy_cost.py
"""

import numpy as np

from lelplane import entropy_like_cost

# One big residual and the rest zero: all the "mass" sits in one place.
print("single spike   ", entropy_like_cost([0, 0, 5, 0]))
# Equal magnitudes spread the mass evenly.
print("uniform        ", entropy_like_cost([1, -1, 1, -1]))
print("hand check     ", round(entropy_like_cost([2, 1, 1]), 5))

# A handful of gross outliers pull the cost down, since a few points dominate.
rng = np.random.default_rng(0)
r = rng.normal(0, 0.2, 100)
print("gaussian only  ", round(entropy_like_cost(r), 4))
r[:10] += 20
print("with outliers  ", round(entropy_like_cost(r), 4))

# Scale does not matter.
print("scaled x1000   ", round(entropy_like_cost(1000 * r), 4))
