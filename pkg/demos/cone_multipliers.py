"""Cone multipliers built from a lacunary sequence.

Checks the inclusion-exclusion identity on random data and compares the
two sides of the L^2 square-function estimate with the measured overlap
of the cone supports.

Run with ``python demos/cone_multipliers.py``.
"""

import numpy as np

from lacuna import (
    FrequencyGrid,
    GridFunction,
    LacunarySequence,
    MultiplierStack,
    inclusion_exclusion_residual,
    overlap_count,
    sigma_pairs,
    square_function_p2,
)

rng = np.random.default_rng(7)
dyadic = LacunarySequence.dyadic()

stack = MultiplierStack.uniform(3, dyadic)
f = GridFunction(rng.standard_normal((32, 32, 32)))
w = np.array([0.3, 0.5, 0.8])
w /= np.linalg.norm(w)
index = {s: 1 for s in sigma_pairs(3)}
print("inclusion-exclusion residual:", inclusion_exclusion_residual(f, 4.0, w, index, stack))

grid = FrequencyGrid((64, 64))
stack2 = MultiplierStack.uniform(2, dyadic, grid)
count = overlap_count(stack2, (1, 2), grid)
ratios = [
    np.divide(*square_function_p2(GridFunction(rng.standard_normal((64, 64))), stack2, (1, 2)))
    for _ in range(20)
]
print(f"overlap count {count}; largest lhs/rhs over 20 samples {max(ratios):.3f}")
