"""Besicovitch rectangle families and the norm growth of their Kakeya lifts.

The union of the rectangles shrinks relative to the union of their
threefold dilates as N grows.  Lifting the family to three dimensions and
applying the directional maximal operator shows the L^2 norm ratio
increasing with the number of directions.

Run with ``python demos/besicovitch_lift.py`` (about a minute).
"""

import numpy as np

from lacuna import (
    besicovitch_family,
    directional_maximal,
    kakeya_lift,
    measure_union,
    norm_ratio,
    rasterize_lift,
    rational_slope_set,
)

print(" N  |UR|/|U3R|")
for N in range(1, 7):
    fam = besicovitch_family(N)
    print(f"{N:2d}  {measure_union(fam, 4096, 1) / measure_union(fam, 4096, 3):.4f}")

print("\n N  ||Mf||/||f||  (lift in R^3, 256^2 x 16 grid)")
for N in (2, 3, 4, 5):
    omega = rational_slope_set(3, 2**N)
    lift = kakeya_lift(besicovitch_family(N, np.eye(3)[:2], omega), omega)
    lr = rasterize_lift(lift, 256, 16)
    M = directional_maximal(lr.f, lr.directions)
    print(f"{N:2d}  {norm_ratio(lr.f, M, 2):.4f}")
