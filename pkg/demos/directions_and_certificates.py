"""Build lacunary direction sets, partition them and certify their order.

Run with ``python demos/directions_and_certificates.py``.
"""

from fractions import Fraction

from lacuna import (
    LacunarySequence,
    auto_certificate,
    carbery_certificate,
    carbery_directions,
    nsw_certificate,
    nsw_directions,
    rational_slope_set,
    verify_lacunary_certificate,
)

# A dyadic sequence 1, 1/2, 1/4, ... drives the planar NSW construction.
dyadic = LacunarySequence.dyadic()
nsw = nsw_directions((1, 2), dyadic, 12)
print(f"NSW set: {len(nsw)} directions in R^{nsw.n}")

# Certificates are checked exactly; the order is the depth of the nesting.
for name, omega, cert in (
    ("nsw", nsw, nsw_certificate(nsw)),
    ("carbery", carbery_directions(3, range(3)), None),
):
    cert = cert or carbery_certificate(omega)
    result = verify_lacunary_certificate(omega, cert)
    print(f"{name:8s} order {result.order}")

# A three-dimensional NSW set with ratio 1/3, certified automatically.
nsw3 = nsw_directions((1, 2, 3), LacunarySequence.geometric(Fraction(1, 3)), 8)
print("nsw3 auto order", verify_lacunary_certificate(nsw3, auto_certificate(nsw3)).order)

# Any finite set certifies; what separates equally spaced slopes from
# lacunary ones is how the maximal norm grows with the count (see
# besicovitch_lift.py).
for count in (4, 16, 64):
    rat = rational_slope_set(2, count)
    print(f"rational {count:3d}: order {verify_lacunary_certificate(rat, auto_certificate(rat)).order}")
