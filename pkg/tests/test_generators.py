import math
from fractions import Fraction

import numpy as np
import pytest

from lacuna import (
    ConstructionError,
    planar_slopes,
    DirectionSet,
    KakeyaLift,
    LacunarySequence,
    RectangleFamily,
    besicovitch_family,
    carbery_certificate,
    carbery_directions,
    kakeya_lift,
    nsw_directions,
    partition,
    rational_slope_set,
    rational_slopes,
    rotated_accumulating_set,
    rotated_basis,
    shadow,
    sigma_pairs,
    verify_lacunary_certificate,
)

DY = LacunarySequence.dyadic()


def angle(a, b):
    c = abs(float(np.dot(a, b))) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(min(1.0, c))


def test_nsw_ratios():
    omega = nsw_directions((1, 2), DY, 4)
    ratios = [c[1] / c[0] for c in omega.coords]
    assert ratios == [Fraction(1, 2**i) for i in range(1, 5)]
    assert all(len(s.members) == 1 for s in partition(omega, (1, 2), DY).values())


def test_nsw_single_direction_is_order_zero():
    omega = nsw_directions((1, 2), DY, 1)
    from lacuna import auto_certificate

    assert verify_lacunary_certificate(omega, auto_certificate(omega)).order == 0


def test_nsw_rejects_bad_exponents():
    with pytest.raises(ValueError):
        nsw_directions((2, 1), DY, 4)
    with pytest.raises(ValueError):
        nsw_directions((1, 1), DY, 4)


def test_nsw_float_mode_for_irrational_exponents():
    omega = nsw_directions((1, 2.5), DY, 3)
    assert omega.mode == "float"
    assert np.allclose(np.linalg.norm(omega.array, axis=1), 1)


def test_carbery_enumeration():
    omega = carbery_directions(2, range(2))
    assert len(omega) == 4 and omega.mode == "rational"
    assert omega.distinct_count() == 3
    assert len(carbery_directions(3, range(3))) == 27
    one = carbery_directions(2, range(1))
    assert verify_lacunary_certificate(one, carbery_certificate(one)).order == 0


def test_rational_slopes_order():
    assert rational_slopes(10) == [
        Fraction(1, 2), Fraction(2, 3), Fraction(3, 5), Fraction(4, 7), Fraction(5, 8),
        Fraction(5, 9), Fraction(6, 11), Fraction(7, 11), Fraction(7, 12), Fraction(7, 13),
    ]
    assert all(Fraction(1, 2) <= q <= Fraction(2, 3) for q in rational_slopes(200))
    assert len(set(rational_slopes(200))) == 200


def test_rational_slope_set_first_direction():
    w = rational_slope_set(4, 1).array[0]
    assert w[0] / w[1] == pytest.approx(0.5)
    assert w[2] / w[1] == pytest.approx(2.0**-3 / 2.0**-2)
    assert np.linalg.norm(w) == pytest.approx(1)


@pytest.mark.parametrize("n", [3, 4])
def test_rational_slope_set_singleton_segments(n):
    omega = rational_slope_set(n, 12)
    for s in sigma_pairs(n):
        if s == (1, 2):
            continue
        assert all(len(seg.members) == 1 for seg in partition(omega, s, DY).values())


def test_rational_slope_set_shadow_slopes():
    omega = rational_slope_set(3, 50)
    sh = shadow(omega, np.eye(3)[:2], in_plane=True)
    slopes = sh.array[:, 0] / sh.array[:, 1]
    assert len(sh) == 50
    assert np.all((slopes >= 0.5 - 1e-12) & (slopes <= 2 / 3 + 1e-12))


@pytest.mark.parametrize("n", [3, 4])
def test_rotated_set_conditions(n):
    L, delta = 8, 0.1
    omega = rotated_accumulating_set(n, L, delta)
    B = rotated_basis(n, delta)
    assert np.allclose(B @ B.T, np.eye(n))
    e2p, enp = B[1], B[n - 1]
    W = omega.array
    for a, b in zip(W, W[1:]):
        assert angle(a, enp) >= 2 * angle(b, enp) - 1e-12
    # standard basis: singleton segments away from (2, n)
    for s in sigma_pairs(n):
        if s == (2, n):
            continue
        assert all(len(seg.members) == 1 for seg in partition(omega, s, DY).values())
    # rotated frame: the (e2', en') ratios sit in distinct dyadic bands
    parts = partition(omega, (2, n), DY, B)
    assert all(len(seg.members) == 1 for seg in parts.values())
    assert np.allclose(W @ e2p / (W @ B[0]), [float(q) for q in rational_slopes(L)])


def test_rotated_rejects_bad_parameters():
    with pytest.raises(ValueError):
        rotated_accumulating_set(2, 4)
    with pytest.raises(ValueError):
        rotated_accumulating_set(3, 4, delta=0.5)


def test_besicovitch_family_shape():
    fam = besicovitch_family(4)
    assert len(fam) == 16
    for r in fam:
        assert r.length >= r.width > 0
        assert np.linalg.norm(r.direction) == pytest.approx(1)
    assert fam.meta["N"] == 4


def test_besicovitch_too_few_slopes():
    with pytest.raises(ConstructionError):
        besicovitch_family(3, None, rational_slope_set(2, 4))


def test_family_json_round_trip():
    fam = besicovitch_family(3)
    back = RectangleFamily.from_json(fam.to_json())
    for a, b in zip(fam, back):
        assert np.allclose(a.center, b.center) and a.angle == pytest.approx(b.angle)
        assert a.length == pytest.approx(b.length) and a.width == pytest.approx(b.width)
    obj = fam.to_json()
    assert set(obj["rectangles"][0]) == {"center", "angle", "length", "width"}


def test_lift_in_plane_and_two_dimensional():
    omega = rational_slope_set(2, 8)
    lift = kakeya_lift(besicovitch_family(3, None, omega), omega)
    assert lift.n == 2
    assert np.allclose(lift.betas, [r.diam for r in lift.family])


def test_lift_three_dimensional():
    omega = rational_slope_set(3, 8)
    fam = besicovitch_family(3, np.eye(3)[:2], omega)
    lift = kakeya_lift(fam, omega)
    assert lift.alpha == pytest.approx(10 * max(lift.betas))
    assert all(lift.alpha / b >= 10 - 1e-12 for b in lift.betas)
    W = omega.array
    for r, b in zip(fam, lift.betas):
        # the shading direction has the largest in-plane component among matches
        assert b >= r.diam
        assert any(b == pytest.approx(r.diam / math.hypot(w[0], w[1])) for w in W)
    obj = lift.to_json()
    assert {"alpha", "betas", "basis"} <= set(obj)
    back = KakeyaLift.from_json(obj)
    assert back.alpha == pytest.approx(lift.alpha)


def test_lift_without_shading_direction():
    omega = rational_slope_set(3, 8)
    fam = besicovitch_family(3, np.eye(3)[:2], omega)
    with pytest.raises(ConstructionError):
        kakeya_lift(fam, DirectionSet.from_floats([[0, 0, 1]]))


def test_planar_slopes_merges_float_coincident_slopes():
    omega = nsw_directions((1, 2), LacunarySequence.dyadic(), 64)
    D = planar_slopes(omega)
    assert 30 < len(D) < 64
    cross = np.abs(D[:, None, 0] * D[None, :, 1] - D[:, None, 1] * D[None, :, 0])
    assert (cross[~np.eye(len(D), dtype=bool)] > 1e-12).all()
    assert len(planar_slopes(rational_slope_set(2, 64))) == 64
    with pytest.raises(ConstructionError):
        besicovitch_family(6, None, omega)
