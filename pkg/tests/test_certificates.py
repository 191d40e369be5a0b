import numpy as np
import pytest
from fractions import Fraction

from lacuna import (
    DirectionSet,
    LacunaryCertificate,
    LacunarySequence,
    auto_certificate,
    carbery_certificate,
    carbery_directions,
    nsw_certificate,
    nsw_directions,
    partition,
    singleton_certificate,
    verify_dominating,
    verify_lacunary_certificate,
)

DY = LacunarySequence.dyadic()


def leaves_are_singletons(omega, cert):
    if cert.order == 0:
        return omega.distinct_count() == 1
    for (s, i), child in cert.children.items():
        seg = partition(omega, s, cert.dissection.sequences[s], cert.dissection.basis).get(i)
        if seg is not None and not leaves_are_singletons(seg.members, child):
            return False
    return True


def test_singleton():
    omega = DirectionSet.from_floats([[1, 2, 3]])
    check = verify_lacunary_certificate(omega, singleton_certificate())
    assert check and check.order == 0


def test_order_zero_rejects_two_directions():
    omega = DirectionSet.from_floats([[1, 0], [0, 1]])
    check = verify_lacunary_certificate(omega, singleton_certificate())
    assert not check and check.witness


@pytest.mark.parametrize(
    "a, theta, count",
    [((1, 2), DY, 4), ((1, 2), DY, 16), ((1, 2, 3), LacunarySequence.geometric(Fraction(1, 3)), 8)],
)
def test_nsw_order_one(a, theta, count):
    omega = nsw_directions(a, theta, count)
    cert = nsw_certificate(omega)
    check = verify_lacunary_certificate(omega, cert)
    assert check and check.order == 1
    assert leaves_are_singletons(omega, cert)
    assert cert.depth <= 1


def test_carbery_order_two():
    omega = carbery_directions(3, range(3))
    check = verify_lacunary_certificate(omega, carbery_certificate(omega))
    assert check and check.order == 2


def test_corrupted_certificate_rejected():
    omega = nsw_directions((1, 2), DY, 4)
    good = nsw_certificate(omega)
    bad = LacunaryCertificate(0, good.dissection, good.children)
    check = verify_lacunary_certificate(omega, bad)
    assert not check and "order" in check.witness


def test_reference_to_empty_segment_rejected():
    omega = nsw_directions((1, 2), DY, 4)
    good = nsw_certificate(omega)
    kids = dict(good.children)
    s = next(iter(kids))[0]
    kids[(s, 50)] = singleton_certificate()
    check = verify_lacunary_certificate(omega, LacunaryCertificate(1, good.dissection, kids))
    assert not check and "empty" in check.witness


@pytest.mark.parametrize("omega", [nsw_directions((1, 2), DY, 16), carbery_directions(3, range(2))])
def test_auto_certificate_verifies(omega):
    check = verify_lacunary_certificate(omega, auto_certificate(omega))
    assert check


def test_auto_nsw_is_order_one():
    omega = nsw_directions((1, 2), DY, 16)
    assert verify_lacunary_certificate(omega, auto_certificate(omega)).order == 1


def test_certificate_json_round_trip():
    omega = carbery_directions(3, range(3))
    cert = carbery_certificate(omega)
    back = LacunaryCertificate.from_json(cert.to_json())
    assert back.to_json() == cert.to_json()
    assert verify_lacunary_certificate(omega, back).order == 2


def test_verify_dominating():
    segs = {1: None, 2: None, 3: None}
    assert verify_dominating(segs, {1: 1.0, 2: 1.0, 3: 1.0}, 2)
    assert not verify_dominating({1: None, 2: None}, {1: 1.0, 2: 3.0}, 1)
    with pytest.raises(KeyError):
        verify_dominating(segs, {1: 1.0, 2: 1.0}, 1)


def test_nsw_singletons_dominate_each_other():
    # every singleton segment carries a one-direction maximal operator
    from lacuna import GridFunction, directional_maximal, norm_ratio

    omega = nsw_directions((1, 2), DY, 4)
    parts = partition(omega, (1, 2), DY)
    rng = np.random.default_rng(0)
    f = GridFunction(rng.random((32, 32)))
    est = {i: norm_ratio(f, directional_maximal(f, seg.members), 2) for i, seg in parts.items()}
    assert all(verify_dominating(parts, est, i) for i in parts)


@pytest.mark.parametrize("theta", [1 / 3, 0.5, 0.1])
def test_nsw_float_mode_stays_order_one(theta):
    omega = nsw_directions((1, 2, 3), LacunarySequence.geometric(theta), 12)
    assert omega.mode == "float"
    check = verify_lacunary_certificate(omega, nsw_certificate(omega))
    assert check and check.order == 1


def test_auto_certificate_random_float_sets():
    rng = np.random.default_rng(0)
    for _ in range(5):
        omega = DirectionSet.from_floats(rng.standard_normal((6, 3)))
        assert verify_lacunary_certificate(omega, auto_certificate(omega))
