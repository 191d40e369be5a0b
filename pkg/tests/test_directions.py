import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lacuna import (
    INF,
    DirectionSet,
    Dissection,
    InvalidSequenceError,
    LacunarySequence,
    SigmaPair,
    carbery_directions,
    cells,
    is_refined,
    nsw_directions,
    octant_split,
    partition,
    refine_sequence,
    segment_index,
    shadow,
    sigma_pairs,
)

DY = LacunarySequence.dyadic()


def random_set(seed, count, n=3):
    rng = np.random.default_rng(seed)
    return DirectionSet.from_floats(rng.standard_normal((count, n)))


def test_sigma_pairs():
    assert sigma_pairs(3) == [SigmaPair(1, 2), SigmaPair(1, 3), SigmaPair(2, 3)]
    with pytest.raises(ValueError):
        SigmaPair.of((2, 2))


def test_octant_split_examples():
    parts = octant_split(DirectionSet.from_floats([[1, 1], [-1, 1]]))
    assert set(parts) == {("+", "+"), ("-", "+")}
    assert len(parts[("+", "+")]) == 1 and len(parts[("-", "+")]) == 1
    # zeros count as positive
    assert set(octant_split(DirectionSet.from_floats([[1, 0]]))) == {("+", "+")}


def test_octant_split_partitions_random_set():
    omega = random_set(0, 100)
    parts = octant_split(omega)
    assert sum(len(p) for p in parts.values()) == 100
    rows = {tuple(r) for p in parts.values() for r in p.array}
    assert rows == {tuple(r) for r in omega.array}
    for key, p in parts.items():
        signs = np.where(p.array >= 0, "+", "-")
        assert all(tuple(s) == key for s in signs)


@pytest.mark.parametrize("omega, expected", [((2, 1), 1), ((3, 1), 1), ((1, 0), INF), ((0, 5), INF)])
def test_segment_index_examples(omega, expected):
    assert segment_index(omega, (1, 2), DY) == expected


def test_segment_index_boundary_is_closed_above():
    # |w_2/w_1| = 1/2 = theta_1 lands in segment 1, 1/4 = theta_2 in segment 2
    assert segment_index((4, 2), (1, 2), DY) == 1
    assert segment_index((4, 1), (1, 2), DY) == 2
    assert segment_index((Fraction(1), Fraction(1, 4)), (1, 2), DY) == 2


def test_non_monotone_sequence_rejected():
    with pytest.raises(InvalidSequenceError):
        LacunarySequence((1.0, 2.0), 0.5)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_segment_membership_property(a, b):
    i = segment_index((a, b), (1, 2), DY)
    rho = b / a
    assert float(DY.theta(i + 1)) < rho <= float(DY.theta(i))


def test_partition_nsw_singletons():
    omega = nsw_directions((1, 2), DY, 16)
    parts = partition(omega, (1, 2), DY)
    assert len(parts) == 16
    assert all(len(s.members) == 1 for s in parts.values())


def test_partition_single_band():
    omega = DirectionSet.from_floats([[1, 0.6], [1, 0.9], [1, 0.75]])
    parts = partition(omega, (1, 2), DY)
    assert list(parts) == [0] and len(parts[0].members) == 3


@pytest.mark.parametrize("seq", [DY, refine_sequence(DY), LacunarySequence.geometric(0.1)])
def test_partition_random_is_disjoint_cover(seq):
    omega = random_set(1, 1000)
    for s in sigma_pairs(3):
        parts = partition(omega, s, seq)
        idx = [i for seg in parts.values() for i in seg.indices]
        assert sorted(idx) == list(range(1000))
        for key, seg in parts.items():
            assert all(segment_index(tuple(omega.array[i]), s, seq) == key for i in seg.indices)


def test_refine_dyadic():
    r = refine_sequence(DY)
    vals = [float(v) for v in r.window(-6, 6)]
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    assert np.allclose(ratios, math.sqrt(0.5))
    assert is_refined(r) and not is_refined(DY)


def test_refine_leaves_slow_sequence_alone():
    s = LacunarySequence.geometric(0.7)
    r = refine_sequence(s)
    assert [float(v) for v in r.window(-3, 3)] == pytest.approx([float(v) for v in s.window(-3, 3)])


def test_refine_tenths_inserts_five():
    s = LacunarySequence.geometric(0.1)
    r = refine_sequence(s)
    vals = [float(v) for v in r.window(0, 12)]
    assert vals[6] == pytest.approx(0.1) and vals[12] == pytest.approx(0.01)
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    assert np.all(ratios >= 2 / 3)


@given(st.floats(0.01, 0.95))
def test_refinement_property(lam):
    s = LacunarySequence.geometric(lam)
    r = refine_sequence(s)
    w = 2 * r.substeps + 2
    vals = np.array([float(v) for v in r.window(-w, w)])
    ratios = vals[1:] / vals[:-1]
    assert np.all(ratios >= 2 / 3 - 1e-12)
    # geometric means give the constant lam^(1/(k+1)), which can exceed max(lam, 2/3)
    assert np.all(ratios <= float(r.lacunary_constant) + 1e-12)
    assert float(r.lacunary_constant) < 1
    # input values appear in the output
    orig = [float(s.theta(i)) for i in range(-2, 3)]
    assert all(np.isclose(vals, v, rtol=1e-12).any() for v in orig)


def test_cells_single_direction():
    omega = DirectionSet.from_floats([[1, 2, 3]])
    c = cells(omega, Dissection({s: DY for s in sigma_pairs(3)}))
    assert len(c) == 1


def test_cells_carbery_count_matches_exponent_differences():
    omega = carbery_directions(3, range(3))
    c = cells(omega, Dissection({s: DY for s in sigma_pairs(3)}))
    diffs = {(k2 - k1, k3 - k1, k3 - k2) for k1 in range(3) for k2 in range(3) for k3 in range(3)}
    assert len(c) == len(diffs)


def test_cells_partition_and_round_trip():
    omega = random_set(2, 500)
    seq = refine_sequence(DY)
    c = cells(omega, Dissection({s: seq for s in sigma_pairs(3)}))
    idx = sorted(i for seg in c.values() for i in seg.indices)
    assert idx == list(range(500))
    for key, seg in c.items():
        for i in seg.indices:
            w = tuple(omega.array[i])
            assert tuple(segment_index(w, s, seq) for s in sigma_pairs(3)) == key


def test_shadow_examples():
    plane = np.eye(3)[:2]
    assert len(shadow(DirectionSet.from_floats([[0, 0, 1]]), plane)) == 0
    sh = shadow(DirectionSet.from_floats([[0.6, 0.8, 0]]), plane)
    assert np.allclose(sh.array, [[0.6, 0.8, 0]])


def test_shadow_coalesces_duplicates():
    omega = DirectionSet.from_floats([[1, 1, 0], [1, 1, 5], [2, 2, -1]])
    assert len(shadow(omega, np.eye(3)[:2])) == 1


def test_shadow_chain():
    rng = np.random.default_rng(3)
    for trial in range(200):
        omega = DirectionSet.from_floats(rng.standard_normal((8, 4)))
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        big, small = Q[:, :3].T, Q[:, :2].T
        a = shadow(shadow(omega, big), small).array
        b = shadow(omega, small).array
        assert a.shape == b.shape
        assert np.allclose(np.sort(a, axis=0), np.sort(b, axis=0), atol=1e-9)


def test_direction_set_json_round_trip():
    for omega in (nsw_directions((1, 2, 3), LacunarySequence.geometric(Fraction(1, 3)), 5), random_set(4, 6)):
        back = DirectionSet.from_json(omega.to_json())
        assert back.mode == omega.mode
        assert np.array_equal(back.array, omega.array)
    obj = nsw_directions((1, 2), DY, 2).to_json()
    assert obj["mode"] == "rational" and all(isinstance(v, str) for v in obj["directions"][0])


def test_rational_directions_are_projectively_normalized():
    omega = DirectionSet.from_rationals([[Fraction(1, 2), Fraction(1, 4)]])
    assert max(omega.coords[0]) == 1
