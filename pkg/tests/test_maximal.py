import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lacuna import (
    DirectionSet,
    GridFunction,
    RadiusSet,
    brute_oracle,
    directional_maximal,
    hl_1d,
    line_average,
    norm_ratio,
    set_threads,
    strong_maximal,
    tube_maximal,
)

SMALL = RadiusSet((1.0, 2.0, 4.0))


def random_dirs(rng, count, n):
    return DirectionSet.from_floats(rng.standard_normal((count, n)))


def grids(n=2, size=12):
    return st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).random((size,) * n))


def test_constant_interior():
    f = GridFunction(np.ones((40, 40)))
    inner = (slice(8, 32),) * 2
    for M in (
        directional_maximal(f, random_dirs(np.random.default_rng(0), 5, 2), SMALL),
        hl_1d(f, 0, SMALL),
        strong_maximal(f, SMALL),
        tube_maximal(f, [[1, 0], [0.6, 0.8]], [5.0], [1.0]),
    ):
        assert np.allclose(M.data[inner], 1.0)


def test_single_axis_matches_hl():
    rng = np.random.default_rng(1)
    f = GridFunction(rng.random((20, 17)))
    for axis in range(2):
        e = np.eye(2)[axis]
        assert np.array_equal(directional_maximal(f, [e]).data, hl_1d(f, axis).data)
        assert np.array_equal(brute_oracle(f, [e]).data, hl_1d(f, axis).data)


def test_delta_hl():
    a = np.zeros(64)
    a[32] = 1.0
    M = hl_1d(GridFunction(a), 0, RadiusSet.linear(1.0, 32.0)).data
    for d in range(1, 20):
        assert M[32 + d] == pytest.approx(1 / (2 * d + 1))
    # the smallest radius is one cell, so the peak is 1/3 rather than 1
    assert M[32] == pytest.approx(1 / 3)


def test_strong_delta_is_separable():
    a = np.zeros((33, 33))
    a[16, 16] = 1.0
    d = np.zeros(33)
    d[16] = 1.0
    M = strong_maximal(GridFunction(a)).data
    m = hl_1d(GridFunction(d)).data
    assert np.allclose(M, np.outer(m, m))


def test_strong_box():
    a = np.zeros((30, 30))
    a[10:20, 5:25] = 1.0
    M = strong_maximal(GridFunction(a), SMALL).data
    assert np.all(M <= 1.0 + 1e-12)
    # away from the box edges every average sees only ones
    assert np.allclose(M[12:18, 7:23], 1.0)


@given(grids(), grids(), st.floats(0, 3))
def test_sublinear_and_monotone(a, b, c):
    W = [[1, 0], [0.6, 0.8], [-0.28, 0.96]]
    f, g = GridFunction(a), GridFunction(b)
    Mf, Mg = directional_maximal(f, W, SMALL).data, directional_maximal(g, W, SMALL).data
    Mfg = directional_maximal(GridFunction(a + b), W, SMALL).data
    assert np.all(Mfg <= Mf + Mg + 1e-12)
    assert np.allclose(directional_maximal(GridFunction(c * a), W, SMALL).data, c * Mf)
    assert np.all(directional_maximal(GridFunction(np.maximum(a, b)), W, SMALL).data >= Mf - 1e-12)
    for op in (lambda x: strong_maximal(x, SMALL), lambda x: tube_maximal(x, W, [4.0], [1.0])):
        assert np.all(op(GridFunction(a + b)).data <= op(f).data + op(g).data + 1e-12)
        assert np.all(op(GridFunction(np.maximum(a, b))).data >= op(f).data - 1e-12)


@given(grids(), st.integers(0, 1000))
def test_union_is_pointwise_max(a, seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(a)
    W1, W2 = rng.standard_normal((3, 2)), rng.standard_normal((2, 2))
    both = directional_maximal(f, np.vstack([W1, W2])).data
    assert np.array_equal(both, np.maximum(directional_maximal(f, W1).data, directional_maximal(f, W2).data))


def test_dominates_single_segment():
    rng = np.random.default_rng(2)
    f = GridFunction(rng.random((24, 24)))
    W = random_dirs(rng, 4, 2).array
    M = directional_maximal(f, W).data
    for _ in range(50):
        idx = tuple(rng.integers(0, 24, 2))
        w = W[rng.integers(len(W))]
        r = float(2 ** rng.integers(0, 4))
        assert M[idx] >= line_average(f, idx, w, r) - 1e-15


def test_oracle_equivalence_small():
    rng = np.random.default_rng(3)
    for shape in ((16, 16), (32, 32), (8, 9, 10)):
        f = GridFunction(rng.random(shape))
        W = random_dirs(rng, 8, len(shape))
        assert np.array_equal(directional_maximal(f, W).data, brute_oracle(f, W).data)


def test_oracle_sparse_and_binary_inputs():
    rng = np.random.default_rng(4)
    a = (rng.random((32, 32)) < 0.05).astype(float)
    a[:, :10] = 0
    f = GridFunction(a)
    W = random_dirs(rng, 8, 2)
    assert np.array_equal(directional_maximal(f, W).data, brute_oracle(f, W).data)


def test_pure_python_oracle_agrees():
    rng = np.random.default_rng(5)
    f = GridFunction(rng.random((6, 7)))
    W = random_dirs(rng, 3, 2)
    assert np.array_equal(brute_oracle(f, W, jit=False).data, brute_oracle(f, W).data)


def test_oracle_guard():
    with pytest.raises(ValueError):
        brute_oracle(GridFunction(np.zeros((1001, 1000))), [[1, 0]])


def test_empty_directions_rejected():
    with pytest.raises(ValueError):
        directional_maximal(GridFunction(np.ones((4, 4))), np.zeros((0, 2)))


def test_thread_count_does_not_change_results():
    rng = np.random.default_rng(6)
    f = GridFunction(rng.random((40, 40)))
    W = random_dirs(rng, 6, 2)
    set_threads(1)
    a = directional_maximal(f, W).data
    set_threads(None)
    assert np.array_equal(a, directional_maximal(f, W).data)


def test_tube_vs_directional():
    rng = np.random.default_rng(7)
    for _ in range(5):
        f = GridFunction(rng.random((32, 32)))
        W = random_dirs(rng, 3, 2).array
        T = tube_maximal(f, W, [3.0, 5.0, 9.0], [1.0]).data
        D = directional_maximal(f, W, RadiusSet((1.0, 2.0, 4.0))).data
        inner = (slice(6, 26),) * 2
        assert np.all(T[inner] >= 0.5 * D[inner])


def test_single_tube_average():
    a = np.zeros((21, 21))
    a[10, 6:15] = np.arange(1.0, 10.0)
    T = tube_maximal(GridFunction(a), [[0, 1]], [8.0], [0.5]).data
    assert T[10, 10] == pytest.approx(a[10, 6:15].mean())


def test_norm_ratio():
    f = GridFunction(np.random.default_rng(8).random((8, 8)))
    assert norm_ratio(f, f, 2) == pytest.approx(1)
    assert norm_ratio(f, f.like(2 * f.data), 3) == pytest.approx(2)
    with pytest.raises(ValueError):
        norm_ratio(f, f, 1)
    with pytest.raises(ValueError):
        norm_ratio(f.like(np.zeros((8, 8))), f, 2)
