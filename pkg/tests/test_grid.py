import struct

import numpy as np
import pytest

from lacuna import MAGIC, GridFunction, RadiusSet


def test_binary_layout():
    f = GridFunction(np.arange(6.0).reshape(2, 3), 0.5, (1.0, -2.0))
    buf = f.to_bytes()
    assert buf[:8] == MAGIC == b"LACGRID1"
    assert struct.unpack_from("<III", buf, 8) == (2, 2, 3)
    assert struct.unpack_from("<ddd", buf, 20) == (0.5, 1.0, -2.0)
    assert np.frombuffer(buf[44:], "<f8").tolist() == list(range(6))


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    f = GridFunction(rng.random((4, 5, 3)), 0.25, (0.1, 0.2, 0.3))
    f.save(tmp_path / "g.bin")
    g = GridFunction.load(tmp_path / "g.bin")
    assert np.array_equal(f.data, g.data) and g.spacing == f.spacing and g.origin == f.origin
    assert [p.name for p in tmp_path.iterdir()] == ["g.bin"]


def test_truncated_rejected():
    buf = GridFunction(np.ones((3, 3))).to_bytes()
    with pytest.raises(ValueError):
        GridFunction.from_bytes(buf[:-8])
    with pytest.raises(ValueError):
        GridFunction.from_bytes(b"NOTAGRID" + buf[8:])


def test_invalid_grids():
    with pytest.raises(ValueError):
        GridFunction(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        GridFunction(np.ones(3), spacing=0)
    with pytest.raises(ValueError):
        GridFunction(np.zeros((0, 2)))


def test_immutable():
    f = GridFunction(np.zeros(4))
    with pytest.raises(ValueError):
        f.data[0] = 1


def test_lp_norm():
    f = GridFunction(np.full((4, 4), 2.0), spacing=0.5)
    assert f.lp_norm(2) == pytest.approx(2.0 * 2.0)  # area 4
    assert f.lp_norm(np.inf) == 2.0


def test_radius_sets():
    g = GridFunction(np.zeros((16, 16)), 0.5)
    r = RadiusSet.dyadic(g)
    assert r.radii[0] == 0.5 and all(b == 2 * a for a, b in zip(r.radii, r.radii[1:]))
    assert r.radii[-1] <= 0.5 * 0.5 * np.hypot(16, 16)
    assert RadiusSet.parse("explicit:3,1,2", g).radii == (1.0, 2.0, 3.0)
    assert RadiusSet.parse("dyadic", g) == r
    assert RadiusSet.linear(1.0, 4.0).radii == (1.0, 2.0, 3.0, 4.0)
    assert RadiusSet((0.5, 1.0, 1.2)).half_counts(0.5).tolist() == [1, 2, 3]
    with pytest.raises(ValueError):
        RadiusSet(())
    with pytest.raises(ValueError):
        RadiusSet((2.0, 1.0))
    with pytest.raises(ValueError):
        RadiusSet.parse("geometric", g)
