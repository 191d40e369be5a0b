"""Sampled functions on regular grids and radius sets."""

from __future__ import annotations

import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["GridFunction", "RadiusSet", "MAGIC"]

MAGIC = b"LACGRID1"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``data[i] = f(origin + h * i)`` on a regular grid.

    ``data`` is an n-dimensional float64 array in row-major order; the grid
    spacing ``h`` is the same along every axis.
    """

    data: np.ndarray
    spacing: float = 1.0
    origin: tuple | None = None

    def __post_init__(self):
        a = np.ascontiguousarray(self.data, dtype=np.float64)
        if a.ndim < 1 or a.size == 0:
            raise ValueError("grid must have at least one cell per axis")
        if not np.all(np.isfinite(a)):
            raise ValueError("grid data must be finite")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)
        org = (0.0,) * a.ndim if self.origin is None else tuple(float(x) for x in self.origin)
        if len(org) != a.ndim:
            raise ValueError("origin has the wrong dimension")
        object.__setattr__(self, "origin", org)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def n(self) -> int:
        return self.data.ndim

    @property
    def dims(self) -> tuple:
        return self.data.shape

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    def like(self, data) -> "GridFunction":
        return GridFunction(data, self.spacing, self.origin)

    def coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.dims[axis])

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[self.coords(a) for a in range(self.n)], indexing="ij")

    def lp_norm(self, p: float) -> float:
        v = np.abs(self.data)
        if math.isinf(p):
            return float(v.max())
        return float((np.sum(v**p) * self.cell_volume) ** (1.0 / p))

    @classmethod
    def from_function(cls, func, dims, spacing=1.0, origin=None) -> "GridFunction":
        g = cls(np.zeros(dims), spacing, origin)
        return g.like(func(*g.mesh()))

    # binary IO

    def to_bytes(self) -> bytes:
        head = MAGIC + struct.pack(f"<I{self.n}I", self.n, *self.dims)
        head += struct.pack(f"<d{self.n}d", self.spacing, *self.origin)
        return head + self.data.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, buf: bytes) -> "GridFunction":
        if buf[:8] != MAGIC:
            raise ValueError("not a LACGRID1 file")
        (n,) = struct.unpack_from("<I", buf, 8)
        off = 12
        dims = struct.unpack_from(f"<{n}I", buf, off)
        off += 4 * n
        spacing, *origin = struct.unpack_from(f"<d{n}d", buf, off)
        off += 8 * (n + 1)
        count = int(np.prod(dims))
        if len(buf) - off != 8 * count:
            raise ValueError("truncated or oversized grid payload")
        data = np.frombuffer(buf, dtype="<f8", count=count, offset=off).reshape(dims)
        return cls(data.astype(np.float64), spacing, tuple(origin))

    def save(self, path) -> None:
        """Write atomically: a reader never sees a partial grid."""
        path = Path(path)
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(self.to_bytes())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path) -> "GridFunction":
        return cls.from_bytes(Path(path).read_bytes())


@dataclass(frozen=True)
class RadiusSet:
    """Finite increasing set of radii standing in for ``sup_{r > 0}``."""

    radii: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        if not r:
            raise ValueError("radius set is empty")
        if any(x <= 0 for x in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", r)

    def __iter__(self):
        return iter(self.radii)

    def __len__(self) -> int:
        return len(self.radii)

    @classmethod
    def dyadic(cls, grid: GridFunction, rmax: float | None = None) -> "RadiusSet":
        """``{h 2^m}`` up to half the domain diameter (or ``rmax``)."""
        h = grid.spacing
        top = 0.5 * h * math.sqrt(sum(d * d for d in grid.dims)) if rmax is None else rmax
        out = [h]
        while out[-1] * 2 <= top:
            out.append(out[-1] * 2)
        return cls(tuple(out))

    @classmethod
    def linear(cls, h: float, rmax: float) -> "RadiusSet":
        """Every multiple of ``h`` up to ``rmax``."""
        return cls(tuple(h * k for k in range(1, int(math.floor(rmax / h + 1e-9)) + 1)))

    @classmethod
    def parse(cls, spec: str, grid: GridFunction) -> "RadiusSet":
        """``"dyadic"`` or ``"explicit:r1,r2,..."``."""
        if spec == "dyadic":
            return cls.dyadic(grid)
        if spec.startswith("explicit:"):
            return cls(tuple(sorted(float(x) for x in spec[9:].split(",") if x)))
        raise ValueError(f"unknown radius specification {spec!r}")

    def half_counts(self, h: float) -> np.ndarray:
        """Distinct sample half-counts ``ceil(r/h)``, increasing."""
        return np.unique(np.array([max(1, math.ceil(r / h - 1e-12)) for r in self.radii], dtype=np.int64))
