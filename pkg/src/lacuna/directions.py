"""Direction sets, lacunary sequences and the partitions they induce.

A direction set is a finite list of nonzero vectors in R^n, stored either as
floats (unit normalized) or as exact rationals (projectively normalized so
the largest coordinate has absolute value one).  Ratios of coordinates are
all that the partitions below ever look at, so the two normalizations give
identical segments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
    "INF",
    "InvalidSequenceError",
    "SigmaPair",
    "sigma_pairs",
    "DirectionSet",
    "LacunarySequence",
    "Dissection",
    "Segment",
    "octant_split",
    "segment_index",
    "partition",
    "refine_sequence",
    "is_refined",
    "cells",
    "shadow",
    "coordinates",
]

#: Index of the segment of directions lying in e_j^perp or e_k^perp.
INF = math.inf

REFINE_RATIO = Fraction(2, 3)


class InvalidSequenceError(ValueError):
    """Raised for sequences that are not positive and strictly decreasing."""


class SigmaPair(NamedTuple):
    """A coordinate pair (j, k) with 1 <= j < k, one-based as in Sigma(n)."""

    j: int
    k: int

    @classmethod
    def of(cls, pair) -> "SigmaPair":
        j, k = (int(v) for v in pair)
        if not 1 <= j < k:
            raise ValueError(f"sigma pair needs 1 <= j < k, got ({j}, {k})")
        return cls(j, k)


def sigma_pairs(d: int) -> list[SigmaPair]:
    """All pairs of Sigma(d) in lexicographic order."""
    return [SigmaPair(j, k) for j in range(1, d + 1) for k in range(j + 1, d + 1)]


# ---------------------------------------------------------------------------
# direction sets


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    raise TypeError(f"cannot use {v!r} as an exact rational coordinate")


@dataclass(frozen=True)
class DirectionSet:
    """Finite list of directions in R^n.

    Parameters
    ----------
    n : int
        Ambient dimension.
    mode : {'float', 'rational'}
        Float directions are stored unit normalized; rational directions are
        stored as tuples of `Fraction` with max absolute coordinate 1.
    coords : tuple of tuples
        One tuple of length ``n`` per direction.  Duplicates are kept.
    meta : dict
        Free-form metadata (family name, canonical sequences, ...).  Not part
        of equality.
    """

    n: int
    mode: str
    coords: tuple
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.mode not in ("float", "rational"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        for c in self.coords:
            if len(c) != self.n:
                raise ValueError(f"direction {c} does not live in R^{self.n}")
            if all(v == 0 for v in c):
                raise ValueError("the zero vector is not a direction")

    # construction -----------------------------------------------------------

    @classmethod
    def from_floats(cls, vectors, normalize: bool = True, meta=None) -> "DirectionSet":
        arr = np.atleast_2d(np.asarray(vectors, dtype=float))
        if arr.size == 0:
            raise ValueError("empty direction list")
        if not np.all(np.isfinite(arr)):
            raise ValueError("direction coordinates must be finite")
        if normalize:
            norms = np.sqrt(np.sum(arr * arr, axis=1))
            if np.any(norms == 0):
                raise ValueError("the zero vector is not a direction")
            arr = arr / norms[:, None]
        coords = tuple(tuple(float(v) for v in row) for row in arr)
        return cls(arr.shape[1], "float", coords, dict(meta or {}))

    @classmethod
    def from_rationals(cls, vectors, normalize: bool = True, meta=None) -> "DirectionSet":
        rows = [tuple(_as_fraction(v) for v in row) for row in vectors]
        if not rows:
            raise ValueError("empty direction list")
        if normalize:
            rows = [_projective(row) for row in rows]
        return cls(len(rows[0]), "rational", tuple(rows), dict(meta or {}))

    # container protocol -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    @property
    def array(self) -> np.ndarray:
        """Unit vectors as a float array of shape (len, n)."""
        arr = np.array([[float(v) for v in c] for c in self.coords], dtype=float)
        if self.mode == "rational":
            arr = arr / np.linalg.norm(arr, axis=1)[:, None]
        return arr

    def subset(self, indices: Iterable[int]) -> "DirectionSet":
        return DirectionSet(self.n, self.mode, tuple(self.coords[i] for i in indices))

    def union(self, other: "DirectionSet") -> "DirectionSet":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        if other.mode == self.mode:
            return DirectionSet(self.n, self.mode, self.coords + other.coords)
        return DirectionSet.from_floats(np.vstack([self.array, other.array]))

    def to_float(self) -> "DirectionSet":
        if self.mode == "float":
            return self
        return DirectionSet.from_floats(self.array, meta=self.meta)

    def unique(self, tol: float = 1e-10) -> "DirectionSet":
        """Coalesce repeated directions (exactly, or within an angle ``tol``)."""
        keep = _unique_indices(self, tol)
        return DirectionSet(self.n, self.mode, tuple(self.coords[i] for i in keep), dict(self.meta))

    def distinct_count(self, tol: float = 1e-10) -> int:
        return len(_unique_indices(self, tol))

    # serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        if self.mode == "rational":
            dirs = [[_frac_str(v) for v in c] for c in self.coords]
        else:
            dirs = [[float(v) for v in c] for c in self.coords]
        return {"n": self.n, "mode": self.mode, "directions": dirs}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DirectionSet":
        mode = obj.get("mode", "float")
        n = int(obj["n"])
        dirs = obj["directions"]
        if mode == "rational":
            ds = cls.from_rationals(dirs)
        elif mode == "float":
            arr = np.asarray(dirs, dtype=float).reshape(-1, n)
            # stored unit vectors load bit-for-bit; anything else is normalized
            unit = np.all(np.abs(np.sqrt(np.sum(arr * arr, axis=1)) - 1.0) <= 1e-12)
            ds = cls.from_floats(arr, normalize=not unit)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if ds.n != n:
            raise ValueError(f"declared n={n} but directions have length {ds.n}")
        return ds


def _projective(row: tuple) -> tuple:
    scale = max(abs(v) for v in row)
    if scale == 0:
        raise ValueError("the zero vector is not a direction")
    return tuple(v / scale for v in row)


def _frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _unique_indices(ds: DirectionSet, tol: float) -> list[int]:
    if ds.mode == "rational":
        seen: dict = {}
        for i, c in enumerate(ds.coords):
            seen.setdefault(c, i)
        return sorted(seen.values())
    arr = ds.array
    keep: list[int] = []
    for i, v in enumerate(arr):
        if not any(_angle(v, arr[j]) <= tol for j in keep):
            keep.append(i)
    return keep


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    # atan2 form keeps accuracy for nearly parallel vectors
    cross = np.linalg.norm(u * np.dot(v, v) - v * np.dot(u, v))
    return math.atan2(cross, np.dot(u, v) * np.linalg.norm(v))


# ---------------------------------------------------------------------------
# coordinates with respect to a basis


def coordinates(omega: DirectionSet, basis=None) -> list[tuple]:
    """Coordinates of every direction with respect to the rows of ``basis``.

    With ``basis=None`` (the standard basis) the stored coordinates are
    returned unchanged, so rational sets are handled exactly.  An exact
    basis (entries `Fraction`/int) applied to a rational set also stays
    exact; everything else is computed in floating point.
    """
    if basis is None:
        return list(omega.coords)
    if omega.mode == "rational" and _is_exact_matrix(basis):
        rows = [tuple(_as_fraction(v) for v in r) for r in basis]
        return [tuple(sum((a * b for a, b in zip(r, c)), Fraction(0)) for r in rows) for c in omega.coords]
    B = np.asarray(basis, dtype=float)
    return [tuple(float(v) for v in row) for row in omega.array @ B.T]


def _is_exact_matrix(basis) -> bool:
    if isinstance(basis, np.ndarray):
        return basis.dtype == object and all(isinstance(v, (int, Fraction)) for v in basis.ravel())
    try:
        return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for row in basis for v in row)
    except TypeError:
        return False


# ---------------------------------------------------------------------------
# lacunary sequences


@dataclass(frozen=True)
class LacunarySequence:
    r"""A positive decreasing sequence ``theta_i`` indexed by all integers.

    ``values`` holds ``theta_start, theta_{start+1}, ...``.  Outside the table
    the sequence continues geometrically: every ``substeps`` indices the value
    is multiplied by ``lam`` (and by ``lam**(b/substeps)`` in between), both
    above the last entry and below the first one.  With a single table entry
    and ``substeps=1`` this is ``theta_i = theta_start * lam**(i-start)``.
    """

    values: tuple
    lam: object
    start: int = 0
    substeps: int = 1

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise InvalidSequenceError("a lacunary sequence needs at least one value")
        if any(not v > 0 for v in vals):
            raise InvalidSequenceError("lacunary sequences must be positive")
        for a, b in zip(vals, vals[1:]):
            if not b < a:
                raise InvalidSequenceError(f"sequence is not strictly decreasing: {a} then {b}")
        if not 0 < self.lam < 1:
            raise InvalidSequenceError(f"extrapolation ratio must lie in (0, 1), got {self.lam}")
        if int(self.substeps) < 1:
            raise InvalidSequenceError("substeps must be a positive integer")

    # constructors -------------------------------------------------------------

    @classmethod
    def geometric(cls, ratio, theta0=1, start: int = 0) -> "LacunarySequence":
        """``theta_i = theta0 * ratio**(i - start)``; exact for rational input."""
        if isinstance(ratio, (int, Fraction)) and isinstance(theta0, (int, Fraction)):
            ratio, theta0 = Fraction(ratio), Fraction(theta0)
        return cls((theta0,), ratio, start, 1)

    @classmethod
    def dyadic(cls) -> "LacunarySequence":
        """``theta_i = 2**-i``, exactly."""
        return cls.geometric(Fraction(1, 2))

    @classmethod
    def from_function(cls, func, lo: int, hi: int, lam=None) -> "LacunarySequence":
        """Tabulate a closed form ``i -> theta_i`` on ``lo..hi``.

        Outside the window the sequence continues geometrically with ratio
        ``lam`` (default: the largest consecutive ratio inside the window).
        """
        if hi < lo:
            raise ValueError("empty index window")
        vals = tuple(func(i) for i in range(lo, hi + 1))
        if lam is None:
            if len(vals) < 2:
                raise ValueError("cannot infer lam from a single value")
            lam = max(b / a for a, b in zip(vals, vals[1:]))
        return cls(vals, lam, lo, 1)

    # evaluation ---------------------------------------------------------------

    @property
    def end(self) -> int:
        return self.start + len(self.values) - 1

    def theta(self, i: int) -> object:
        i = int(i)
        if self.start <= i <= self.end:
            return self.values[i - self.start]
        s = int(self.substeps)
        if i > self.end:
            a, b = divmod(i - self.end, s)
            v = self.values[-1] * self.lam**a
            if b:
                v = v * float(self.lam) ** (b / s)
            return v
        a, b = divmod(self.start - i, s)
        v = self.values[0] * self.lam ** (-a) if a else self.values[0]
        if b:
            v = v * float(self.lam) ** (-b / s)
        return v

    __getitem__ = theta

    def window(self, lo: int, hi: int) -> list:
        return [self.theta(i) for i in range(lo, hi + 1)]

    @property
    def step_ratios(self) -> list:
        """Ratios theta_{i+1}/theta_i that can occur (table and tail)."""
        ratios = [b / a for a, b in zip(self.values, self.values[1:])]
        tail = float(self.lam) ** (1.0 / int(self.substeps)) if self.substeps > 1 else self.lam
        ratios.append(tail)
        return ratios

    @property
    def lacunary_constant(self) -> float:
        """Smallest lambda with theta_{i+1} <= lambda * theta_i for all i."""
        return float(max(self.step_ratios))

    @property
    def min_ratio(self) -> float:
        return float(min(self.step_ratios))

    def power(self, d) -> "LacunarySequence":
        """The sequence ``theta_i**d`` (d > 0)."""
        if not d > 0:
            raise ValueError("exponent must be positive")
        if isinstance(d, int) or (isinstance(d, float) and d.is_integer()):
            d = int(d)
        return LacunarySequence(tuple(v**d for v in self.values), self.lam**d, self.start, self.substeps)

    def index_of(self, rho) -> int:
        """The unique ``i`` with ``theta_{i+1} < rho <= theta_i``."""
        if not rho > 0:
            raise ValueError("ratio must be positive")
        th = self.theta
        if rho <= self.values[-1]:
            # tail: largest k >= 0 with theta(end + k) >= rho
            lo, step = 0, 1
            while th(self.end + step) >= rho:
                lo, step = step, step * 2
            hi = step
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if th(self.end + mid) >= rho:
                    lo = mid
                else:
                    hi = mid
            return self.end + lo
        if rho > self.values[0]:
            # head: smallest k >= 1 with theta(start - k) >= rho
            lo, step = 0, 1
            while th(self.start - step) < rho:
                lo, step = step, step * 2
            hi = step
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if th(self.start - mid) >= rho:
                    hi = mid
                else:
                    lo = mid
            return self.start - hi
        lo, hi = 0, len(self.values) - 1  # values[lo] >= rho > values[hi]
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.values[mid] >= rho:
                lo = mid
            else:
                hi = mid
        return self.start + lo

    # serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "values": [_num_json(v) for v in self.values],
            "lam": _num_json(self.lam),
            "start": self.start,
            "substeps": int(self.substeps),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "LacunarySequence":
        return cls(
            tuple(_num_parse(v) for v in obj["values"]),
            _num_parse(obj["lam"]),
            int(obj.get("start", 0)),
            int(obj.get("substeps", 1)),
        )


def _num_json(v):
    if isinstance(v, Fraction):
        return _frac_str(v)
    if isinstance(v, int):
        return v
    return float(v)


def _num_parse(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _as_sequence(seq) -> LacunarySequence:
    if isinstance(seq, LacunarySequence):
        return seq
    # a bare table indexed from 0
    vals = tuple(seq)
    if len(vals) < 2:
        raise InvalidSequenceError("a bare table needs at least two values")
    try:
        lam = max(b / a for a, b in zip(vals, vals[1:]))
    except ZeroDivisionError:
        raise InvalidSequenceError("lacunary sequences must be positive") from None
    return LacunarySequence(vals, lam, 0, 1)


def refine_sequence(seq) -> LacunarySequence:
    """Insert geometric means so consecutive ratios are at least 2/3.

    Between theta_i and theta_{i+1} the number of inserted points is
    ``ceil(log(theta_i/theta_{i+1}) / log(3/2)) - 1``; the extrapolated
    tails are refined the same way.  All original values survive, unchanged,
    as a subsequence.
    """
    seq = _as_sequence(seq)
    new_vals = [seq.values[0]]
    for a, b in zip(seq.values, seq.values[1:]):
        k = _substep_count(float(b) / float(a))
        r = float(b) / float(a)
        for t in range(1, k):
            new_vals.append(float(a) * r ** (t / k))
        new_vals.append(b)
    tail_step = float(seq.lam) ** (1.0 / int(seq.substeps))
    k_tail = _substep_count(tail_step)
    return LacunarySequence(tuple(new_vals), seq.lam, seq.start, int(seq.substeps) * k_tail)


def _substep_count(ratio: float) -> int:
    """Sub-steps needed so that ``ratio**(1/k) >= 2/3``."""
    if ratio >= 2 / 3:
        return 1
    k = max(1, math.ceil(math.log(1.0 / ratio) / math.log(1.5)))
    # guard the 2/3 bound against rounding in the power
    while ratio ** (1.0 / k) * 1.5 < 1.0 + 1e-12:
        k += 1
    return k


def is_refined(seq: LacunarySequence) -> bool:
    return seq.min_ratio >= 2 / 3


# ---------------------------------------------------------------------------
# dissections and segments


@dataclass(frozen=True)
class Dissection:
    """An orthonormal basis plus one lacunary sequence per pair of Sigma(d).

    ``basis`` is ``None`` for the standard basis (exact), otherwise an n x n
    array whose rows are e_1..e_n; only the first ``d`` rows take part in the
    pairs, where ``d`` is the largest index appearing in ``sequences``.
    """

    sequences: Mapping
    basis: object = None

    def __post_init__(self):
        seqs = {SigmaPair.of(s): _as_sequence(q) for s, q in dict(self.sequences).items()}
        object.__setattr__(self, "sequences", seqs)
        if self.basis is not None and not _is_exact_matrix(self.basis):
            B = np.asarray(self.basis, dtype=float)
            if B.ndim != 2 or B.shape[0] != B.shape[1]:
                raise ValueError("dissection basis must be a square matrix")
            if not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-12, rtol=0):
                raise ValueError("dissection basis rows must be orthonormal")
            object.__setattr__(self, "basis", B)

    @property
    def d(self) -> int:
        return max((s.k for s in self.sequences), default=1)

    @property
    def sigmas(self) -> list[SigmaPair]:
        return sorted(self.sequences)

    def refined(self) -> "Dissection":
        return Dissection({s: refine_sequence(q) for s, q in self.sequences.items()}, self.basis)

    @property
    def lacunary_constant(self) -> float:
        return max((q.lacunary_constant for q in self.sequences.values()), default=0.0)

    def to_json(self) -> dict:
        if self.basis is None:
            basis = None
        elif _is_exact_matrix(self.basis):
            basis = [[_num_json(Fraction(v)) for v in row] for row in self.basis]
        else:
            basis = np.asarray(self.basis, dtype=float).tolist()
        return {
            "basis": basis,
            "sequences": [{"sigma": [s.j, s.k], **self.sequences[s].to_json()} for s in self.sigmas],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Dissection":
        basis = obj.get("basis")
        if basis is not None and any(isinstance(v, str) for row in basis for v in row):
            basis = [[Fraction(v) if isinstance(v, str) else v for v in row] for row in basis]
        seqs = {SigmaPair.of(e["sigma"]): LacunarySequence.from_json(e) for e in obj["sequences"]}
        return cls(seqs, basis)


@dataclass(frozen=True)
class Segment:
    """Directions whose ratio |omega_k/omega_j| lies in (theta_{i+1}, theta_i]."""

    sigma: SigmaPair
    index: object
    members: DirectionSet
    indices: tuple

    def __len__(self) -> int:
        return len(self.indices)


def _ratio_index(c: Sequence, sigma: SigmaPair, seq: LacunarySequence):
    a, b = c[sigma.j - 1], c[sigma.k - 1]
    if a == 0 or b == 0:
        return INF
    return seq.index_of(abs(b / a))


def segment_index(omega, sigma, seq, basis=None):
    """Segment index of one direction.

    ``omega`` may be a coordinate tuple (in the standard basis) or a
    one-element `DirectionSet`.  Returns `INF` when the direction is
    perpendicular to e_j or e_k.
    """
    sigma = SigmaPair.of(sigma)
    seq = _as_sequence(seq)
    if isinstance(omega, DirectionSet):
        ds = omega
    elif all(isinstance(v, (int, Fraction)) for v in omega):
        ds = DirectionSet.from_rationals([omega], normalize=False)
    else:
        ds = DirectionSet.from_floats([omega], normalize=False)
    (c,) = coordinates(ds, basis)[:1]
    return _ratio_index(c, sigma, seq)


def partition(omega: DirectionSet, sigma, seq, basis=None) -> dict:
    """Split ``omega`` into its nonempty segments ``{i: Segment}``."""
    sigma = SigmaPair.of(sigma)
    seq = _as_sequence(seq)
    groups: dict = {}
    for idx, c in enumerate(coordinates(omega, basis)):
        groups.setdefault(_ratio_index(c, sigma, seq), []).append(idx)
    return {
        i: Segment(sigma, i, omega.subset(members), tuple(members))
        for i, members in sorted(groups.items(), key=lambda kv: kv[0])
    }


def cells(omega: DirectionSet, dissection: Dissection) -> dict:
    """Group directions by their full multi-index ``(i_sigma)_sigma``.

    Keys are tuples ordered like ``dissection.sigmas``; values are
    `Segment`-like records whose ``sigma`` field is ``None``.
    """
    sigmas = dissection.sigmas
    groups: dict = {}
    for idx, c in enumerate(coordinates(omega, dissection.basis)):
        key = tuple(_ratio_index(c, s, dissection.sequences[s]) for s in sigmas)
        groups.setdefault(key, []).append(idx)
    return {key: Segment(None, key, omega.subset(m), tuple(m)) for key, m in groups.items()}


def octant_split(omega: DirectionSet) -> dict:
    """Split by coordinate signs; zero coordinates count as '+'."""
    groups: dict = {}
    for idx, c in enumerate(omega.coords):
        key = tuple("-" if v < 0 else "+" for v in c)
        groups.setdefault(key, []).append(idx)
    return {key: omega.subset(m) for key, m in groups.items()}


def shadow(omega: DirectionSet, plane, *, in_plane: bool = False, tol: float = 1e-10) -> DirectionSet:
    r"""Normalized orthogonal projections of ``omega`` onto a subspace.

    Parameters
    ----------
    plane : array_like, shape (m, n)
        Orthonormal rows spanning the subspace.  Exact rows (ints or
        `Fraction`) keep a rational set rational.
    in_plane : bool
        Return coordinates with respect to the rows of ``plane`` (an
        m-dimensional set) instead of ambient coordinates.
    tol : float
        Angular tolerance for coalescing duplicates in float mode.

    Directions perpendicular to the subspace are dropped.
    """
    exact = omega.mode == "rational" and _is_exact_matrix(plane)
    if exact:
        P = [tuple(Fraction(v) for v in row) for row in plane]
        n = len(P[0])
        if any(sum(a * b for a, b in zip(P[r], P[s])) != (1 if r == s else 0) for r in range(len(P)) for s in range(len(P))):
            raise ValueError("plane rows must be orthonormal")
        rows = []
        for c in omega.coords:
            proj = [sum((a * b for a, b in zip(r, c)), Fraction(0)) for r in P]
            if all(v == 0 for v in proj):
                continue
            if not in_plane:
                proj = [sum((proj[t] * P[t][i] for t in range(len(P))), Fraction(0)) for i in range(n)]
            rows.append(proj)
        if not rows:
            return DirectionSet(len(P) if in_plane else n, "rational", ())
        return DirectionSet.from_rationals(rows).unique()
    P = np.atleast_2d(np.asarray(plane, dtype=float))
    if not np.allclose(P @ P.T, np.eye(P.shape[0]), atol=1e-12, rtol=0):
        raise ValueError("plane rows must be orthonormal")
    X = omega.array
    proj = X @ P.T
    norms = np.linalg.norm(proj, axis=1)
    # a projection counts as zero only if rounding could explain it
    n = X.shape[1]
    gamma = n * np.finfo(float).eps / (1 - n * np.finfo(float).eps)
    bound = gamma * np.linalg.norm(np.abs(X) @ np.abs(P).T, axis=1)
    keep = norms > 4 * bound
    proj = proj[keep]
    out_dim = P.shape[0] if in_plane else P.shape[1]
    if proj.shape[0] == 0:
        return DirectionSet(out_dim, "float", ())
    if not in_plane:
        proj = proj @ P
    return DirectionSet.from_floats(proj).unique(tol)
