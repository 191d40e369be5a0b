"""Named direction families and Besicovitch-type rectangle constructions.

Direction families
------------------
``nsw_directions``            (theta_i^{a_1}, ..., theta_i^{a_n}), lacunary of order 1
``carbery_directions``        (2^{k_1}, ..., 2^{k_n}), lacunary of order n-1
``rational_slope_set``        well separated ratios but a dense 2-shadow
``rotated_accumulating_set``  accumulates at a tilted axis, dense 2-shadow

Rectangle families
------------------
``besicovitch_family`` builds a Keich-type telescoping tree of 2^N thin
rectangles whose union is about 1/N of the union of the tripled rectangles.
``kakeya_lift`` turns a planar family into the product set
``E = U R x [0, alpha]^{n-2}`` used as a test input for maximal operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .certificates import LacunaryCertificate, auto_certificate
from .directions import (
    DirectionSet,
    Dissection,
    LacunarySequence,
    SigmaPair,
    partition,
    sigma_pairs,
)

__all__ = [
    "nsw_directions",
    "nsw_certificate",
    "carbery_directions",
    "carbery_certificate",
    "rational_slopes",
    "rational_slope_set",
    "rotated_basis",
    "rotated_accumulating_set",
    "Rectangle2D",
    "RectangleFamily",
    "KakeyaLift",
    "besicovitch_family",
    "planar_slopes",
    "kakeya_lift",
    "ConstructionError",
]


class ConstructionError(ValueError):
    """A construction could not meet its stated conditions."""


# ---------------------------------------------------------------------------
# direction families


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def nsw_directions(a: Sequence, theta, count: int) -> DirectionSet:
    """Directions ``(theta_i^{a_1}, ..., theta_i^{a_n})`` for ``i = 1..count``.

    Parameters
    ----------
    a : sequence of increasing positive exponents
    theta : LacunarySequence
    count : number of directions

    Returns
    -------
    DirectionSet
        Rational mode when every ``theta_i`` is a Fraction and every exponent
        an integer, float mode otherwise.  ``meta`` carries the exponents and
        the sequence so the canonical certificate can be rebuilt.
    """
    a = tuple(a)
    if len(a) < 2:
        raise ValueError("need at least two exponents")
    if a[0] <= 0 or any(y <= x for x, y in zip(a, a[1:])):
        raise ValueError("exponents must satisfy 0 < a_1 < ... < a_n")
    if count < 1:
        raise ValueError("count must be at least 1")
    if not isinstance(theta, LacunarySequence):
        theta = LacunarySequence.geometric(theta)
    vals = [theta.theta(i) for i in range(1, count + 1)]
    meta = {"family": "nsw", "a": a, "theta": theta}
    if all(_exact(v) for v in vals) and all(isinstance(x, int) for x in a):
        return DirectionSet.from_rationals([[Fraction(v) ** x for x in a] for v in vals], meta=meta)
    return DirectionSet.from_floats([[float(v) ** float(x) for x in a] for v in vals], meta=meta)


def nsw_certificate(omega: DirectionSet) -> LacunaryCertificate:
    """The order-1 certificate with ``theta_{sigma,i} = theta_i^{a_k - a_j}``.

    Each ratio ``theta_i^d`` sits on the closed top of its band.  In float
    mode rounding can push it into the band above, so for a geometric
    ``theta`` the bands are moved up by half a step, which puts every ratio
    strictly inside its band.
    """
    a, theta = omega.meta["a"], omega.meta["theta"]
    geometric = len(theta.values) == 1 and theta.substeps == 1
    seqs = {}
    for s in sigma_pairs(len(a)):
        d = a[s.k - 1] - a[s.j - 1]
        if omega.mode == "float" and geometric:
            lam = float(theta.lam) ** d
            seqs[s] = LacunarySequence.geometric(lam, float(theta.values[0]) ** d / math.sqrt(lam), theta.start)
        else:
            seqs[s] = theta.power(d)
    diss = Dissection(seqs)
    if omega.distinct_count() == 1:
        return LacunaryCertificate(0)
    kids = {}
    for s in diss.sigmas:
        for i, seg in partition(omega, s, seqs[s]).items():
            kids[(s, i)] = LacunaryCertificate(0) if seg.members.distinct_count() == 1 else auto_certificate(seg.members)
    order = 1 + max(c.order for c in kids.values())
    return LacunaryCertificate(order, diss, kids)


def carbery_directions(n: int, k_range) -> DirectionSet:
    """All ``(2^{k_1}, ..., 2^{k_n})`` with every ``k_j`` in ``k_range``.

    Projectively equal tuples are kept as separate entries, so the size is
    always ``len(k_range)**n``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    ks = list(k_range)
    if not ks:
        raise ValueError("empty exponent range")
    grid = np.array(np.meshgrid(*([ks] * n), indexing="ij")).reshape(n, -1).T
    vecs = [[Fraction(2) ** int(k) for k in row] for row in grid]
    return DirectionSet.from_rationals(vecs, meta={"family": "carbery", "k_range": (min(ks), max(ks))})


def carbery_certificate(omega: DirectionSet) -> LacunaryCertificate:
    """Dyadic top-level dissection, children certified by `auto_certificate`."""
    if omega.distinct_count() == 1:
        return LacunaryCertificate(0)
    dyadic = LacunarySequence.dyadic()
    diss = Dissection({s: dyadic for s in sigma_pairs(omega.n)})
    kids = {}
    for s in diss.sigmas:
        for i, seg in partition(omega, s, dyadic).items():
            kids[(s, i)] = auto_certificate(seg.members)
    order = 1 + max(c.order for c in kids.values())
    return LacunaryCertificate(order, diss, kids)


def rational_slopes(count: int, lo=Fraction(1, 2), hi=Fraction(2, 3)) -> list[Fraction]:
    """The first ``count`` reduced fractions in ``[lo, hi]``, ordered by
    denominator and then numerator."""
    out: list[Fraction] = []
    q = 1
    while len(out) < count:
        for p in range(math.ceil(lo * q), math.floor(hi * q) + 1):
            if math.gcd(p, q) == 1:
                out.append(Fraction(p, q))
                if len(out) == count:
                    break
        q += 1
    return out


def rational_slope_set(n: int, L: int) -> DirectionSet:
    """Directions with ``w_1 = q_l w_2`` and ``w_j = 2^{-jl}`` for ``1 < j < n``.

    ``q_l`` runs through `rational_slopes`.  The last coordinate completes
    the unit vector.  For ``n = 2`` the direction is ``(q_l, 1)`` normalized.
    """
    if n < 2 or L < 1:
        raise ValueError("need n >= 2 and L >= 1")
    qs = rational_slopes(L)
    meta = {"family": "rational", "slopes": tuple(qs)}
    if n == 2:
        return DirectionSet.from_floats([[float(q), 1.0] for q in qs], meta=meta)
    vecs = []
    for ell, q in enumerate(qs, start=1):
        w = np.zeros(n)
        w[1] = 2.0 ** (-2 * ell)
        w[0] = float(q) * w[1]
        for j in range(3, n):
            w[j - 1] = 2.0 ** (-j * ell)
        w[-1] = math.sqrt(max(0.0, 1.0 - float(np.dot(w[:-1], w[:-1]))))
        vecs.append(w)
    return DirectionSet.from_floats(vecs, meta=meta)


def rotated_basis(n: int, delta: float = 0.1) -> np.ndarray:
    """Basis ``(e_1, e_2', e_3, ..., e_{n-1}, e_n')`` with ``e_2', e_n'`` a
    small rotation of ``e_2, e_n`` that keeps ``e_n'`` in the positive
    quadrant."""
    c = math.hypot(1.0, delta)
    B = np.eye(n)
    B[1] = 0.0
    B[1, 1], B[1, n - 1] = 1.0 / c, -delta / c
    B[n - 1] = 0.0
    B[n - 1, 1], B[n - 1, n - 1] = delta / c, 1.0 / c
    return B


def _rotated_point(s: float, q: float, n: int, B: np.ndarray) -> np.ndarray:
    x = np.empty(n)
    x[0], x[1] = s, q * s
    for j in range(3, n):
        x[j - 1] = s ** ((n - j) / (n - 2))
    x[n - 1] = 1.0
    w = x @ B
    return w / np.linalg.norm(w)


def _angle(u, v) -> float:
    return math.atan2(np.linalg.norm(u - np.dot(u, v) * v), np.dot(u, v))


def _pair_ratios(w: np.ndarray, B: np.ndarray) -> dict:
    n = len(w)
    out = {}
    for s in sigma_pairs(n):
        if (s.j, s.k) == (2, n):
            continue
        out[s] = w[s.k - 1] / w[s.j - 1]
    out["rot"] = np.dot(w, B[n - 1]) / np.dot(w, B[1])
    return out


def _separated(prev: np.ndarray, cur: np.ndarray, B: np.ndarray, trend: dict) -> bool:
    en = B[-1]
    if _angle(prev, en) < 2.0 * _angle(cur, en):
        return False
    rp, rc = _pair_ratios(prev, B), _pair_ratios(cur, B)
    for key, up in trend.items():
        if up and not rp[key] <= 0.5 * rc[key]:
            return False
        if not up and not rc[key] <= 0.5 * rp[key]:
            return False
    return True


def rotated_accumulating_set(n: int, L: int, delta: float = 0.1, s0: float = 0.5) -> DirectionSet:
    """Directions accumulating at a tilted axis with a dense 2-shadow.

    In the basis of `rotated_basis`, ``w_l`` has coordinates
    ``(s, q_l s, s^{b_3}, ..., s^{b_{n-1}}, 1)`` (normalized), where
    ``b_j = (n-j)/(n-2)``.  Each ``s_l`` is found by bisection so that, going
    from ``w_{l-1}`` to ``w_l``, the angle to ``e_n'`` at least halves and every
    coordinate ratio moves by at least a factor 2 in the direction it drifts
    as ``s -> 0``.  The ratios ``w_k/w_2`` for ``2 < k < n`` shrink, so for
    those pairs it is the reciprocal that doubles.
    """
    if n < 3:
        raise ValueError("the rotated construction needs n >= 3")
    if not 0 < delta < 0.2:
        raise ValueError("delta must lie in (0, 0.2)")
    B = rotated_basis(n, delta)
    qs = [float(q) for q in rational_slopes(L)]
    tiny = 1e-300
    ref_lo = _pair_ratios(_rotated_point(1e-12, qs[0], n, B), B)
    ref_hi = _pair_ratios(_rotated_point(1e-6, qs[0], n, B), B)
    trend = {key: ref_lo[key] > ref_hi[key] for key in ref_lo}
    pts = [_rotated_point(s0, qs[0], n, B)]
    ss = [s0]
    for q in qs[1:]:
        lo, hi = math.log(tiny), math.log(ss[-1])
        if not _separated(pts[-1], _rotated_point(math.exp(lo), q, n, B), B, trend):
            raise ConstructionError("no admissible direction even for tiny s")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _separated(pts[-1], _rotated_point(math.exp(mid), q, n, B), B, trend):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-9:
                break
        else:
            raise ConstructionError("bisection did not converge in 200 iterations")
        s = 0.9 * math.exp(lo)
        w = _rotated_point(s, q, n, B)
        if not _separated(pts[-1], w, B, trend):
            raise ConstructionError("separation conditions fail after bisection")
        pts.append(w)
        ss.append(s)
    meta = {"family": "rotated", "slopes": tuple(qs), "delta": delta, "basis": B, "s": tuple(ss)}
    return DirectionSet.from_floats(pts, meta=meta)


# ---------------------------------------------------------------------------
# rectangles


@dataclass(frozen=True)
class Rectangle2D:
    """A planar rectangle given by centre, long-axis unit vector and sides."""

    center: tuple
    direction: tuple
    length: float
    width: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        nd = float(np.linalg.norm(d))
        if nd == 0:
            raise ValueError("zero direction")
        object.__setattr__(self, "direction", tuple(float(x) for x in d / nd))
        object.__setattr__(self, "center", tuple(float(x) for x in self.center))
        if not self.length >= self.width > 0:
            raise ValueError("need length >= width > 0")

    @property
    def angle(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])

    @property
    def diam(self) -> float:
        return math.hypot(self.length, self.width)

    @property
    def area(self) -> float:
        return self.length * self.width

    def dilate(self, factor: float = 3.0) -> "Rectangle2D":
        """Same centre and width, ``factor`` times the length."""
        return Rectangle2D(self.center, self.direction, factor * self.length, self.width)

    def corners(self) -> np.ndarray:
        c = np.asarray(self.center)
        u = np.asarray(self.direction)
        v = np.array([-u[1], u[0]])
        a, b = 0.5 * self.length * u, 0.5 * self.width * v
        return np.array([c - a - b, c + a - b, c + a + b, c - a + b])

    def to_json(self) -> dict:
        return {"center": list(self.center), "angle": self.angle, "length": self.length, "width": self.width}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Rectangle2D":
        t = float(obj["angle"])
        return cls(tuple(obj["center"]), (math.cos(t), math.sin(t)), float(obj["length"]), float(obj["width"]))


@dataclass(frozen=True)
class RectangleFamily:
    """Rectangles in the plane spanned by the two rows of ``plane_basis``."""

    rectangles: tuple
    plane_basis: np.ndarray = field(default_factory=lambda: np.eye(2))
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        P = np.atleast_2d(np.asarray(self.plane_basis, dtype=float))
        if P.shape[0] != 2 or not np.allclose(P @ P.T, np.eye(2), atol=1e-12):
            raise ValueError("plane_basis must be two orthonormal rows")
        object.__setattr__(self, "plane_basis", P)

    def __len__(self) -> int:
        return len(self.rectangles)

    def __iter__(self):
        return iter(self.rectangles)

    def dilate(self, factor: float = 3.0) -> "RectangleFamily":
        return RectangleFamily(tuple(r.dilate(factor) for r in self.rectangles), self.plane_basis, self.meta)

    def directions(self) -> np.ndarray:
        """Long axes as unit vectors of the ambient space."""
        return np.array([r.direction for r in self.rectangles]) @ self.plane_basis

    def bounds(self, factor: float = 1.0) -> tuple:
        pts = np.vstack([r.dilate(factor).corners() for r in self.rectangles])
        return tuple(pts.min(axis=0)), tuple(pts.max(axis=0))

    def to_json(self) -> dict:
        out = {
            "rectangles": [r.to_json() for r in self.rectangles],
            "plane_basis": self.plane_basis.tolist(),
            "N": self.meta.get("N"),
        }
        if "frame" in self.meta:
            out["frame"] = [list(map(float, x)) for x in self.meta["frame"]]
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "RectangleFamily":
        rects = tuple(Rectangle2D.from_json(r) for r in obj["rectangles"])
        meta = {"N": obj.get("N")} if obj.get("N") is not None else {}
        if obj.get("frame"):
            meta["frame"] = tuple(tuple(x) for x in obj["frame"])
        return cls(rects, np.asarray(obj.get("plane_basis", np.eye(2))), meta)


@dataclass(frozen=True)
class KakeyaLift:
    """``E = U R x [0, alpha]^{n-2}`` in coordinates of ``basis``.

    ``basis`` rows are ambient orthonormal vectors; the first two span the
    plane of ``family``.  ``betas[k]`` belongs to ``family.rectangles[k]`` and
    ``shading[k]`` indexes the direction of the source set used for it.
    """

    family: RectangleFamily
    alpha: float
    betas: tuple
    basis: np.ndarray
    shading: tuple = ()
    directions: DirectionSet | None = None

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def to_json(self) -> dict:
        out = self.family.to_json()
        out.update({"alpha": self.alpha, "betas": list(self.betas), "basis": self.basis.tolist(), "shading": list(self.shading)})
        if self.directions is not None:
            out["directions"] = self.directions.to_json()
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "KakeyaLift":
        dirs = DirectionSet.from_json(obj["directions"]) if obj.get("directions") else None
        return cls(
            RectangleFamily.from_json(obj),
            float(obj["alpha"]),
            tuple(float(b) for b in obj["betas"]),
            np.asarray(obj["basis"], dtype=float),
            tuple(int(i) for i in obj.get("shading", ())),
            dirs,
        )


def _default_slopes(N: int) -> np.ndarray:
    m = 2**N
    q = 0.5 + (1.0 / 6.0) * np.arange(m) / m
    d = np.stack([q, np.ones(m)], axis=1)
    return d / np.linalg.norm(d, axis=1)[:, None]


def planar_slopes(slopes, plane_basis=None, need: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Distinct line directions of ``slopes`` inside a plane.

    Rows with more than two coordinates are projected onto ``plane_basis``
    and normalized.  A row is kept when its cross product with every kept
    row exceeds ``tol``, so directions closer than about ``tol`` radians
    (which no float rectangle family can tell apart) count once.  Stops
    after ``need`` rows when given.
    """
    if isinstance(slopes, DirectionSet):
        X = slopes.array
    else:
        X = np.atleast_2d(np.asarray(slopes, dtype=float))
    if X.shape[1] != 2:
        P = np.eye(2) if plane_basis is None else np.atleast_2d(np.asarray(plane_basis, dtype=float))
        X = X @ P.T
    norms = np.linalg.norm(X, axis=1)
    X = X[norms > 1e-300] / norms[norms > 1e-300, None]
    keep: list[np.ndarray] = []
    for v in X:
        # lines, not rays: identify v with -v
        if all(abs(v[0] * w[1] - v[1] * w[0]) > tol for w in keep):
            keep.append(v)
        if need is not None and len(keep) == need:
            break
    return np.array(keep).reshape(-1, 2)


def _planar_directions(slopes, plane_basis, need: int) -> np.ndarray:
    keep = planar_slopes(slopes, plane_basis, need)
    if len(keep) < need:
        raise ConstructionError(f"need {need} distinct directions, got {len(keep)}")
    return keep


def besicovitch_family(N: int, plane_basis=None, slopes=None, pivot: float = 1.0) -> RectangleFamily:
    """Keich-type family of ``2^N`` thin rectangles.

    Parameters
    ----------
    N : int
        Number of tree levels.
    plane_basis : (2, n) array, optional
        Orthonormal rows spanning the plane (default: the coordinate plane of R^2).
    slopes : DirectionSet or array, optional
        Long-axis directions.  The first ``2^N`` distinct ones are used.  Rows
        with more than two coordinates are projected onto the plane.  By
        default ``(q, 1)`` with ``q`` uniform on ``[1/2, 2/3)``.
    pivot : float
        Offset of the tree pivots, ``x_j = (j - 1 + pivot)/N``.

    Notes
    -----
    Work in the frame ``(u, v)`` with ``u`` the mean direction, write every
    direction as ``u + t v`` and sort by ``t``.  Leaf ``k`` of the binary tree
    gets the line ``y = t_0 x + sum_j D_j(k) (x - x_j)``, where ``D_j(k)`` is
    the slope increment between the level ``j-1`` and level ``j`` ancestors
    (each node carries the slope of its leftmost leaf).  Lines of two
    subtrees split at level ``j`` nearly meet at ``x_j``, which makes the
    union of the rectangles over ``0 <= x <= 1`` small, while the tripled
    rectangles fan out.  The vertical thickness equals the mean slope gap,
    so the long side has horizontal extent 1.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    P = np.eye(2) if plane_basis is None else np.atleast_2d(np.asarray(plane_basis, dtype=float))
    m = 2**N
    D = _default_slopes(N) if slopes is None else _planar_directions(slopes, P, m)
    # orient every direction into the half plane of the first one
    D = np.where((D @ D[0] < 0)[:, None], -D, D)
    u = D.mean(axis=0)
    u /= np.linalg.norm(u)
    v = np.array([-u[1], u[0]])
    t = (D @ v) / (D @ u)
    order = np.argsort(t, kind="stable")
    t = t[order]
    span = t[-1] - t[0]
    gap = span / (m - 1) if m > 1 else 1.0 / 6.0
    node = np.empty((N + 1, m))
    for j in range(N + 1):
        shift = N - j
        node[j] = t[(np.arange(m) >> shift) << shift]
    xs = 0.5
    y = np.full(m, t[0] * xs) + sum((node[j] - node[j - 1]) * (xs - (j - 1 + pivot) / N) for j in range(1, N + 1))
    rects = []
    for k in range(m):
        c = xs * u + y[k] * v
        d = u + t[k] * v
        h = math.hypot(1.0, t[k])
        rects.append(Rectangle2D(tuple(c), tuple(d), h, gap / h))
    meta = {"N": N, "frame": (tuple(u), tuple(v)), "gap": gap, "order": tuple(int(i) for i in order)}
    return RectangleFamily(tuple(rects), P, meta)


def _complete_basis(P: np.ndarray, n: int) -> np.ndarray:
    rows = [r for r in P]
    for e in np.eye(n):
        w = e - sum(np.dot(e, r) * r for r in rows)
        if np.linalg.norm(w) > 1e-8:
            rows.append(w / np.linalg.norm(w))
        if len(rows) == n:
            break
    return np.array(rows)


def kakeya_lift(family: RectangleFamily, omega: DirectionSet, basis=None, tol: float = 1e-9) -> KakeyaLift:
    """Lift a planar family to ``E = U R x [0, alpha]^{n-2}``.

    Each rectangle is shaded by the direction of ``omega`` whose projection
    onto the plane is parallel to its long side (the one with the largest
    projection when several qualify).  Then ``beta(R) = diam(R)/|P w|`` and
    ``alpha = 10 max beta``.

    Raises
    ------
    ValueError
        If some rectangle has no shading direction.
    """
    n = omega.n
    if basis is None:
        if family.plane_basis.shape[1] != n:
            raise ValueError("plane basis does not live in R^n")
        basis = _complete_basis(family.plane_basis, n)
    B = np.asarray(basis, dtype=float)
    if B.shape != (n, n) or not np.allclose(B @ B.T, np.eye(n), atol=1e-12):
        raise ValueError("basis must be an orthonormal n x n matrix")
    P = B[:2]
    fam_dirs = np.array([r.direction for r in family]) @ family.plane_basis
    proj = omega.array @ P.T
    plen = np.hypot(proj[:, 0], proj[:, 1])
    betas, shading = [], []
    for k, r in enumerate(family):
        d = fam_dirs[k] @ P.T
        d /= np.linalg.norm(d)
        cross = np.abs(proj[:, 0] * d[1] - proj[:, 1] * d[0])
        ok = (plen > 0) & (cross <= tol * np.maximum(plen, 1e-300))
        if not ok.any():
            raise ConstructionError(f"no direction of the set shades rectangle {k}")
        idx = int(np.flatnonzero(ok)[np.argmax(plen[ok])])
        betas.append(r.diam / float(plen[idx]))
        shading.append(idx)
    alpha = 10.0 * max(betas)
    return KakeyaLift(family, alpha, tuple(betas), B, tuple(shading), omega)
