"""Certificates of finite lacunary order.

A certificate records, recursively, the dissection used at each level and a
child certificate for every nonempty segment.  Verification re-derives every
segment from scratch, so a certificate only has to be *correct*, not
trusted.  Searching for an optimal dissection is out of reach in general;
`auto_certificate` is a constructive heuristic that always terminates on
finite sets and reports the lacunary constants it had to use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .directions import (
    INF,
    DirectionSet,
    Dissection,
    LacunarySequence,
    SigmaPair,
    coordinates,
    partition,
    sigma_pairs,
)

__all__ = [
    "LacunaryCertificate",
    "CertificateCheck",
    "verify_lacunary_certificate",
    "verify_dominating",
    "auto_certificate",
    "singleton_certificate",
    "span_dimension",
]

SPAN_TOL = 1e-9


@dataclass(frozen=True)
class LacunaryCertificate:
    """Claim that a direction set is lacunary of order ``order``.

    ``children`` maps ``(sigma, i)`` to the certificate of segment
    ``Omega_{sigma,i}``; ``members`` optionally pins the expected members.
    ``max_lambda`` is the claimed uniform bound on the lacunary constants
    used anywhere in the tree (``None``: no claim).
    """

    order: int
    dissection: Dissection | None = None
    children: Mapping = field(default_factory=dict)
    members: DirectionSet | None = None
    max_lambda: float | None = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        kids = {(SigmaPair.of(s), _index(i)): c for (s, i), c in dict(self.children).items()}
        object.__setattr__(self, "children", kids)

    @property
    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth for c in self.children.values())

    def walk(self):
        yield self
        for c in self.children.values():
            yield from c.walk()

    @property
    def lacunary_constant(self) -> float:
        """Largest lacunary constant of any dissection in the tree."""
        return max((c.dissection.lacunary_constant for c in self.walk() if c.dissection is not None), default=0.0)

    def to_json(self) -> dict:
        out = {"order": self.order}
        if self.max_lambda is not None:
            out["max_lambda"] = float(self.max_lambda)
        if self.members is not None:
            out["members"] = self.members.to_json()
        if self.dissection is not None:
            out["dissection"] = self.dissection.to_json()
        if self.children:
            kids = sorted(self.children.items(), key=lambda kv: (kv[0][0], kv[0][1]))
            out["children"] = [
                {"sigma": [s.j, s.k], "index": "inf" if i == INF else int(i), "certificate": c.to_json()}
                for (s, i), c in kids
            ]
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "LacunaryCertificate":
        diss = Dissection.from_json(obj["dissection"]) if obj.get("dissection") else None
        kids = {
            (SigmaPair.of(e["sigma"]), _index(e["index"])): cls.from_json(e["certificate"])
            for e in obj.get("children", [])
        }
        members = DirectionSet.from_json(obj["members"]) if obj.get("members") else None
        return cls(int(obj["order"]), diss, kids, members, obj.get("max_lambda"))


def _index(i):
    if i == "inf" or i == INF:
        return INF
    return int(i)


@dataclass(frozen=True)
class CertificateCheck:
    """Outcome of `verify_lacunary_certificate`; truthy iff valid."""

    valid: bool
    order: int | None = None
    witness: str | None = None
    max_lambda: float = 0.0

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return f"order {self.order}"
        return f"invalid: {self.witness}"


def span_dimension(omega: DirectionSet, tol: float = SPAN_TOL) -> int:
    if len(omega) == 0:
        return 0
    s = np.linalg.svd(omega.array, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def _same_members(a: DirectionSet, b: DirectionSet) -> bool:
    if len(a.unique()) != len(b.unique()):
        return False
    if a.mode == b.mode == "rational":
        return set(a.coords) == set(b.coords)
    A, B = a.array, b.array
    return all(np.min(np.linalg.norm(B - v, axis=1)) < 1e-9 for v in A) and all(
        np.min(np.linalg.norm(A - v, axis=1)) < 1e-9 for v in B
    )


def verify_lacunary_certificate(omega: DirectionSet, cert: LacunaryCertificate) -> CertificateCheck:
    """Check a certificate against a finite direction set.

    Returns a valid result carrying the certified order, or the first
    violated condition as a human-readable witness.
    """
    if len(omega) == 0:
        return CertificateCheck(False, witness="empty direction set")
    lam = cert.lacunary_constant
    witness = _check(omega, cert, cert.order, "root")
    if witness is None and cert.max_lambda is not None and lam > cert.max_lambda:
        witness = f"lacunary constant {lam:.6g} exceeds the claimed bound {cert.max_lambda:.6g}"
    if witness is not None:
        return CertificateCheck(False, witness=witness, max_lambda=lam)
    return CertificateCheck(True, order=cert.order, max_lambda=lam)


def _check(omega: DirectionSet, cert: LacunaryCertificate, bound: int, path: str) -> str | None:
    if cert.order > bound:
        return f"{path}: order {cert.order} exceeds the allowed {bound}"
    if cert.members is not None and not _same_members(omega, cert.members):
        return f"{path}: segment membership does not match the certificate"
    distinct = omega.distinct_count()
    if cert.order == 0:
        if distinct != 1:
            return f"{path}: order-0 certificate on {distinct} distinct directions"
        return None
    if distinct == 1 and cert.dissection is None:
        return None
    diss = cert.dissection
    if diss is None:
        return f"{path}: order {cert.order} certificate without a dissection"
    if diss.basis is not None and np.asarray(diss.basis).shape[0] != omega.n:
        return f"{path}: basis has the wrong size for R^{omega.n}"
    d = span_dimension(omega)
    if d >= 2:
        coords = np.array([[float(v) for v in c] for c in coordinates(omega, diss.basis)])
        coords /= np.linalg.norm(coords, axis=1)[:, None]
        if d < omega.n and np.max(np.abs(coords[:, d:])) > SPAN_TOL:
            return f"{path}: the first {d} basis vectors do not span the directions"
    expected = set(sigma_pairs(max(d, 2)))
    missing = expected - set(diss.sequences)
    if missing:
        s = min(missing)
        return f"{path}: no lacunary sequence for sigma=({s.j},{s.k})"
    seen = set()
    for sigma in sorted(expected):
        for i, seg in partition(omega, sigma, diss.sequences[sigma], diss.basis).items():
            seen.add((sigma, i))
            child = cert.children.get((sigma, i))
            where = f"{path}/sigma=({sigma.j},{sigma.k}),i={'inf' if i == INF else i}"
            if child is None:
                if seg.members.distinct_count() == 1 and cert.order >= 1:
                    continue  # a single direction is lacunary of order 0
                return f"{where}: nonempty segment of {len(seg)} directions has no child certificate"
            w = _check(seg.members, child, cert.order - 1, where)
            if w is not None:
                return w
    extra = set(cert.children) - seen
    if extra:
        s, i = sorted(extra, key=lambda t: (t[0], t[1]))[0]
        return f"{path}: certificate references empty segment sigma=({s.j},{s.k}), i={i}"
    return None


def verify_dominating(segments: Mapping, norm_estimates: Mapping, i_star) -> bool:
    """Is segment ``i_star`` dominating among ``segments``?

    ``norm_estimates`` are empirical lower bounds of the segment operator
    norms (for instance from `lacuna.maximal.norm_ratio`), so the answer is a
    surrogate for the operator-norm condition, not a proof of it.
    """
    for i in segments:
        if i not in norm_estimates:
            raise KeyError(f"no norm estimate for segment {i}")
    if i_star not in norm_estimates:
        raise KeyError(f"no norm estimate for segment {i_star}")
    ref = 2.0 * norm_estimates[i_star]
    return all(norm_estimates[i] <= ref for i in segments)


# ---------------------------------------------------------------------------
# constructive certificates


def singleton_certificate() -> LacunaryCertificate:
    return LacunaryCertificate(0)


def band_sequence(ratios, rel_tol: float = 1e-12) -> LacunarySequence:
    """A sequence putting every distinct positive ratio in its own band.

    Band edges are geometric means of neighbouring distinct ratios; the
    outer edges continue the same spacing.
    """
    vals = sorted({r for r in ratios}, reverse=True)
    clusters: list[list] = []
    for r in vals:
        if clusters and float(clusters[-1][-1]) <= float(r) * (1 + rel_tol):
            clusters[-1].append(r)
        else:
            clusters.append([r])
    if len(clusters) == 1:
        top = float(clusters[0][0])
        return LacunarySequence((2.0 * top, 0.5 * float(clusters[0][-1])), 0.25, -1)
    edges = [math.sqrt(float(a[-1]) * float(b[0])) for a, b in zip(clusters, clusters[1:])]
    first_gap = float(clusters[1][0]) / float(clusters[0][-1])
    last_gap = float(clusters[-1][0]) / float(clusters[-2][-1])
    head = float(clusters[0][0]) / math.sqrt(first_gap)
    tail = float(clusters[-1][-1]) * math.sqrt(last_gap)
    table = [head, *edges, tail]
    lam = max(b / a for a, b in zip(table, table[1:]))
    return LacunarySequence(tuple(table), lam, -1)


def _aligned_basis(omega: DirectionSet) -> np.ndarray:
    """Orthonormal basis whose leading rows span ``omega``, built from the
    projected coordinate axes by Gram-Schmidt (so coordinate-aligned spans
    get the standard basis back)."""
    X = omega.array
    n = omega.n
    d = span_dimension(omega)
    _, _, vt = np.linalg.svd(X)
    span = vt[:d]
    rows: list[np.ndarray] = []

    def add(v, limit):
        # orthogonalize twice so nearly dependent axes stay orthogonal
        for _ in range(2):
            for r in rows:
                v = v - np.dot(v, r) * r
        nv = np.linalg.norm(v)
        if nv > 1e-6 and len(rows) < limit:
            rows.append(v / nv)

    axes = np.eye(n)
    order = np.argsort(-np.linalg.norm(span @ axes, axis=0), kind="stable")
    for a in order:
        add(span.T @ (span @ axes[a]), d)
    for a in range(n):
        add(axes[a].copy(), n)
    return np.array(rows)


def _coordinate_aligned(omega: DirectionSet) -> bool:
    d = span_dimension(omega)
    if d == omega.n:
        return True
    coords = omega.array
    return bool(np.all(np.abs(coords[:, d:]) <= SPAN_TOL))


def _ratios(coords, sigma):
    out = []
    for c in coords:
        a, b = c[sigma.j - 1], c[sigma.k - 1]
        if a != 0 and b != 0:
            out.append(abs(b / a))
    return out


def auto_certificate(omega: DirectionSet, max_depth: int | None = None, seed: int = 0) -> LacunaryCertificate:
    """Build a certificate for a finite set by recursive band dissection.

    At every level the standard basis is used when the directions span a
    coordinate subspace, otherwise a basis aligned with the coordinate axes
    by Gram-Schmidt; each pair gets the `band_sequence` of the ratios that
    occur, which isolates distinct ratios.  If no pair separates anything
    (e.g. sign-symmetric sets), seeded random rotations are tried.

    The resulting order is an upper bound; the reported lacunary constants
    measure how uneven the dissection had to be.
    """
    rng = np.random.default_rng(seed)
    limit = max_depth if max_depth is not None else 4 * omega.n + 4
    return _auto(omega, limit, rng)


def _auto(omega: DirectionSet, limit: int, rng) -> LacunaryCertificate:
    if omega.distinct_count() == 1:
        return LacunaryCertificate(0)
    if limit <= 0:
        raise RuntimeError("auto_certificate exceeded its depth limit")
    d = span_dimension(omega)
    candidates = [None if _coordinate_aligned(omega) else _aligned_basis(omega)]
    for _ in range(8):
        base = _aligned_basis(omega)
        rot = np.eye(omega.n)
        rot[:d, :d] = np.linalg.qr(rng.standard_normal((d, d)))[0]
        candidates.append(rot @ base)
    for basis in candidates:
        coords = coordinates(omega, basis)
        seqs = {}
        for sigma in sigma_pairs(max(d, 2)):
            seqs[sigma] = band_sequence(_ratios(coords, sigma) or [1.0])
        diss = Dissection(seqs, basis)
        parts = {s: partition(omega, s, diss.sequences[s], basis) for s in diss.sigmas}
        if all(len(seg) == len(omega) for p in parts.values() for seg in p.values()):
            continue  # nothing separated; try another basis
        children = {}
        for s, p in parts.items():
            for i, seg in p.items():
                if seg.members.distinct_count() > 1 and len(seg) == len(omega):
                    children = None
                    break
                children[(s, i)] = _auto(seg.members, limit - 1, rng)
            if children is None:
                break
        if children is None:
            continue
        order = 1 + max(c.order for c in children.values())
        return LacunaryCertificate(order, diss, children)
    raise RuntimeError("auto_certificate could not separate the directions")
