"""Cone multipliers and the frequency-side identities behind the main bound.

All operators act on periodic grids through the DFT with numpy's default
normalization (forward unnormalized, inverse divided by the cell count), so
``sum |fft(f)|^2 = size * sum |f|^2``.  Frequencies are ``2 pi fftfreq(N, h)``
per axis.  Every identity checked here holds pointwise in frequency, so the
periodic setting loses nothing.

The multiplier profile is the standard smooth step
``s(t) = rho(t) / (rho(t) + rho(1 - t))`` with ``rho(t) = exp(-1/t)`` for
``t > 0`` and ``0`` otherwise: ``s = 0`` for ``t <= 0``, ``s = 1`` for
``t >= 1``, exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .directions import INF, LacunarySequence, SigmaPair, is_refined, segment_index, sigma_pairs
from .grid import GridFunction

__all__ = [
    "smooth_step",
    "ConeSpec",
    "FrequencyGrid",
    "MultiplierStack",
    "psi_eval",
    "build_m_o_and_eta",
    "m_multiplier",
    "T_multiplier",
    "S_multiplier",
    "apply_multiplier",
    "apply_K",
    "apply_R",
    "apply_T",
    "apply_S",
    "inclusion_exclusion_residual",
    "vanishing_check",
    "region_emptiness_search",
    "overlap_count",
    "cone_count_bound",
    "square_function_p2",
    "PreconditionError",
]

M_O_POINTS = 2**12 + 1


class PreconditionError(ValueError):
    """The inputs do not satisfy the hypotheses of a check."""


def _rho(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity monotone step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    a, b = _rho(t), _rho(1.0 - t)
    out = np.where(t >= 1.0, 1.0, 0.0)
    mid = (t > 0) & (t < 1)
    out[mid] = a[mid] / (a[mid] + b[mid])
    return out


@dataclass(frozen=True)
class ConeSpec:
    """Two-coordinate cone around ``xi_j = -theta xi_k``."""

    sigma: SigmaPair
    theta: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", SigmaPair.of(self.sigma))
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.sigma.k > self.n:
            raise ValueError("sigma does not fit the dimension")

    @property
    def inner(self) -> float:
        return (self.n - 1) / self.n

    @property
    def outer(self) -> float:
        return self.n / (self.n + 1)


def cone_ratio(spec: ConeSpec, xi) -> np.ndarray:
    """``u = |theta xi_k + xi_j| / (|theta xi_k| + |xi_j|)``; ``nan`` where both vanish."""
    xi = np.asarray(xi, dtype=float)
    a = spec.theta * xi[..., spec.sigma.k - 1]
    b = xi[..., spec.sigma.j - 1]
    den = np.abs(a) + np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, np.abs(a + b) / den, np.nan)


def psi_eval(spec: ConeSpec, xi) -> np.ndarray:
    """Smooth cone cutoff ``psi_{sigma,i}``.

    1 where ``u <= (n-1)/n``, 0 where ``u >= n/(n+1)`` and at
    ``xi_j = xi_k = 0``, and ``s((outer - u)/(outer - inner))`` between.
    """
    u = cone_ratio(spec, xi)
    t = (spec.outer - u) / (spec.outer - spec.inner)
    out = smooth_step(np.where(np.isnan(t), -1.0, t))
    return out


@lru_cache(maxsize=None)
def _m_o_table(points: int = M_O_POINTS):
    t = np.linspace(-1.0, 1.0, points)
    dt = t[1] - t[0]
    phi = np.zeros_like(t)
    inside = np.abs(t) < 0.5
    phi[inside] = np.exp(-1.0 / (0.25 - t[inside] ** 2))
    phi /= phi.sum() * dt
    m = np.convolve(phi, phi, mode="same") * dt
    m = 0.5 * (m + m[::-1])
    m[0] = m[-1] = 0.0
    return t, m


def _m_o(x):
    t, m = _m_o_table()
    x = np.asarray(x, dtype=float)
    out = np.interp(x, t, m, left=0.0, right=0.0)
    return np.where(np.abs(x) >= 1.0, 0.0, out)


def _eta(zeta, n: int):
    r = np.linalg.norm(np.asarray(zeta, dtype=float), axis=-1)
    return smooth_step((4.0 * n * n - r) / (2.0 * n * n))


def build_m_o_and_eta(n: int):
    """The bumps ``m_o`` (on R) and ``eta_o`` (on R^n).

    ``m_o = phi_o * phi_o`` with ``phi_o(t) = exp(-1/(1/4 - t^2))`` on
    ``|t| < 1/2``, normalized to unit integral, tabulated on
    ``M_O_POINTS`` nodes of ``[-1, 1]`` and interpolated linearly; it is
    exactly 0 for ``|t| >= 1``.  ``eta_o`` is radial, 1 on ``|xi| <= 2n^2``
    and 0 on ``|xi| >= 4n^2``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    return _m_o, (lambda zeta: _eta(zeta, n))


def m_multiplier(zeta, n: int):
    """``m(zeta) = (1 - eta_o(zeta)) m_o(1 . zeta)``."""
    zeta = np.asarray(zeta, dtype=float)
    return (1.0 - _eta(zeta, n)) * _m_o(zeta.sum(axis=-1))


def T_multiplier(r: float, omega, xi):
    """Symbol of ``T_{r,w}``: ``m(r (w_1 xi_1, ..., w_n xi_n))``."""
    w = np.asarray(omega, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return m_multiplier(r * w * xi, len(w))


def S_multiplier(r: float, omega, xi):
    """Symbol of ``S_{r,w}``: ``eta_o(r w . xi) m_o(r w . xi)`` (componentwise
    product inside ``eta_o``, dot product inside ``m_o``)."""
    w = np.asarray(omega, dtype=float)
    zeta = r * w * np.asarray(xi, dtype=float)
    return _eta(zeta, len(w)) * _m_o(zeta.sum(axis=-1))


@dataclass(frozen=True)
class FrequencyGrid:
    """Periodic lattice with ``extents`` cells of size ``spacing`` per axis."""

    extents: tuple
    spacing: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))

    @classmethod
    def of(cls, f: GridFunction) -> "FrequencyGrid":
        return cls(f.dims, f.spacing)

    @property
    def n(self) -> int:
        return len(self.extents)

    def axes(self) -> list[np.ndarray]:
        return [2 * np.pi * np.fft.fftfreq(e, self.spacing) for e in self.extents]

    def xi(self) -> np.ndarray:
        """All lattice frequencies, shape ``extents + (n,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def scaled(self, r: float) -> "FrequencyGrid":
        """The lattice of ``r xi``."""
        return FrequencyGrid(self.extents, self.spacing / r)


@dataclass(frozen=True)
class MultiplierStack:
    """The cones ``Psi_{sigma,i}`` of a dissection.

    ``sequences`` gives ``theta_{sigma,i}`` for every ``sigma`` in use;
    ``indices`` optionally restricts the ``i`` considered per ``sigma``
    (default: every ``i`` whose cone meets the lattice, see
    `relevant_indices`).
    """

    n: int
    sequences: Mapping
    grid: FrequencyGrid | None = None
    indices: Mapping = field(default_factory=dict)

    def __post_init__(self):
        seqs = {SigmaPair.of(s): q for s, q in dict(self.sequences).items()}
        for s, q in seqs.items():
            if not isinstance(q, LacunarySequence):
                raise TypeError("sequences must be LacunarySequence values")
            if s.k > self.n:
                raise ValueError("sigma does not fit the dimension")
        object.__setattr__(self, "sequences", seqs)
        object.__setattr__(self, "indices", {SigmaPair.of(s): tuple(v) for s, v in dict(self.indices).items()})

    @classmethod
    def uniform(cls, n: int, seq: LacunarySequence, grid=None, indices=None) -> "MultiplierStack":
        sig = sigma_pairs(n)
        idx = {} if indices is None else {s: tuple(indices) for s in sig}
        return cls(n, {s: seq for s in sig}, grid, idx)

    def cone(self, sigma, i: int) -> ConeSpec:
        sigma = SigmaPair.of(sigma)
        return ConeSpec(sigma, float(self.sequences[sigma].theta(i)), self.n)

    def relevant_indices(self, sigma, grid: FrequencyGrid | None = None) -> tuple:
        """Indices ``i`` whose outer cone contains a nonzero lattice frequency."""
        sigma = SigmaPair.of(sigma)
        if sigma in self.indices:
            return self.indices[sigma]
        grid = grid or self.grid
        if grid is None:
            raise ValueError("no grid to derive the index range from")
        a = np.abs(grid.axes()[sigma.j - 1])
        b = np.abs(grid.axes()[sigma.k - 1])
        a, b = a[a > 0], b[b > 0]
        lo_ratio, hi_ratio = a.min() / b.max(), a.max() / b.min()
        c = 2 * self.n + 1
        seq = self.sequences[sigma]
        # theta_i within (rho/c, rho c) for some lattice ratio rho
        i_lo = seq.index_of(hi_ratio * c) - 1
        i_hi = seq.index_of(lo_ratio / c) + 1
        return tuple(range(i_lo, i_hi + 1))


def _check_pow2(f: GridFunction):
    for e in f.dims:
        if e & (e - 1):
            raise ValueError(f"grid extents must be powers of two, got {f.dims}")


def lattice_reflect(a: np.ndarray) -> np.ndarray:
    """``a[-k mod N]``: the array seen at the negated lattice frequencies."""
    axes = tuple(range(a.ndim))
    return np.roll(np.flip(a, axes), 1, axes)


def apply_multiplier(f: GridFunction, symbol: np.ndarray) -> GridFunction:
    """Inverse DFT of ``symbol * DFT(f)`` for an even symbol.

    On even extents the Nyquist frequency ``-N/2`` is its own negative, so
    an even function of ``xi`` need not be even on the lattice there.  The
    symbol is averaged with its lattice reflection, which only touches the
    Nyquist planes and keeps the output real.
    """
    _check_pow2(f)
    symbol = 0.5 * (symbol + lattice_reflect(symbol))
    F = np.fft.fftn(f.data)
    g = np.fft.ifftn(symbol * F)
    scale = max(1.0, float(np.abs(f.data).max()))
    if np.abs(g.imag).max() > 1e-12 * scale:
        raise ArithmeticError("multiplier produced a complex output")
    return f.like(g.real)


def _index_map(index, sigmas) -> dict:
    if isinstance(index, Mapping):
        return {SigmaPair.of(s): i for s, i in index.items()}
    index = tuple(index)
    if len(index) != len(sigmas):
        raise ValueError("multi-index length does not match the pairs")
    return dict(zip(sigmas, index))


def apply_K(f: GridFunction, sigma, i: int, stack: MultiplierStack) -> GridFunction:
    """Convolution with the cone cutoff ``psi_{sigma,i}``."""
    xi = FrequencyGrid.of(f).xi()
    return apply_multiplier(f, psi_eval(stack.cone(sigma, i), xi))


def apply_R(f: GridFunction, index, stack: MultiplierStack) -> GridFunction:
    """Multiplier ``prod_sigma (1 - psi_{sigma,i_sigma})``."""
    xi = FrequencyGrid.of(f).xi()
    sym = np.ones(f.dims)
    for s, i in _index_map(index, sigma_pairs(stack.n)).items():
        sym = sym * (1.0 - psi_eval(stack.cone(s, i), xi))
    return apply_multiplier(f, sym)


def apply_T(f: GridFunction, r: float, omega) -> GridFunction:
    xi = FrequencyGrid.of(f).xi()
    return apply_multiplier(f, T_multiplier(r, omega, xi))


def apply_S(f: GridFunction, r: float, omega) -> GridFunction:
    xi = FrequencyGrid.of(f).xi()
    return apply_multiplier(f, S_multiplier(r, omega, xi))


def inclusion_exclusion_residual(f: GridFunction, r: float, omega, index, stack: MultiplierStack) -> float:
    """Relative L2 residual of ``T = T R + sum_Gamma (-1)^{|Gamma|+1} T prod_{Gamma} K``.

    Every term is transformed back to space separately before summing.
    The reference norm is ``||T f||`` (``||f||`` if that vanishes).
    """
    sig = sigma_pairs(stack.n)
    idx = _index_map(index, sig)
    xi = FrequencyGrid.of(f).xi()
    F = np.fft.fftn(f.data)
    t_sym = T_multiplier(r, omega, xi)
    psi = {s: psi_eval(stack.cone(s, i), xi) for s, i in idx.items()}
    lhs = np.fft.ifftn(t_sym * F).real
    r_sym = np.ones(f.dims)
    for s in sig:
        r_sym = r_sym * (1.0 - psi[s])
    rhs = np.fft.ifftn(t_sym * r_sym * F).real
    for size in range(1, len(sig) + 1):
        for gamma in itertools.combinations(sig, size):
            g = np.ones(f.dims)
            for s in gamma:
                g = g * psi[s]
            rhs = rhs + (-1) ** (size + 1) * np.fft.ifftn(t_sym * g * F).real
    ref = np.linalg.norm(lhs)
    if ref == 0:
        ref = np.linalg.norm(f.data)
    if ref == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / ref)


def vanishing_check(
    r: float,
    omega,
    index,
    stack: MultiplierStack,
    grid: FrequencyGrid | None = None,
    chunk: int = 2**20,
    strict: bool = True,
) -> float:
    """``max |m(r w xi) prod_sigma (1 - psi_{sigma,i_sigma})(xi)|`` over the lattice.

    With ``strict=False`` the cell membership test is skipped, which lets a
    caller search for a nonzero value when ``w`` lies outside the cell.

    Raises
    ------
    PreconditionError
        Unless ``w`` lies in the open positive octant, every sequence of the
        stack satisfies the 2/3 refinement condition and ``w`` belongs to
        the cell ``index``.
    """
    grid = grid or stack.grid
    if grid is None:
        raise ValueError("no frequency grid")
    w = np.asarray(omega, dtype=float)
    w = w / np.linalg.norm(w)
    if not np.all(w > 0):
        raise PreconditionError("direction must lie in the open positive octant")
    sig = sigma_pairs(stack.n)
    idx = _index_map(index, sig)
    for s in sig:
        seq = stack.sequences[s]
        if not is_refined(seq):
            raise PreconditionError(f"sequence for sigma=({s.j},{s.k}) violates the 2/3 condition")
        got = segment_index(tuple(w), s, seq)
        if strict and got != idx[s]:
            raise PreconditionError(f"direction lies in segment {got}, not {idx[s]}, for sigma=({s.j},{s.k})")
    n = stack.n
    cones = [stack.cone(s, idx[s]) for s in sig]
    best = 0.0
    for xi in _slab_points(grid, r, w, chunk):
        m = m_multiplier(r * w * xi, n)
        live = m != 0
        if not live.any():
            continue
        prod = m[live]
        for c in cones:
            prod = prod * (1.0 - psi_eval(c, xi[live]))
        best = max(best, float(np.abs(prod).max()))
    return best


def _slab_points(grid: FrequencyGrid, r: float, w: np.ndarray, chunk: int):
    """Lattice points that can carry ``m(r w xi) != 0``.

    ``m`` needs ``|r w xi| > 2n^2`` and ``|r w . xi| < 1``.  Solve the
    second condition for the axis where ``w`` is largest and enumerate the
    lattice values in that interval, padded by one step on each side.
    """
    n = grid.n
    axes = grid.axes()
    if r * float(np.sqrt(sum((np.abs(a).max() * wd) ** 2 for a, wd in zip(axes, w)))) <= 2.0 * n * n:
        return
    a = int(np.argmax(w))
    N = grid.extents[a]
    step = 2 * np.pi / (N * grid.spacing)
    others = [d for d in range(n) if d != a]
    mesh = np.stack(np.meshgrid(*[axes[d] for d in others], indexing="ij"), axis=-1).reshape(-1, n - 1)
    s = r * (mesh @ w[others])
    lo = np.ceil((-1.0 - s) / (r * w[a]) / step).astype(np.int64) - 1
    hi = np.floor((1.0 - s) / (r * w[a]) / step).astype(np.int64) + 1
    lo = np.maximum(lo, -(N // 2))
    hi = np.minimum(hi, (N - 1) // 2)
    count = np.maximum(hi - lo + 1, 0)
    rows = np.repeat(np.arange(len(mesh)), count)
    if len(rows) == 0:
        return
    first = np.repeat(np.cumsum(count) - count, count)
    ks = np.repeat(lo, count) + (np.arange(len(rows)) - first)
    for start in range(0, len(rows), chunk):
        sl = slice(start, start + chunk)
        xi = np.empty((len(rows[sl]), n))
        xi[:, others] = mesh[rows[sl]]
        xi[:, a] = axes[a][np.mod(ks[sl], N)]
        yield xi


def region_emptiness_search(
    n: int,
    r: float = 1.0,
    resolution: int = 64,
    samples: int = 10**6,
    seed: int = 7,
    constant: float | None = None,
    chunk: int = 2**20,
) -> np.ndarray:
    """Points satisfying both the low-frequency slab and the cone conditions.

    Searches for ``xi`` with ``|sum xi_j| <= 1/r``, ``|xi| >= 2n^2/r`` and
    ``|xi_k + xi_j| > c (|xi_k| + |xi_j|)`` for every pair, where ``c``
    defaults to ``(n-1)/(n+1)``.  Scans the lattice with ``resolution``
    points per axis on ``[-8n^2/r, 8n^2/r]^n`` and ``samples`` random points
    of the slab with ``2n^2/r <= |xi| <= 8n^2/r``.  The conditions are
    scale invariant, so the search runs at ``r = 1`` and rescales.

    Returns
    -------
    ndarray of shape (k, n)
        Every violating point found (expected: none).
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    c = (n - 1) / (n + 1) if constant is None else float(constant)
    R = 8.0 * n * n
    pairs = sigma_pairs(n)

    def violating(x):
        ok = np.abs(x.sum(axis=1)) <= 1.0
        ok &= np.linalg.norm(x, axis=1) >= 2.0 * n * n
        for s in pairs:
            a, b = x[:, s.j - 1], x[:, s.k - 1]
            ok &= np.abs(a + b) > c * (np.abs(a) + np.abs(b))
        return x[ok]

    found = []
    ax = np.linspace(-R, R, resolution)
    total = resolution**n
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        sub = np.stack(np.unravel_index(flat, (resolution,) * n), axis=1)
        found.append(violating(ax[sub]))
    rng = np.random.default_rng(seed)
    one = np.ones(n) / math.sqrt(n)
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        g = rng.standard_normal((k, n))
        g -= np.outer(g @ one, one)
        g /= np.linalg.norm(g, axis=1)[:, None]
        rad = rng.uniform(2.0 * n * n, R, size=k)
        s = rng.uniform(-1.0, 1.0, size=k) / math.sqrt(n)
        found.append(violating(g * rad[:, None] + np.outer(s, one)))
    out = np.concatenate(found, axis=0)
    return out / r


def overlap_count(stack: MultiplierStack, sigma, grid: FrequencyGrid | None = None, angles: int = 200_001) -> int:
    """Largest number of cones ``Psi_{sigma,i}`` whose cutoffs are positive at
    a common frequency.

    ``psi`` depends only on the direction of ``(xi_j, xi_k)``, so besides the
    lattice (when a grid is given) a fine grid of ``angles`` directions in
    that plane is scanned.
    """
    sigma = SigmaPair.of(sigma)
    grid = grid or stack.grid
    ts = np.linspace(0.0, np.pi, angles)
    pts = [np.stack([np.cos(ts), np.sin(ts)], axis=1)]
    if grid is not None:
        a, b = np.meshgrid(grid.axes()[sigma.j - 1], grid.axes()[sigma.k - 1], indexing="ij")
        pts.append(np.stack([a.ravel(), b.ravel()], axis=1))
    plane = np.concatenate(pts, axis=0)
    xi = np.zeros((len(plane), stack.n))
    xi[:, sigma.j - 1], xi[:, sigma.k - 1] = plane[:, 0], plane[:, 1]
    if grid is not None:
        ids = stack.relevant_indices(sigma, grid)
    else:
        ids = stack.indices.get(sigma)
        if ids is None:
            raise ValueError("give a grid or an explicit index range")
    count = np.zeros(len(xi), dtype=np.int64)
    for i in ids:
        count += psi_eval(stack.cone(sigma, i), xi) > 0
    return int(count.max())


def cone_count_bound(seq: LacunarySequence, n: int, rho: float) -> int:
    """Number of ``i`` with ``theta_i`` in ``(rho/(2n+1), rho (2n+1))``.

    For ``xi_j = -rho xi_k`` the cutoff ``psi_{sigma,i}`` is positive exactly
    for these ``i``, which gives an independent count for `overlap_count`.
    """
    c = 2 * n + 1
    lo, hi = seq.index_of(rho * c), seq.index_of(rho / c)
    return sum(1 for i in range(lo - 1, hi + 2) if rho / c < float(seq.theta(i)) < rho * c)


def square_function_p2(f: GridFunction, stack: MultiplierStack, sigma) -> tuple[float, float]:
    """``(sum_i ||K_{sigma,i} f||_2^2, ||f||_2^2)`` over the relevant indices."""
    sigma = SigmaPair.of(sigma)
    grid = FrequencyGrid.of(f)
    vol = f.cell_volume
    lhs = 0.0
    for i in stack.relevant_indices(sigma, grid):
        g = apply_K(f, sigma, i, stack)
        lhs += float(np.sum(g.data**2) * vol)
    return lhs, float(np.sum(f.data**2) * vol)
