"""Discrete directional, tube and strong maximal operators.

Sampling rule
-------------
For a grid point with index ``i``, a unit direction ``w`` and a radius with
half-count ``M = ceil(r/h)``, the line average is

    A(i, w, M) = (1/(2M+1)) * sum_{m=-M..M} |f|(i - m w)

where ``|f|`` at a non-grid point is multilinear interpolation with zero
extension outside the grid.  The sample offset ``t = -(m * w_d)`` is split
as ``floor(t)`` and ``t - floor(t)``; corner weights are products over the
axes in order, and corners are summed in ``itertools.product((0, 1),
repeat=n)`` order.  Samples enter the running sum centre-out
(``m = 0, -1, 1, -2, 2, ...``) and the average is taken whenever ``M`` hits a
radius.  The result is ``max(0, max over directions, then radii)``.

`directional_maximal` and `brute_oracle` both follow this rule, so they
agree bit for bit.  The fast path only skips samples whose interpolation
corners are all zero, which adds ``+0.0`` and so cannot change a sum.
"""

from __future__ import annotations

import math
import os

import numba
import numpy as np
from scipy import ndimage

from .directions import DirectionSet
from .grid import GridFunction, RadiusSet

__all__ = [
    "hl_1d",
    "strong_maximal",
    "directional_maximal",
    "brute_oracle",
    "tube_maximal",
    "line_average",
    "norm_ratio",
    "set_threads",
    "ORACLE_LIMIT",
]

ORACLE_LIMIT = 10**6

# prefer OpenMP; an outdated TBB only produces a warning before numba falls back
if os.environ.get("NUMBA_THREADING_LAYER") is None:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


def set_threads(count: int | None = None) -> int:
    """Cap the numba worker count (``LACUNA_THREADS`` when ``count`` is None).

    Results never depend on the thread count: work is split over output
    points and every per-point reduction is sequential.
    """
    if count is None:
        env = os.environ.get("LACUNA_THREADS")
        count = int(env) if env else numba.config.NUMBA_NUM_THREADS
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count


def _directions(omega, n: int) -> np.ndarray:
    if isinstance(omega, DirectionSet):
        W = omega.array
    else:
        W = np.atleast_2d(np.asarray(omega, dtype=float))
        W = W / np.linalg.norm(W, axis=1)[:, None]
    if W.shape[0] == 0:
        raise ValueError("empty direction set")
    if W.shape[1] != n:
        raise ValueError(f"directions live in R^{W.shape[1]}, grid in R^{n}")
    return np.ascontiguousarray(W, dtype=np.float64)


def _radii(radii, f: GridFunction) -> np.ndarray:
    if radii is None:
        radii = RadiusSet.dyadic(f)
    elif not isinstance(radii, RadiusSet):
        radii = RadiusSet(tuple(radii))
    return radii.half_counts(f.spacing)


# ---------------------------------------------------------------------------
# naive reference


@numba.njit(cache=True)
def _naive(a, shape, W, Ms):  # pragma: no cover - compiled
    n = shape.shape[0]
    size = a.shape[0]
    strides = np.empty(n, np.int64)
    s = 1
    for d in range(n - 1, -1, -1):
        strides[d] = s
        s *= shape[d]
    ncorner = 1 << n
    Mmax = Ms[Ms.shape[0] - 1]
    out = np.zeros(size)
    idx = np.empty(n, np.int64)
    for p in range(size):
        rem = p
        for d in range(n):
            idx[d] = rem // strides[d]
            rem -= idx[d] * strides[d]
        best = 0.0
        for q in range(W.shape[0]):
            S = 0.0
            r = 0
            for k in range(Mmax + 1):
                for side in range(2):
                    if k == 0 and side == 1:
                        continue
                    m = -k if side == 0 else k
                    v = 0.0
                    for c in range(ncorner):
                        w = 1.0
                        flat = 0
                        inside = True
                        for d in range(n):
                            t = -(m * W[q, d])
                            fl = math.floor(t)
                            fr = t - fl
                            bit = (c >> (n - 1 - d)) & 1
                            if bit == 1:
                                w *= fr
                            else:
                                w *= 1.0 - fr
                            j = idx[d] + np.int64(fl) + bit
                            if j < 0 or j >= shape[d]:
                                inside = False
                            else:
                                flat += j * strides[d]
                        if inside:
                            v += w * a[flat]
                        else:
                            v += w * 0.0
                    S += v
                if r < Ms.shape[0] and Ms[r] == k:
                    avg = S / (2 * k + 1)
                    if avg > best:
                        best = avg
                    r += 1
        out[p] = best
    return out


def brute_oracle(f: GridFunction, omega, radii=None, *, jit: bool = True) -> GridFunction:
    """Reference directional maximal function by the plain triple loop.

    ``jit=False`` runs the identical loop as interpreted Python.

    Raises
    ------
    ValueError
        If the grid has more than ``ORACLE_LIMIT`` cells or ``omega`` is empty.
    """
    if f.data.size > ORACLE_LIMIT:
        raise ValueError(f"brute oracle limited to {ORACLE_LIMIT} cells")
    W = _directions(omega, f.n)
    Ms = _radii(radii, f)
    a = np.abs(f.data).ravel()
    shape = np.array(f.dims, dtype=np.int64)
    run = _naive if jit else _naive.py_func
    return f.like(run(a, shape, W, Ms).reshape(f.dims))


# ---------------------------------------------------------------------------
# fast path


@numba.njit(cache=True)
def _tables(w, Mmax, pstrides):  # pragma: no cover - compiled
    """Per-sample tables for m = -Mmax..Mmax: floor offsets, corner weights,
    their left-to-right sum and the flat offset of the base cell."""
    n = w.shape[0]
    nc = 1 << n
    fl = np.empty((2 * Mmax + 1, n), np.int64)
    wt = np.empty((2 * Mmax + 1, nc))
    wsum = np.empty(2 * Mmax + 1)
    flat = np.zeros(2 * Mmax + 1, np.int64)
    for mi in range(2 * Mmax + 1):
        m = mi - Mmax
        for c in range(nc):
            wt[mi, c] = 1.0
        for d in range(n):
            t = -(m * w[d])
            f0 = math.floor(t)
            fr = t - f0
            fl[mi, d] = np.int64(f0)
            flat[mi] += np.int64(f0) * pstrides[d]
            for c in range(nc):
                if (c >> (n - 1 - d)) & 1:
                    wt[mi, c] *= fr
                else:
                    wt[mi, c] *= 1.0 - fr
        acc = 0.0
        for c in range(nc):
            acc += wt[mi, c]
        wsum[mi] = acc
    return fl, wt, wsum, flat


@numba.njit(cache=True, parallel=True)
def _fast(ap, pshape, W, Ms, dist, ones, lo, hi):  # pragma: no cover - compiled
    # ap is |f| padded by one zero cell on every side; lo/hi bound the
    # support in padded indices; dist/ones are Chebyshev distances to the
    # nearest nonzero cell and to the nearest cell that is not exactly 1.
    n = pshape.shape[0]
    nc = 1 << n
    pstrides = np.empty(n, np.int64)
    s = 1
    for d in range(n - 1, -1, -1):
        pstrides[d] = s
        s *= pshape[d]
    coff = np.zeros(nc, np.int64)
    for c in range(nc):
        for d in range(n):
            if (c >> (n - 1 - d)) & 1:
                coff[c] += pstrides[d]
    shape = pshape - 2
    size = 1
    for d in range(n):
        size *= shape[d]
    ostrides = np.empty(n, np.int64)
    s = 1
    for d in range(n - 1, -1, -1):
        ostrides[d] = s
        s *= shape[d]
    Mmax = Ms[Ms.shape[0] - 1]
    nr = Ms.shape[0]
    big = Mmax + 1
    tabs = []
    for q in range(W.shape[0]):
        tabs.append(_tables(W[q], Mmax, pstrides))
    out = np.zeros(size)
    for p in numba.prange(size):
        idx = np.empty(n, np.int64)
        pflat = 0
        for d in range(n):
            idx[d] = (p // ostrides[d]) % shape[d] + 1
            pflat += idx[d] * pstrides[d]
        best = 0.0
        for q in range(W.shape[0]):
            fl, wt, wsum, fflat = tabs[q]
            S = 0.0
            nxt = np.empty(2, np.int64)
            nxt[0] = 1
            nxt[1] = 1
            r = 0
            k = 0
            while r < nr:
                for side in range(2):
                    if k == 0:
                        if side == 1:
                            continue
                        mi = Mmax
                    elif nxt[side] != k:
                        continue
                    elif side == 0:
                        mi = Mmax - k
                    else:
                        mi = Mmax + k
                    gap = 0
                    for d in range(n):
                        b = idx[d] + fl[mi, d]
                        if b < lo[d] - 1:
                            g = lo[d] - 1 - b
                        elif b > hi[d]:
                            g = b - hi[d]
                        else:
                            g = 0
                        if g > gap:
                            gap = g
                    skip = 0
                    if gap > 0:
                        skip = gap - 1
                    else:
                        base = pflat + fflat[mi]
                        dd = dist[base]
                        if dd >= 2:
                            skip = dd - 2
                        elif ones[base] >= 2:
                            S += wsum[mi]
                        else:
                            v = 0.0
                            for c in range(nc):
                                v += wt[mi, c] * ap[base + coff[c]]
                            S += v
                    if k > 0:
                        nxt[side] = min(k + 1 + skip, big)
                if Ms[r] == k:
                    avg = S / (2 * k + 1)
                    if avg > best:
                        best = avg
                    r += 1
                k = min(nxt[0], nxt[1], Ms[r] if r < nr else big)
        out[p] = best
    return out


def _support_maps(a: np.ndarray):
    """Zero-padded array, support box and Chebyshev distance maps."""
    ap = np.pad(a, 1)
    nz = ap != 0
    if not nz.any():
        return None
    where = np.nonzero(nz)
    lo = np.array([w.min() for w in where], dtype=np.int64)
    hi = np.array([w.max() for w in where], dtype=np.int64)
    dist = ndimage.distance_transform_cdt(~nz, metric="chessboard").astype(np.int64)
    not_one = ap != 1.0
    ones = ndimage.distance_transform_cdt(~not_one, metric="chessboard").astype(np.int64)
    return ap, dist.ravel(), ones.ravel(), lo, hi


def directional_maximal(f: GridFunction, omega, radii=None) -> GridFunction:
    """Discrete ``M_Omega f``: sup over directions and radii of line averages.

    Parameters
    ----------
    f : GridFunction
    omega : DirectionSet or (k, n) array of directions
    radii : RadiusSet or sequence of radii, optional
        Defaults to `RadiusSet.dyadic`.

    Returns
    -------
    GridFunction
        Same grid as ``f``; bit-identical to `brute_oracle`.

    Notes
    -----
    Samples whose interpolation corners are all zero add ``+0.0`` and are
    skipped in runs, using the distance to the support.  Samples whose
    corners all equal 1 contribute the precomputed left-to-right sum of the
    corner weights, which is the same number the plain loop produces.
    """
    W = _directions(omega, f.n)
    Ms = _radii(radii, f)
    maps = _support_maps(np.abs(f.data))
    if maps is None:
        return f.like(np.zeros(f.dims))
    ap, dist, ones, lo, hi = maps
    pshape = np.array(ap.shape, dtype=np.int64)
    out = _fast(ap.ravel(), pshape, W, Ms, dist, ones, lo, hi)
    return f.like(out.reshape(f.dims))


def line_average(f: GridFunction, index, w, r: float) -> float:
    """Average of ``|f|`` over the sampled segment through grid point ``index``."""
    W = _directions([w], f.n)
    M = RadiusSet((r,)).half_counts(f.spacing)
    sub = _naive(np.abs(f.data).ravel(), np.array(f.dims, dtype=np.int64), W, M)
    return float(sub.reshape(f.dims)[tuple(index)])


# ---------------------------------------------------------------------------
# axis-parallel operators


def hl_1d(f: GridFunction, axis: int = 0, radii=None) -> GridFunction:
    """Centered one-dimensional maximal function along ``axis``.

    Uses the same samples, accumulation order and radii as
    `directional_maximal` with the single direction ``e_axis``, so the two
    agree exactly.
    """
    if not 0 <= axis < f.n:
        raise ValueError("axis out of range")
    Ms = _radii(radii, f)
    a = np.moveaxis(np.abs(f.data), axis, 0)
    L = a.shape[0]
    pad = int(Ms[-1])
    z = np.zeros((pad,) + a.shape[1:])
    ap = np.concatenate([z, a, z], axis=0)
    S = 0.0 + ap[pad : pad + L]
    best = np.zeros_like(a)
    r = 0
    for k in range(1, pad + 1):
        S = S + ap[pad + k : pad + k + L]
        S = S + ap[pad - k : pad - k + L]
        if Ms[r] == k:
            best = np.maximum(best, S / (2 * k + 1))
            r += 1
    return f.like(np.moveaxis(best, 0, axis))


def strong_maximal(f: GridFunction, radii=None) -> GridFunction:
    """Iterated one-dimensional maximal functions over axes ``0..n-1``.

    This iterate dominates the strong maximal function.
    """
    g = f
    for axis in range(f.n):
        g = hl_1d(g, axis, radii)
    return g


def _tube_mask(w: np.ndarray, length: float, width: float, h: float) -> np.ndarray:
    half = 0.5 * length + 0.5 * width
    R = int(math.ceil(half / h))
    ax = np.arange(-R, R + 1) * h
    Y = np.stack(np.meshgrid(*([ax] * len(w)), indexing="ij"), axis=-1)
    along = Y @ w
    perp = np.linalg.norm(Y - along[..., None] * w, axis=-1)
    tol = 1e-9 * h
    return (np.abs(along) <= 0.5 * length + tol) & (perp <= 0.5 * width + tol)


def tube_maximal(f: GridFunction, omega, lengths, widths) -> GridFunction:
    """Discrete tube maximal function.

    For every direction, length and width, the tube is the set of grid
    offsets within ``length/2`` along the axis and ``width/2`` across it.
    Tube averages of ``|f|`` are taken at every grid centre (zero extension)
    and each point receives the largest average of a tube containing it.
    """
    W = _directions(omega, f.n)
    a = np.abs(f.data)
    best = np.zeros_like(a)
    for w in W:
        for L in np.atleast_1d(lengths):
            for wd in np.atleast_1d(widths):
                mask = _tube_mask(w, float(L), float(wd), f.spacing)
                avg = ndimage.correlate(a, mask.astype(float), mode="constant", cval=0.0) / mask.sum()
                cover = ndimage.maximum_filter(avg, footprint=np.flip(mask), mode="constant", cval=0.0)
                best = np.maximum(best, cover)
    return f.like(best)


def norm_ratio(f: GridFunction, result: GridFunction, p: float) -> float:
    """``||result||_p / ||f||_p`` on the grid (a lower bound for the
    operator norm when ``result`` is the operator applied to ``f``)."""
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    den = f.lp_norm(p)
    if den == 0:
        raise ValueError("input has zero norm")
    return result.lp_norm(p) / den
