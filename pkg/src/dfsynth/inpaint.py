"""Hole filling for removal forgeries.

``fast_marching`` follows Telea's scheme: the hole is swept by a fast
marching front ordered by distance to the known region, and each pixel is
set, when its distance becomes final, to a weighted average of first-order
extrapolations from known pixels within ``radius``. ``diffusion`` computes
the harmonic (membrane) fill of the hole.
"""

from __future__ import annotations

import heapq
from enum import Enum

import numpy as np
from numba import njit
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

KNOWN, BAND, INSIDE = 0, 1, 2
_BIG = 1.0e6


class InpaintMethod(str, Enum):
    FAST_MARCHING = "fast_marching"
    DIFFUSION = "diffusion"


@njit(cache=True)
def _solve(flag, T, i1, j1, i2, j2):
    h, w = T.shape
    ok1 = 0 <= i1 < h and 0 <= j1 < w and flag[i1, j1] == KNOWN
    ok2 = 0 <= i2 < h and 0 <= j2 < w and flag[i2, j2] == KNOWN
    if ok1 and ok2:
        t1, t2 = T[i1, j1], T[i2, j2]
        d = 2.0 - (t1 - t2) * (t1 - t2)
        if d >= 0.0:
            r = np.sqrt(d)
            s = (t1 + t2 - r) / 2.0
            if s >= t1 and s >= t2:
                return s
            s += r
            if s >= t1 and s >= t2:
                return s
        return 1.0 + min(t1, t2)
    if ok1:
        return 1.0 + T[i1, j1]
    if ok2:
        return 1.0 + T[i2, j2]
    return _BIG


@njit(cache=True)
def _arrival(flag, T, i, j):
    return min(min(_solve(flag, T, i - 1, j, i, j - 1), _solve(flag, T, i + 1, j, i, j - 1)),
               min(_solve(flag, T, i - 1, j, i, j + 1), _solve(flag, T, i + 1, j, i, j + 1)))


@njit(cache=True)
def _grad(arr, flag, i, j, axis, limit):
    # central difference over samples with flag <= limit, one-sided at gaps and borders
    h, w = flag.shape
    if axis == 0:
        ia, ja, ib, jb = i + 1, j, i - 1, j
    else:
        ia, ja, ib, jb = i, j + 1, i, j - 1
    fa = 0 <= ia < h and 0 <= ja < w and flag[ia, ja] <= limit
    fb = 0 <= ib < h and 0 <= jb < w and flag[ib, jb] <= limit
    if fa and fb:
        return (arr[ia, ja] - arr[ib, jb]) * 0.5
    if fa:
        return arr[ia, ja] - arr[i, j]
    if fb:
        return arr[i, j] - arr[ib, jb]
    return 0.0


@njit(cache=True)
def _fmm(img, hole, radius):
    h, w = hole.shape
    out = img.copy()
    flag = np.zeros((h, w), dtype=np.int8)
    T = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            if hole[i, j]:
                flag[i, j] = INSIDE
                T[i, j] = _BIG
    heap = [(0.0, 0, 0)]
    heap.pop()
    di = (-1, 1, 0, 0)
    dj = (0, 0, -1, 1)
    for i in range(h):
        for j in range(w):
            if flag[i, j] == INSIDE:
                for n in range(4):
                    a, b = i + di[n], j + dj[n]
                    if 0 <= a < h and 0 <= b < w and flag[a, b] == KNOWN:
                        T[i, j] = _arrival(flag, T, i, j)
                        flag[i, j] = BAND
                        heapq.heappush(heap, (T[i, j], i, j))
                        break
    n_hole = 0
    for i in range(h):
        for j in range(w):
            if hole[i, j]:
                n_hole += 1
    order = np.empty(n_hole)
    filled = 0
    r2 = radius * radius
    nch = img.shape[2]
    acc = np.zeros(nch)
    while len(heap) > 0:
        t, i, j = heapq.heappop(heap)
        if flag[i, j] == KNOWN or t > T[i, j]:
            continue
        flag[i, j] = KNOWN
        order[filled] = t
        filled += 1

        gy = _grad(T, flag, i, j, 0, BAND)
        gx = _grad(T, flag, i, j, 1, BAND)
        gn = np.sqrt(gx * gx + gy * gy)
        if gn > 0:
            gx /= gn
            gy /= gn
        wsum = 0.0
        acc[:] = 0.0
        for a in range(max(0, i - radius), min(h, i + radius + 1)):
            for b in range(max(0, j - radius), min(w, j + radius + 1)):
                if flag[a, b] != KNOWN or (a == i and b == j):
                    continue
                ry, rx = i - a, j - b
                d2 = ry * ry + rx * rx
                if d2 > r2:
                    continue
                dist = np.sqrt(d2)
                direction = abs((ry * gy + rx * gx) / dist)
                if direction < 1e-6:
                    direction = 1e-6
                level = 1.0 / (1.0 + abs(T[a, b] - t))
                weight = direction * level / d2
                wsum += weight
                for c in range(nch):
                    ch = out[:, :, c]
                    extrap = ch[a, b] + _grad(ch, flag, a, b, 0, KNOWN) * ry + _grad(ch, flag, a, b, 1, KNOWN) * rx
                    acc[c] += weight * extrap
        if wsum > 0:
            for c in range(nch):
                v = acc[c] / wsum
                out[i, j, c] = min(255.0, max(0.0, v))

        for n in range(4):
            a, b = i + di[n], j + dj[n]
            if 0 <= a < h and 0 <= b < w and flag[a, b] != KNOWN:
                ta = _arrival(flag, T, a, b)
                if ta < T[a, b]:
                    T[a, b] = ta
                    flag[a, b] = BAND
                    heapq.heappush(heap, (ta, a, b))
    return out, order[:filled]


def _check(p: np.ndarray, mask: np.ndarray) -> np.ndarray:
    hole = np.asarray(mask) > 0
    if hole.shape != p.shape[:2]:
        raise ValueError(f"mask shape {hole.shape} does not match image {p.shape[:2]}")
    if hole.all():
        raise ValueError("cannot inpaint: mask covers the whole image")
    return hole


def fast_marching(p: np.ndarray, mask: np.ndarray, radius: int = 3,
                  return_order: bool = False):
    """Telea inpainting of the pixels where ``mask > 0``.

    With ``return_order`` the distance values of hole pixels in the order they
    were filled are returned as well.
    """
    hole = _check(p, mask)
    if not hole.any():
        return (p.copy(), np.empty(0)) if return_order else p.copy()
    filled, order = _fmm(p.astype(np.float64), hole, int(radius))
    out = p.copy()
    # only hole pixels are taken from the float result, the rest stays bit-exact
    out[hole] = np.floor(filled[hole] + 0.5).astype(np.uint8)
    return (out, order) if return_order else out


def _harmonic(values: np.ndarray, hole: np.ndarray) -> np.ndarray:
    h, w = hole.shape
    idx = -np.ones((h, w), dtype=np.int64)
    ys, xs = np.nonzero(hole)
    n = len(ys)
    idx[ys, xs] = np.arange(n)
    rows, cols, vals = [np.arange(n)], [np.arange(n)], []
    degree = np.zeros(n)
    rhs = np.zeros((n, values.shape[2]))
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ny, nx = ys + dy, xs + dx
        inside = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        degree += inside
        k = np.nonzero(inside)[0]
        nb = idx[ny[k], nx[k]]
        unknown = nb >= 0
        rows.append(k[unknown])
        cols.append(nb[unknown])
        np.add.at(rhs, k[~unknown], values[ny[k[~unknown]], nx[k[~unknown]]])
    vals = [degree] + [-np.ones(len(r)) for r in rows[1:]]
    a = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsc()
    sol = spsolve(a, rhs)
    out = values.copy()
    out[ys, xs] = sol.reshape(n, -1)
    return out


def diffusion(p: np.ndarray, mask: np.ndarray, tol: float = 0.1, max_iter: int = 10_000) -> np.ndarray:
    """Harmonic fill: every hole pixel equals the mean of its 4 neighbours.

    The fixed point is solved directly, then refined by Jacobi averaging
    until no pixel changes by ``tol`` or more.
    """
    hole = _check(p, mask)
    if not hole.any():
        return p.copy()
    vals = _harmonic(p.astype(np.float64), hole)
    h, w = hole.shape
    for _ in range(max_iter):
        padded = np.pad(vals, ((1, 1), (1, 1), (0, 0)), mode="constant")
        cnt = np.pad(np.ones((h, w)), 1, mode="constant")
        nsum = padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
        ncnt = cnt[:-2, 1:-1] + cnt[2:, 1:-1] + cnt[1:-1, :-2] + cnt[1:-1, 2:]
        avg = nsum / ncnt[..., None]
        delta = np.abs(avg[hole] - vals[hole]).max()
        vals[hole] = avg[hole]
        if delta < tol:
            break
    out = p.copy()
    out[hole] = np.clip(np.floor(vals[hole] + 0.5), 0, 255).astype(np.uint8)
    return out


def inpaint(p: np.ndarray, mask: np.ndarray, method: InpaintMethod | str = InpaintMethod.FAST_MARCHING,
            radius: int = 3) -> np.ndarray:
    method = InpaintMethod(method)
    if method is InpaintMethod.FAST_MARCHING:
        return fast_marching(p, mask, radius)
    return diffusion(p, mask)
