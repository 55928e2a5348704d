"""SLIC superpixels (localised k-means in CIELAB + xy)."""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy import ndimage

N_ITER = 10
_FOUR_CONN = ndimage.generate_binary_structure(2, 1)

# sRGB (D65) -> XYZ
_RGB2XYZ = np.array([[0.412453, 0.357580, 0.180423],
                     [0.212671, 0.715160, 0.072169],
                     [0.019334, 0.119193, 0.950227]])
_WHITE = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    c = img.astype(np.float64) / 255.0
    lin = np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)
    xyz = lin @ _RGB2XYZ.T / _WHITE
    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def _grid_centers(h: int, w: int, k: int):
    step = math.sqrt(h * w / k)
    ny = max(1, round(h / step))
    nx = max(1, round(w / step))
    cy = (np.arange(ny) + 0.5) * h / ny
    cx = (np.arange(nx) + 0.5) * w / nx
    yy, xx = np.meshgrid(cy, cx, indexing="ij")
    return yy.ravel(), xx.ravel(), step


def enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Keep the largest 4-connected piece of each label; merge the rest.

    Orphaned fragments (grouped into 4-connected blobs) are absorbed by the
    adjacent label with the most pixels. Labels are renumbered ``0..n-1``.
    """
    out = labels.copy()
    for lab in np.unique(labels):
        comp, n = ndimage.label(labels == lab, structure=_FOUR_CONN)
        if n > 1:
            sizes = np.bincount(comp.ravel())[1:]
            keep = int(np.argmax(sizes)) + 1
            out[(comp > 0) & (comp != keep)] = -1

    blobs, n_blobs = ndimage.label(out < 0, structure=_FOUR_CONN)
    if n_blobs:
        sizes = np.bincount(out[out >= 0].ravel())
        h, w = out.shape
        for blob, sl in enumerate(ndimage.find_objects(blobs), start=1):
            ys = slice(max(sl[0].start - 1, 0), min(sl[0].stop + 1, h))
            xs = slice(max(sl[1].start - 1, 0), min(sl[1].stop + 1, w))
            region = blobs[ys, xs] == blob
            sub = out[ys, xs]
            # blobs are maximal, so every pixel around one is a kept pixel
            ring = ndimage.binary_dilation(region, structure=_FOUR_CONN) & ~region
            cands = np.unique(sub[ring])
            sub[region] = cands[np.argmax(sizes[cands])]

    _, inverse = np.unique(out, return_inverse=True)
    return inverse.reshape(out.shape).astype(np.int32)


def slic_segment(patch: np.ndarray, k: int, compactness: float = 10.0,
                 n_iter: int = N_ITER) -> np.ndarray:
    """Segment an RGB patch into about ``k`` superpixels.

    Returns an int32 label field; every label is a non-empty 4-connected set.
    """
    if not 1 <= k <= 1024:
        raise ValueError(f"superpixel count must be in [1, 1024], got {k}")
    h, w = patch.shape[:2]
    if k == 1:
        return np.zeros((h, w), dtype=np.int32)
    lab = rgb_to_lab(patch)
    cy, cx, step = _grid_centers(h, w, k)
    n_c = len(cy)
    iy = np.clip(cy.astype(int), 0, h - 1)
    ix = np.clip(cx.astype(int), 0, w - 1)
    c_lab = lab[iy, ix].copy()
    c_y, c_x = cy.copy(), cx.copy()

    labels = _kmeans(lab, c_lab, c_y, c_x, (compactness / step) ** 2,
                     int(math.ceil(step)), n_iter)
    return enforce_connectivity(labels)


@njit(cache=True)
def _kmeans(lab, c_lab, c_y, c_x, spatial, win, n_iter):
    h, w = lab.shape[0], lab.shape[1]
    n_c = c_y.shape[0]
    labels = np.full((h, w), -1, dtype=np.int32)
    best = np.empty((h, w))
    for _ in range(n_iter):
        best[:] = np.inf
        labels[:] = -1
        for c in range(n_c):
            cy, cx = c_y[c], c_x[c]
            y0 = max(0, int(cy) - win)
            y1 = min(h, int(cy) + win + 1)
            x0 = max(0, int(cx) - win)
            x1 = min(w, int(cx) + win + 1)
            for y in range(y0, y1):
                dy = y + 0.5 - cy
                for x in range(x0, x1):
                    dx = x + 0.5 - cx
                    d = spatial * (dx * dx + dy * dy)
                    for ch in range(3):
                        t = lab[y, x, ch] - c_lab[c, ch]
                        d += t * t
                    if d < best[y, x]:
                        best[y, x] = d
                        labels[y, x] = c
        # pixels outside every search window go to the globally nearest centre
        for y in range(h):
            for x in range(w):
                if labels[y, x] < 0:
                    for c in range(n_c):
                        dy = y + 0.5 - c_y[c]
                        dx = x + 0.5 - c_x[c]
                        d = spatial * (dx * dx + dy * dy)
                        for ch in range(3):
                            t = lab[y, x, ch] - c_lab[c, ch]
                            d += t * t
                        if d < best[y, x]:
                            best[y, x] = d
                            labels[y, x] = c
        acc = np.zeros((n_c, 6))
        for y in range(h):
            for x in range(w):
                c = labels[y, x]
                acc[c, 0] += 1.0
                acc[c, 1] += y + 0.5
                acc[c, 2] += x + 0.5
                for ch in range(3):
                    acc[c, 3 + ch] += lab[y, x, ch]
        for c in range(n_c):
            if acc[c, 0] > 0:
                c_y[c] = acc[c, 1] / acc[c, 0]
                c_x[c] = acc[c, 2] / acc[c, 0]
                for ch in range(3):
                    c_lab[c, ch] = acc[c, 3 + ch] / acc[c, 0]
    return labels
