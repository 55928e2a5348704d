"""Shape rasterisation on pixel grids.

A pixel ``(x, y)`` belongs to a shape when its centre ``(x + 0.5, y + 0.5)``
lies inside it. Polygon edges use the half-open rule ``y0 <= yc < y1`` so a
vertex shared by two edges is counted once; spans are half-open in x too, so
a centre exactly on a left edge is inside and one on a right edge is not.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

Ring = Sequence[tuple[float, float]]


def _edges(rings: Iterable[Ring]) -> np.ndarray:
    parts = []
    for ring in rings:
        pts = np.asarray(ring, dtype=np.float64).reshape(-1, 2)
        if len(pts) < 2:
            continue
        nxt = np.roll(pts, -1, axis=0)
        parts.append(np.hstack([pts, nxt]))
    if not parts:
        return np.empty((0, 4))
    e = np.vstack(parts)
    return e[e[:, 1] != e[:, 3]]  # horizontal edges never cross a scanline


def fill_polygons(rings: Iterable[Ring], height: int, width: int,
                  origin: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Even-odd scanline fill of all ``rings`` taken together.

    ``origin`` is subtracted from the ring coordinates, which lets callers
    rasterise a window of a larger image. Returns a boolean ``(height, width)``
    array.
    """
    e = _edges(rings)
    out = np.zeros((height, width), dtype=bool)
    if len(e) == 0:
        return out
    ox, oy = origin
    x0, y0, x1, y1 = e[:, 0] - ox, e[:, 1] - oy, e[:, 2] - ox, e[:, 3] - oy
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    # rows whose centre yc satisfies ylo <= yc < yhi
    r_first = np.maximum(np.ceil(ylo - 0.5), 0).astype(np.int64)
    r_last = np.minimum(np.ceil(yhi - 0.5) - 1, height - 1).astype(np.int64)
    counts = np.maximum(r_last - r_first + 1, 0)
    total = int(counts.sum())
    if total == 0:
        return out
    edge_id = np.repeat(np.arange(len(e)), counts)
    starts = np.cumsum(counts) - counts
    rows = r_first[edge_id] + (np.arange(total) - starts[edge_id])
    yc = rows + 0.5
    xs = x0[edge_id] + (yc - y0[edge_id]) * (x1[edge_id] - x0[edge_id]) / (y1[edge_id] - y0[edge_id])

    order = np.lexsort((xs, rows))
    rows, xs = rows[order], xs[order]
    # closed rings give an even number of crossings per scanline
    ra, xa, xb = rows[0::2], xs[0::2], xs[1::2]
    c0 = np.clip(np.ceil(xa - 0.5), 0, width).astype(np.int64)
    c1 = np.clip(np.ceil(xb - 0.5), 0, width).astype(np.int64)
    keep = c1 > c0
    diff = np.zeros((height, width + 1), dtype=np.int32)
    np.add.at(diff, (ra[keep], c0[keep]), 1)
    np.add.at(diff, (ra[keep], c1[keep]), -1)
    return np.cumsum(diff[:, :width], axis=1) > 0


def fill_ellipse(bbox: tuple[float, float, float, float], height: int, width: int) -> np.ndarray:
    """Ellipse inscribed in ``bbox = (x0, y0, x1, y1)``."""
    x0, y0, x1, y1 = bbox
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    ax, ay = abs(x1 - x0) / 2.0, abs(y1 - y0) / 2.0
    if ax == 0 or ay == 0:
        return np.zeros((height, width), dtype=bool)
    ys = (np.arange(height) + 0.5 - cy)[:, None] / ay
    xs = (np.arange(width) + 0.5 - cx)[None, :] / ax
    return xs * xs + ys * ys <= 1.0


def fill_rounded_rect(bbox: tuple[float, float, float, float], radius: float,
                      height: int, width: int) -> np.ndarray:
    """Axis-aligned rectangle ``bbox`` with circular corners of ``radius``."""
    x0, y0, x1, y1 = bbox
    x0, x1 = min(x0, x1), max(x0, x1)
    y0, y1 = min(y0, y1), max(y0, y1)
    r = max(0.0, min(radius, (x1 - x0) / 2.0, (y1 - y0) / 2.0))
    xc = np.arange(width) + 0.5
    yc = np.arange(height) + 0.5
    inside = ((yc >= y0) & (yc < y1))[:, None] & ((xc >= x0) & (xc < x1))[None, :]
    if r == 0:
        return inside
    # distance from the inner rectangle; corners are the only places it is diagonal
    dx = np.maximum(np.maximum(x0 + r - xc, xc - (x1 - r)), 0.0)[None, :]
    dy = np.maximum(np.maximum(y0 + r - yc, yc - (y1 - r)), 0.0)[:, None]
    return inside & (dx * dx + dy * dy <= r * r)


def polygon_area(ring: Ring) -> float:
    pts = np.asarray(ring, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
