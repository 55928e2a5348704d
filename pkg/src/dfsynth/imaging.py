"""Pixel-level primitives shared by every stage of the generator.

All functions take and return numpy arrays: RGB rasters are ``(H, W, 3)``
``uint8``; masks are ``(H, W)`` ``float64`` in ``[0, 1]``. Nothing here
mutates its input. Integer outputs are produced by a single rounding step
(half away from zero) followed by clamping to ``[0, 255]``.
"""

from __future__ import annotations

import io
import math
from enum import Enum

import numpy as np
from PIL import Image

PATCH_SIZE = 256


class BlurKind(str, Enum):
    BOX = "B"
    GAUSSIAN = "G"


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half away from zero, then clamp to the 8-bit range."""
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


# -- geometry ---------------------------------------------------------------

def _axis_sampling(n_out: int, n_in: int):
    # half-pixel centre alignment
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    return i0, i1, frac


def resize_bilinear(img: np.ndarray, w: int, h: int) -> np.ndarray:
    """Bilinear resize to exactly ``(w, h)`` pixels."""
    if w < 1 or h < 1:
        raise ValueError(f"target size must be positive, got {w}x{h}")
    in_h, in_w = img.shape[:2]
    if (in_w, in_h) == (w, h):
        return img.copy()
    y0, y1, fy = _axis_sampling(h, in_h)
    x0, x1, fx = _axis_sampling(w, in_w)
    src = img.astype(np.float64)
    extra = (1,) * (img.ndim - 2)
    fy = fy.reshape((-1, 1) + extra)
    fx = fx.reshape((1, -1) + extra)
    top = src[y0]
    bottom = src[y1]
    rows = top + (bottom - top) * fy
    out = rows[:, x0] + (rows[:, x1] - rows[:, x0]) * fx
    if img.dtype == np.uint8:
        return to_uint8(out)
    return out.astype(img.dtype)


def crop(img: np.ndarray, x: int, y: int, size: int = PATCH_SIZE) -> np.ndarray:
    """Cut the ``size x size`` window whose top-left corner is ``(x, y)``."""
    h, w = img.shape[:2]
    if not (0 <= x <= w - size and 0 <= y <= h - size):
        raise ValueError(f"window ({x},{y})+{size} outside image of size {w}x{h}")
    return img[y:y + size, x:x + size].copy()


def orient(p: np.ndarray, flip_h: bool, quarter_turns: int) -> np.ndarray:
    """Horizontal flip (optional), then ``quarter_turns`` counter-clockwise 90 degree turns."""
    if quarter_turns not in (0, 1, 2, 3):
        raise ValueError(f"quarter_turns must be in 0..3, got {quarter_turns}")
    out = p[:, ::-1] if flip_h else p
    return np.ascontiguousarray(np.rot90(out, quarter_turns))


# -- filtering --------------------------------------------------------------

def _pad_edge(arr: np.ndarray, half: int, axis: int) -> np.ndarray:
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (half, half)
    return np.pad(arr, pad, mode="edge")


def correlate1d(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """1-D correlation along ``axis`` with clamp-to-edge borders (float output)."""
    half = len(kernel) // 2
    padded = np.moveaxis(_pad_edge(arr.astype(np.float64, copy=False), half, axis), axis, 0)
    n = arr.shape[axis]
    out = np.zeros((n,) + padded.shape[1:], dtype=np.float64)
    for k, weight in enumerate(kernel):
        if weight != 0.0:
            out += weight * padded[k:k + n]
    return np.moveaxis(out, 0, axis)


def separable_filter(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return correlate1d(correlate1d(arr, kernel, 0), kernel, 1)


def gaussian_kernel(radius: float) -> np.ndarray:
    """Normalised Gaussian taps for a blur ``radius`` (sigma = radius/2, cut at 3 sigma)."""
    sigma = radius / 2.0
    half = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def box_kernel(radius: int) -> np.ndarray:
    return np.full(2 * radius + 1, 1.0 / (2 * radius + 1))


def blur(p: np.ndarray, kind: BlurKind | str, radius: int) -> np.ndarray:
    if not 1 <= radius <= 7:
        raise ValueError(f"blur radius must be in [1, 7], got {radius}")
    kind = BlurKind(kind)
    kernel = box_kernel(radius) if kind is BlurKind.BOX else gaussian_kernel(radius)
    return to_uint8(separable_filter(p, kernel))


def blur_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Gaussian feathering of a float mask; exact zeros stay zero outside the kernel reach."""
    out = separable_filter(mask, gaussian_kernel(radius))
    return np.clip(out, 0.0, 1.0)


def convolve3x3(p: np.ndarray, kernel, scale: float = 1.0, offset: float = 0.0) -> np.ndarray:
    """3x3 weighted sum (row-major kernel), divided by ``scale``, plus ``offset``."""
    if scale == 0:
        raise ValueError("scale must be non-zero")
    k = np.asarray(kernel, dtype=np.float64).reshape(3, 3)
    src = p.astype(np.float64)
    pad = [(1, 1), (1, 1)] + [(0, 0)] * (p.ndim - 2)
    padded = np.pad(src, pad, mode="edge")
    h, w = p.shape[:2]
    acc = np.zeros_like(src)
    for dy in range(3):
        for dx in range(3):
            if k[dy, dx] != 0.0:
                acc += k[dy, dx] * padded[dy:dy + h, dx:dx + w]
    return to_uint8(acc / scale + offset)


# -- photometric ------------------------------------------------------------

def add_gaussian_noise(p: np.ndarray, mu: float, sigma: float,
                       rng: np.random.Generator) -> np.ndarray:
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    noise = rng.normal(mu, sigma, size=p.shape) if sigma > 0 else np.full(p.shape, float(mu))
    return to_uint8(p.astype(np.float64) + noise)


def adjust_brightness(p: np.ndarray, factor: float) -> np.ndarray:
    if factor <= 0:
        raise ValueError(f"brightness factor must be positive, got {factor}")
    return to_uint8(p.astype(np.float64) * factor)


def jpeg_roundtrip(p: np.ndarray, quality: int) -> np.ndarray:
    """Baseline JPEG encode at ``quality`` and decode again."""
    if not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be in [1, 100], got {quality}")
    buf = io.BytesIO()
    Image.fromarray(p).save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    with Image.open(buf) as im:
        return np.asarray(im.convert("RGB")).copy()


# -- contrast family --------------------------------------------------------

EDGE_ENHANCE = ((-1, -1, -1, -1, 10, -1, -1, -1, -1), 2)
EDGE_ENHANCE_MORE = ((-1, -1, -1, -1, 9, -1, -1, -1, -1), 1)
SHARPEN = ((-2, -2, -2, -2, 32, -2, -2, -2, -2), 16)

UNSHARP_RADIUS = 2
UNSHARP_AMOUNT = 1.5
UNSHARP_THRESHOLD = 3
CONTRAST_FACTOR = 1.3


def unsharp_mask(p: np.ndarray, radius: int = UNSHARP_RADIUS,
                 amount: float = UNSHARP_AMOUNT, threshold: int = UNSHARP_THRESHOLD) -> np.ndarray:
    src = p.astype(np.float64)
    detail = src - separable_filter(src, gaussian_kernel(radius))
    # below-threshold differences are left untouched, as in the usual USM definition
    detail[np.abs(detail) < threshold] = 0.0
    return to_uint8(src + amount * detail)


def enhance_contrast(p: np.ndarray, factor: float = CONTRAST_FACTOR) -> np.ndarray:
    """Linear contrast stretch about the rounded mean luma of the patch."""
    src = p.astype(np.float64)
    luma = src[..., 0] * 0.299 + src[..., 1] * 0.587 + src[..., 2] * 0.114
    mean = math.floor(luma.mean() + 0.5)
    return to_uint8(mean + factor * (src - mean))


CONTRAST_FILTERS = ("EDGE_ENHANCE", "EDGE_ENHANCE_MORE", "SHARPEN", "UnsharpMask", "Contrast")


def apply_contrast(p: np.ndarray, contrast_id: int) -> np.ndarray:
    """Apply contrast filter ``contrast_id`` (1..5, in ``CONTRAST_FILTERS`` order); 0 is a no-op."""
    if contrast_id == 0:
        return p.copy()
    if contrast_id == 1:
        return convolve3x3(p, *EDGE_ENHANCE)
    if contrast_id == 2:
        return convolve3x3(p, *EDGE_ENHANCE_MORE)
    if contrast_id == 3:
        return convolve3x3(p, *SHARPEN)
    if contrast_id == 4:
        return unsharp_mask(p)
    if contrast_id == 5:
        return enhance_contrast(p)
    raise ValueError(f"contrast id must be in 0..5, got {contrast_id}")


# -- file I/O ---------------------------------------------------------------

def load_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB")).copy()


def save_rgb(path, img: np.ndarray, fmt: str = "jpg", quality: int = 95) -> None:
    if fmt == "jpg":
        Image.fromarray(img).save(path, format="JPEG", quality=quality)
    elif fmt == "png":
        Image.fromarray(img).save(path, format="PNG")
    else:
        raise ValueError(f"unsupported image format {fmt!r}")


def save_mask_png(path, gt: np.ndarray) -> None:
    """Write a binary mask as 8-bit grayscale with values 0 and 255."""
    Image.fromarray(np.where(gt > 0, 255, 0).astype(np.uint8)).save(path, format="PNG")
