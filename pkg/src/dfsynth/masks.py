"""Manipulation-mask synthesis: seven shape families, softening, area constraint."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import imaging, raster
from .imaging import PATCH_SIZE
from .slic import slic_segment

MIN_AREA = 0.05
MAX_AREA = 0.40
MAX_ATTEMPTS = 25
ALPHA_RANGE = (0.94, 1.0)
MASK_BLUR_RADII = (3, 9)
SUPERPIXEL_K = (4, 16)
SUPERPIXEL_COMPACTNESS = 10.0
# smallest polygon area (px^2) not treated as a degenerate draw
MIN_SHAPE_AREA = 1.0


class MaskShapeKind(str, Enum):
    TRIANGLE = "triangle"
    ROUNDED_RECTANGLE = "rounded_rectangle"
    ELLIPSE = "ellipse"
    POLYGON5 = "polygon5"
    ELLIPSE_POLYGON4 = "ellipse_polygon4"
    SUPERPIXEL = "superpixel"
    OBJECT = "object_segmentation"


GEOMETRIC_KINDS = (MaskShapeKind.TRIANGLE, MaskShapeKind.ROUNDED_RECTANGLE, MaskShapeKind.ELLIPSE,
                   MaskShapeKind.POLYGON5, MaskShapeKind.ELLIPSE_POLYGON4)


class MaskRetryError(RuntimeError):
    """No mask satisfying the area constraint was found within the retry budget."""


def nonzero_fraction(mask: np.ndarray) -> float:
    return float(np.count_nonzero(mask)) / mask.size


def area_ok(mask: np.ndarray) -> bool:
    return MIN_AREA <= nonzero_fraction(mask) <= MAX_AREA


# -- geometric shapes -------------------------------------------------------

def _points(rng: np.random.Generator, n: int, size: int = PATCH_SIZE) -> list[tuple[float, float]]:
    return [tuple(p) for p in rng.uniform(0, size, size=(n, 2))]


def _bbox(rng: np.random.Generator, size: int = PATCH_SIZE):
    (xa, ya), (xb, yb) = _points(rng, 2, size)
    return min(xa, xb), min(ya, yb), max(xa, xb), max(ya, yb)


def draw_shape_params(kind: MaskShapeKind, rng: np.random.Generator) -> dict:
    """Random parameters for one of the five geometric shapes."""
    kind = MaskShapeKind(kind)
    if kind is MaskShapeKind.TRIANGLE:
        return {"points": _points(rng, 3)}
    if kind is MaskShapeKind.POLYGON5:
        return {"points": _points(rng, 5)}
    if kind is MaskShapeKind.ELLIPSE:
        return {"bbox": _bbox(rng)}
    if kind is MaskShapeKind.ROUNDED_RECTANGLE:
        bbox = _bbox(rng)
        r_max = min(bbox[2] - bbox[0], bbox[3] - bbox[1]) / 2.0
        return {"bbox": bbox, "radius": float(rng.uniform(0.0, r_max))}
    if kind is MaskShapeKind.ELLIPSE_POLYGON4:
        return {"bbox": _bbox(rng), "points": _points(rng, 4)}
    raise ValueError(f"{kind} is not a geometric mask kind")


def rasterize_shape(kind: MaskShapeKind, params: dict, size: int = PATCH_SIZE) -> np.ndarray:
    kind = MaskShapeKind(kind)
    if kind in (MaskShapeKind.TRIANGLE, MaskShapeKind.POLYGON5):
        return raster.fill_polygons([params["points"]], size, size)
    if kind is MaskShapeKind.ELLIPSE:
        return raster.fill_ellipse(params["bbox"], size, size)
    if kind is MaskShapeKind.ROUNDED_RECTANGLE:
        return raster.fill_rounded_rect(params["bbox"], params["radius"], size, size)
    if kind is MaskShapeKind.ELLIPSE_POLYGON4:
        return raster.fill_ellipse(params["bbox"], size, size) | \
            raster.fill_polygons([params["points"]], size, size)
    raise ValueError(f"{kind} is not a geometric mask kind")


def _degenerate(kind: MaskShapeKind, params: dict, mask: np.ndarray) -> bool:
    if not mask.any():
        return True
    if "points" in params and kind is not MaskShapeKind.ELLIPSE_POLYGON4:
        return raster.polygon_area(params["points"]) < MIN_SHAPE_AREA
    return False


def gen_geometric_mask(kind: MaskShapeKind, rng: np.random.Generator,
                       draw: Callable[[MaskShapeKind, np.random.Generator], dict] = draw_shape_params
                       ) -> np.ndarray:
    """Binary (0/1 float) mask of a random geometric shape.

    Degenerate draws (empty raster, collinear vertices) are redrawn.
    """
    kind = MaskShapeKind(kind)
    while True:
        params = draw(kind, rng)
        mask = rasterize_shape(kind, params)
        if not _degenerate(kind, params, mask):
            return mask.astype(np.float64)


# -- superpixels ------------------------------------------------------------

def pick_superpixel_mask(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = int(labels.max()) + 1
    return (labels == int(rng.integers(n))).astype(np.float64)


# -- softening and the area constraint --------------------------------------

def soften_mask(mask: np.ndarray, do_blur: bool, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Optionally feather ``mask`` with a Gaussian of random radius, then scale by ``alpha``."""
    if not ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]:
        raise ValueError(f"alpha must be in {list(ALPHA_RANGE)}, got {alpha}")
    out = mask.astype(np.float64)
    if do_blur:
        radius = int(rng.integers(MASK_BLUR_RADII[0], MASK_BLUR_RADII[1] + 1))
        out = imaging.blur_mask(out, radius)
    return np.clip(out * alpha, 0.0, 1.0)


@dataclass
class MaskResult:
    values: np.ndarray     # final softened mask in [0, 1]
    binary: np.ndarray     # the hard shape before softening (bool)
    blurred: bool
    alpha: float
    attempts: int


def gen_constrained_mask(generate: Callable[[np.random.Generator], np.ndarray],
                         rng: np.random.Generator, *, blur_prob: float = 0.5,
                         alpha_range: tuple[float, float] = ALPHA_RANGE,
                         max_attempts: int = MAX_ATTEMPTS,
                         accept: Callable[[np.ndarray], bool] | None = None) -> MaskResult:
    """Draw and soften masks until the softened support covers 5-40% of the patch.

    ``generate`` returns a hard mask for one draw; ``accept`` is an optional
    extra test on the softened mask. Raises ``MaskRetryError`` once
    ``max_attempts`` draws have failed.
    """
    for attempt in range(1, max_attempts + 1):
        hard = np.asarray(generate(rng)) > 0
        do_blur = bool(rng.random() < blur_prob)
        alpha = float(rng.uniform(*alpha_range)) if alpha_range[0] < alpha_range[1] else float(alpha_range[0])
        soft = soften_mask(hard, do_blur, alpha, rng)
        if area_ok(soft) and (accept is None or accept(soft)):
            return MaskResult(soft, hard, do_blur, alpha, attempt)
    raise MaskRetryError(f"no mask within [{MIN_AREA}, {MAX_AREA}] after {max_attempts} attempts")


def shape_generator(kind: MaskShapeKind, donor_patch: np.ndarray | None = None,
                    object_masks: list[np.ndarray] | None = None
                    ) -> Callable[[np.random.Generator], np.ndarray]:
    """Build the per-draw generator for ``kind`` from the donor context.

    Superpixel draws segment ``donor_patch`` with a random superpixel count
    (segmentations are cached per count). Object draws pick one category mask
    from ``object_masks`` uniformly.
    """
    kind = MaskShapeKind(kind)
    if kind in GEOMETRIC_KINDS:
        return lambda rng: gen_geometric_mask(kind, rng)
    if kind is MaskShapeKind.SUPERPIXEL:
        if donor_patch is None:
            raise ValueError("superpixel masks need a donor patch")
        cache: dict[int, np.ndarray] = {}

        def superpixel(rng):
            k = int(rng.integers(SUPERPIXEL_K[0], SUPERPIXEL_K[1] + 1))
            if k not in cache:
                cache[k] = slic_segment(donor_patch, k, SUPERPIXEL_COMPACTNESS)
            return pick_superpixel_mask(cache[k], rng)
        return superpixel
    if not object_masks:
        raise ValueError("object masks need at least one category mask")
    return lambda rng: object_masks[int(rng.integers(len(object_masks)))]
