"""Forged-sample assembly: pristine scaling, patch placement, blending, ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import coco, imaging, masks
from .donor import (DonorRecipe, ManipType, apply_recipe_filters, apply_recipe_geometric,
                    resampled_size, sample_recipe)
from .imaging import PATCH_SIZE
from .inpaint import InpaintMethod, inpaint
from .masks import MaskRetryError, MaskShapeKind
from .rng import DeterministicRng

DOWNSCALE_PROB = 0.5
MIN_SHIFT = 16
MAX_KIND_DRAWS = 4
INPAINT_RADIUS = 3


class ForgeError(RuntimeError):
    """A sample could not be produced from this random stream."""


class CopyMoveInfeasible(ForgeError):
    """The mask is too large to be moved by at least the minimum displacement."""


# -- pristine scaling -------------------------------------------------------

def _round_ratio(num: int, den: int) -> int:
    """``num / den`` rounded to the nearest integer, ties to even (exact integer arithmetic)."""
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q % 2):
        q += 1
    return q


def scaled_size(w: int, h: int, apply_downscale: bool) -> tuple[int, int]:
    w, h = max(w, PATCH_SIZE), max(h, PATCH_SIZE)
    if apply_downscale:
        m = min(w, h)
        w, h = max(_round_ratio(PATCH_SIZE * w, m), PATCH_SIZE), max(_round_ratio(PATCH_SIZE * h, m), PATCH_SIZE)
    return w, h


def scale_pristine(img: np.ndarray, apply_downscale: bool) -> np.ndarray:
    """Enlarge to at least the patch size, then optionally shrink the short side to it."""
    h, w = img.shape[:2]
    nw, nh = scaled_size(w, h, apply_downscale)
    return imaging.resize_bilinear(img, nw, nh)


# -- placement, blending, ground truth --------------------------------------

def select_patch_offsets(pristine_hw: tuple[int, int], donor_hw: tuple[int, int],
                         manip_type: ManipType | str, rng: np.random.Generator):
    """Top-left corners ``(x, y)`` of the pristine and donor patches.

    Enhancement and removal reuse the pristine location; splicing and
    copy-move draw the donor location independently.
    """
    manip_type = ManipType(manip_type)
    for hh, ww in (pristine_hw, donor_hw):
        if hh < PATCH_SIZE or ww < PATCH_SIZE:
            raise ValueError(f"image {ww}x{hh} smaller than the patch size")

    def draw(hw):
        return int(rng.integers(hw[1] - PATCH_SIZE + 1)), int(rng.integers(hw[0] - PATCH_SIZE + 1))

    p_off = draw(pristine_hw)
    if manip_type in (ManipType.ENHANCEMENT, ManipType.REMOVAL):
        return p_off, p_off
    return p_off, draw(donor_hw)


def compose(p: np.ndarray, d: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Per-pixel blend ``(1 - m) * p + m * d``, rounded once."""
    if p.shape != d.shape or p.shape[:2] != m.shape:
        raise ValueError(f"shape mismatch: {p.shape}, {d.shape}, {m.shape}")
    w = m[..., None]
    return imaging.to_uint8((1.0 - w) * p + w * d)


def ground_truth(m: np.ndarray) -> np.ndarray:
    return (m > 0).astype(np.uint8)


def _support_box(m: np.ndarray):
    ys = np.flatnonzero(m.any(axis=1))
    xs = np.flatnonzero(m.any(axis=0))
    if len(ys) == 0:
        return None
    return xs[0], ys[0], xs[-1], ys[-1]


def feasible_shifts(m: np.ndarray, min_shift: int = MIN_SHIFT):
    """All ``(dx, dy)`` keeping the support inside the patch with ``max(|dx|,|dy|) >= min_shift``."""
    box = _support_box(m)
    h, w = m.shape
    if box is None:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    x0, y0, x1, y1 = box
    dx = np.arange(-x0, w - x1)
    dy = np.arange(-y0, h - y1)
    gx, gy = np.meshgrid(dx, dy)
    ok = np.maximum(np.abs(gx), np.abs(gy)) >= min_shift
    return gx[ok], gy[ok]


def translate(arr: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Shift content by ``(dx, dy)``; vacated pixels are zero."""
    out = np.zeros_like(arr)
    h, w = arr.shape[:2]
    src = arr[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
    out[max(0, dy):max(0, dy) + src.shape[0], max(0, dx):max(0, dx) + src.shape[1]] = src
    return out


def copy_move_translate(d: np.ndarray, m: np.ndarray, rng: np.random.Generator):
    """Move the masked donor content to a random new position.

    Returns ``(translated mask, translated donor, (dx, dy))``. Raises
    ``CopyMoveInfeasible`` when no shift keeps the support inside the patch.
    """
    gx, gy = feasible_shifts(m)
    if len(gx) == 0:
        raise CopyMoveInfeasible("mask support too large to move")
    i = int(rng.integers(len(gx)))
    dx, dy = int(gx[i]), int(gy[i])
    return translate(m, dx, dy), translate(d, dx, dy), (dx, dy)


# -- end-to-end sample ------------------------------------------------------

@dataclass
class Provenance:
    pristine_id: int
    donor_id: int
    pristine_downscale: bool
    pristine_offset: tuple[int, int]
    donor_offset: tuple[int, int]
    mask_kind: str
    alpha: float
    mask_blurred: bool
    copy_move_offset: tuple[int, int] | None = None
    inpaint_method: str | None = None
    object_category: int | None = None


@dataclass
class ForgedSample:
    forged: np.ndarray
    gt: np.ndarray
    recipe: DonorRecipe
    seq: int
    provenance: Provenance
    pristine: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)


def _donor_object_masks(index, donor_id, scale, geo_recipe, unrotated_hw, offset):
    """Category masks of the donor image carried through the donor's geometry, cropped."""
    out = []
    for cat in index.object_categories(donor_id):
        full = coco.category_mask(index, donor_id, cat, *unrotated_hw, scale=scale)
        if geo_recipe is not None and (geo_recipe.flip or geo_recipe.rotate):
            full = imaging.orient(full, geo_recipe.flip, geo_recipe.rotate)
        window = imaging.crop(full, *offset)
        if window.any():
            out.append((cat, window))
    return out


def forge_sample(index: coco.AnnotationIndex, manip_type: ManipType | str, seq: int,
                 rng: DeterministicRng,
                 load: Callable[[int], np.ndarray] | None = None) -> ForgedSample:
    """Produce one forged patch with its ground truth from the sample's stream."""
    manip_type = ManipType(manip_type)
    load = load or (lambda sid: index.load(sid).pixels)

    pick = rng.stage("pristine")
    pristine_rec = coco.sample_source(index, pick)
    downscale = bool(rng.stage("downscale").random() < DOWNSCALE_PROB)
    src = load(pristine_rec.source_id)
    i_p = scale_pristine(src, downscale)

    recipe = sample_recipe(manip_type, rng.stage("recipe"))

    if manip_type is ManipType.SPLICING:
        donor_rec = coco.sample_source(index, rng.stage("donor"), exclude=pristine_rec.source_id)
        d_src = load(donor_rec.source_id)
        i_d = scale_pristine(d_src, False)
        base_scale = (i_d.shape[1] / d_src.shape[1], i_d.shape[0] / d_src.shape[0])
    else:
        donor_rec = pristine_rec
        i_d = i_p
        base_scale = (i_p.shape[1] / src.shape[1], i_p.shape[0] / src.shape[0])

    # donor size after resampling but before flip/rotate, where polygons are rasterised
    unrotated_hw = i_d.shape[:2]
    if manip_type in (ManipType.SPLICING, ManipType.COPY_MOVE):
        if recipe.resample:
            bh, bw = i_d.shape[:2]
            rw, rh = resampled_size(bw, bh, recipe.scale_x, recipe.scale_y)
            base_scale = (base_scale[0] * rw / bw, base_scale[1] * rh / bh)
            unrotated_hw = (rh, rw)
        i_d = apply_recipe_geometric(i_d, recipe)

    p_off, d_off = select_patch_offsets(i_p.shape[:2], i_d.shape[:2], manip_type, rng.stage("offsets"))
    p = imaging.crop(i_p, *p_off)
    d = imaging.crop(i_d, *d_off)

    blur_prob = 0.0 if manip_type is ManipType.REMOVAL else 0.5
    alpha_range = masks.ALPHA_RANGE if manip_type is ManipType.SPLICING else (1.0, 1.0)
    accept = (lambda m: len(feasible_shifts(m)[0]) > 0) if manip_type is ManipType.COPY_MOVE else None

    def donor_objects():
        if not index.eligible_for_objects(donor_rec.source_id):
            return []
        geo = recipe if manip_type in (ManipType.SPLICING, ManipType.COPY_MOVE) else None
        return _donor_object_masks(index, donor_rec.source_id, base_scale, geo, unrotated_hw, d_off)

    kinds = list(MaskShapeKind)
    kind_rng = rng.stage("kind")
    mask_rng = rng.stage("mask")
    object_masks = None
    result = None
    for _ in range(MAX_KIND_DRAWS):
        kind = kinds[int(kind_rng.integers(len(kinds)))]
        if kind is MaskShapeKind.OBJECT:
            if object_masks is None:
                object_masks = donor_objects()
            if not object_masks:
                # no labelled object in the donor patch: redraw among the other kinds
                kinds.remove(kind)
                kind = kinds[int(kind_rng.integers(len(kinds)))]
        gen = masks.shape_generator(kind, donor_patch=d,
                                    object_masks=[om for _, om in object_masks] if object_masks else None)
        try:
            result = masks.gen_constrained_mask(gen, mask_rng, blur_prob=blur_prob,
                                                alpha_range=alpha_range, accept=accept)
            break
        except MaskRetryError:
            if len(kinds) > 1:
                kinds.remove(kind)
    if result is None:
        raise ForgeError(f"no admissible mask for sample {seq}")

    m = result.values
    prov = Provenance(pristine_rec.source_id, donor_rec.source_id, downscale, p_off, d_off,
                      kind.value, result.alpha, result.blurred)
    if kind is MaskShapeKind.OBJECT:
        prov.object_category = next(c for c, om in object_masks if np.array_equal(om, result.binary))

    if manip_type is ManipType.SPLICING:
        d_m = d
    elif manip_type is ManipType.COPY_MOVE:
        m, d_m, shift = copy_move_translate(d, m, rng.stage("translate"))
        prov.copy_move_offset = shift
    elif manip_type is ManipType.REMOVAL:
        pick = rng.stage("inpaint")
        method = InpaintMethod.FAST_MARCHING if pick.random() < 0.5 else InpaintMethod.DIFFUSION
        d_m = inpaint(d, result.binary, method, INPAINT_RADIUS)
        prov.inpaint_method = method.value
    else:
        d_m = apply_recipe_filters(d, recipe, rng.stage("filters"))

    x = compose(p, d_m, m)
    if manip_type is ManipType.ENHANCEMENT and np.array_equal(x, p):
        raise ForgeError(f"enhancement left sample {seq} unchanged")
    return ForgedSample(x, ground_truth(m), recipe, seq, prov, p, m)
