"""Donor preprocessing recipes per manipulation type and their application."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np

from . import imaging
from .imaging import PATCH_SIZE, BlurKind

FLIP_PROB = 0.5
ROTATE_PROB = 0.3
RESAMPLE_PROB = 0.5
RESAMPLE_RANGE = (0.70, 1.30)
BLUR_PROB = 0.5
BLUR_RADII = (1, 7)
CONTRAST_PROB = 0.5
NOISE_PROB = 1.0 / 3.0
NOISE_MU, NOISE_SIGMA = 0.0, 12.0
BRIGHTNESS_PROB = 0.5
BRIGHTNESS_RANGE = (0.5, 1.5)
JPEG_PROB = 0.5
JPEG_STEPS = (1, 7)


def _draw_probs(target: tuple[float, ...]) -> tuple[float, ...]:
    """Per-draw probabilities that, once all-neutral draws are discarded, leave
    each filter active with its ``target`` frequency.

    Solves ``z = 1 - prod(1 - t_i * z)`` by fixed-point iteration; the draw
    probabilities are ``t_i * z``.
    """
    z = 1.0
    for _ in range(200):
        z = 1.0 - float(np.prod([1.0 - t * z for t in target]))
    return tuple(t * z for t in target)


# order: blur, contrast, noise, brightness, JPEG
E_FILTER_PROBS = (BLUR_PROB, CONTRAST_PROB, NOISE_PROB, BRIGHTNESS_PROB, JPEG_PROB)
E_DRAW_PROBS = _draw_probs(E_FILTER_PROBS)


class ManipType(str, Enum):
    COPY_MOVE = "C"
    SPLICING = "S"
    REMOVAL = "R"
    ENHANCEMENT = "E"


class RecipeError(ValueError):
    """A recipe activates a preprocessing step its manipulation type does not allow."""


@dataclass(frozen=True)
class DonorRecipe:
    """Donor preprocessing plan.

    The coded fields are the ones carried by a DF-style file name; the
    continuous parameters (resample factors, brightness factor) are kept for
    the generator and manifest but ignored by equality, since a file name
    cannot carry them.
    """

    manip_type: ManipType
    resample: bool = False
    flip: bool = False
    rotate: int = 0
    blur_kind: BlurKind | None = None
    blur_radius: int = 0
    contrast_id: int = 0
    noise: bool = False
    brightness: bool = False
    jpeg_x: int = 0
    scale_x: float = field(default=1.0, compare=False)
    scale_y: float = field(default=1.0, compare=False)
    brightness_factor: float = field(default=1.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "manip_type", ManipType(self.manip_type))
        if self.blur_kind is not None:
            object.__setattr__(self, "blur_kind", BlurKind(self.blur_kind))
        validate_recipe(self)

    @property
    def geometric_active(self) -> bool:
        return self.resample or self.flip or self.rotate != 0

    @property
    def filters_active(self) -> bool:
        return (self.blur_kind is not None or self.contrast_id != 0 or self.noise
                or self.brightness or self.jpeg_x != 0)

    @property
    def jpeg_quality(self) -> int | None:
        return 10 * self.jpeg_x if self.jpeg_x else None

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Enum) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DonorRecipe":
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})


def validate_recipe(r: DonorRecipe) -> None:
    if r.rotate not in (0, 1, 2, 3):
        raise RecipeError(f"rotate must be 0..3, got {r.rotate}")
    if not 0 <= r.contrast_id <= 5:
        raise RecipeError(f"contrast id must be 0..5, got {r.contrast_id}")
    if not 0 <= r.jpeg_x <= 9:
        raise RecipeError(f"JPEG digit must be 0..9, got {r.jpeg_x}")
    if not 0 <= r.blur_radius <= 9:
        raise RecipeError(f"blur radius must be 0..9, got {r.blur_radius}")
    if (r.blur_kind is None) != (r.blur_radius == 0):
        raise RecipeError("blur kind and radius must be set together")
    if r.manip_type in (ManipType.COPY_MOVE, ManipType.SPLICING):
        if r.filters_active:
            raise RecipeError(f"type {r.manip_type.value} allows only resample/flip/rotate")
    elif r.manip_type is ManipType.REMOVAL:
        if r.geometric_active or r.filters_active:
            raise RecipeError("removal recipes carry no preprocessing")
    else:
        if r.geometric_active:
            raise RecipeError("enhancement recipes cannot resample, flip or rotate")
        if not r.filters_active:
            raise RecipeError("enhancement recipes need at least one active filter")


def sample_recipe(manip_type: ManipType | str, rng: np.random.Generator) -> DonorRecipe:
    manip_type = ManipType(manip_type)
    if manip_type is ManipType.REMOVAL:
        return DonorRecipe(manip_type)
    if manip_type in (ManipType.COPY_MOVE, ManipType.SPLICING):
        resample = bool(rng.random() < RESAMPLE_PROB)
        sx, sy = (float(v) for v in rng.uniform(*RESAMPLE_RANGE, size=2)) if resample else (1.0, 1.0)
        flip = bool(rng.random() < FLIP_PROB)
        rotate = int(rng.integers(1, 4)) if rng.random() < ROTATE_PROB else 0
        return DonorRecipe(manip_type, resample=resample, flip=flip, rotate=rotate, scale_x=sx, scale_y=sy)
    p_blur, p_contrast, p_noise, p_bright, p_jpeg = E_DRAW_PROBS
    while True:
        kw = {}
        if rng.random() < p_blur:
            kw["blur_kind"] = BlurKind.BOX if rng.random() < 0.5 else BlurKind.GAUSSIAN
            kw["blur_radius"] = int(rng.integers(BLUR_RADII[0], BLUR_RADII[1] + 1))
        if rng.random() < p_contrast:
            kw["contrast_id"] = int(rng.integers(1, 6))
        kw["noise"] = bool(rng.random() < p_noise)
        if rng.random() < p_bright:
            kw["brightness"] = True
            kw["brightness_factor"] = float(rng.uniform(*BRIGHTNESS_RANGE))
        if rng.random() < p_jpeg:
            kw["jpeg_x"] = int(rng.integers(JPEG_STEPS[0], JPEG_STEPS[1] + 1))
        if kw.get("blur_kind") or kw.get("contrast_id") or kw["noise"] or kw.get("brightness") or kw.get("jpeg_x"):
            return DonorRecipe(manip_type, **kw)


def resampled_size(w: int, h: int, sx: float, sy: float) -> tuple[int, int]:
    """Per-axis rescale, never below the patch size."""
    return max(round(w * sx), PATCH_SIZE), max(round(h * sy), PATCH_SIZE)


def apply_recipe_geometric(img: np.ndarray, r: DonorRecipe) -> np.ndarray:
    """Resample, then flip, then rotate a whole donor image."""
    out = img
    if r.resample:
        w, h = resampled_size(img.shape[1], img.shape[0], r.scale_x, r.scale_y)
        out = imaging.resize_bilinear(out, w, h)
    if r.flip or r.rotate:
        out = imaging.orient(out, r.flip, r.rotate)
    return out if out is not img else img.copy()


def apply_recipe_filters(p: np.ndarray, r: DonorRecipe, rng: np.random.Generator) -> np.ndarray:
    """Blur, contrast, noise, brightness, JPEG, in that order; inactive steps skipped."""
    out = p
    if r.blur_kind is not None:
        out = imaging.blur(out, r.blur_kind, r.blur_radius)
    if r.contrast_id:
        out = imaging.apply_contrast(out, r.contrast_id)
    if r.noise:
        out = imaging.add_gaussian_noise(out, NOISE_MU, NOISE_SIGMA, rng)
    if r.brightness:
        out = imaging.adjust_brightness(out, r.brightness_factor)
    if r.jpeg_x:
        out = imaging.jpeg_roundtrip(out, r.jpeg_quality)
    return out if out is not p else p.copy()
