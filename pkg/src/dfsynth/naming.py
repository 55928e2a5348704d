"""File-name codec: ``COCO_DF_<10-character code>_<8-digit sequence>.<ext>``.

Code positions: 0 type (C/S/R/E), 1 resample, 2 flip, 3 rotate, 4 blur kind
(B/G, ``0`` for none), 5 blur radius, 6 contrast filter, 7 noise,
8 brightness, 9 JPEG quality / 10.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .donor import DonorRecipe, ManipType, RecipeError
from .imaging import BlurKind

PREFIX = "COCO_DF_"
MAX_SEQ = 99_999_999
_NAME_RE = re.compile(r"^COCO_DF_(?P<code>[^_]{10})_(?P<seq>\d{8})\.(?P<ext>[A-Za-z0-9]+)$")


class FileNameError(ValueError):
    """A file name does not follow the convention."""


@dataclass(frozen=True)
class SampleName:
    recipe: DonorRecipe
    seq: int
    ext: str

    @property
    def stem(self) -> str:
        return encode_name(self.recipe, self.seq, self.ext).rsplit(".", 1)[0]


def encode_code(r: DonorRecipe) -> str:
    blur = r.blur_kind.value if r.blur_kind is not None else "0"
    return (f"{r.manip_type.value}{int(r.resample)}{int(r.flip)}{r.rotate}"
            f"{blur}{r.blur_radius}{r.contrast_id}{int(r.noise)}{int(r.brightness)}{r.jpeg_x}")


def encode_name(recipe: DonorRecipe, seq: int, ext: str = "jpg") -> str:
    if not 0 <= seq <= MAX_SEQ:
        raise FileNameError(f"sequence number {seq} outside 0..{MAX_SEQ}")
    if not ext or not ext.isalnum():
        raise FileNameError(f"bad extension {ext!r}")
    return f"{PREFIX}{encode_code(recipe)}_{seq:08d}.{ext}"


def _flag(ch: str, pos: int) -> bool:
    if ch not in "01":
        raise FileNameError(f"position {pos} must be 0 or 1, got {ch!r}")
    return ch == "1"


def _digit(ch: str, pos: int, hi: int) -> int:
    if not ch.isdigit() or int(ch) > hi:
        raise FileNameError(f"position {pos} must be a digit 0..{hi}, got {ch!r}")
    return int(ch)


def decode_code(code: str) -> DonorRecipe:
    if len(code) != 10:
        raise FileNameError(f"manipulation code must have 10 characters, got {code!r}")
    try:
        manip = ManipType(code[0])
    except ValueError:
        raise FileNameError(f"position 0 must be one of C/S/R/E, got {code[0]!r}") from None
    if code[4] not in "BG0":
        raise FileNameError(f"position 4 must be B, G or 0, got {code[4]!r}")
    radius = _digit(code[5], 5, 9)
    if code[4] == "0" and radius:
        raise FileNameError("blur radius given without a blur kind")
    # "B0"/"G0" carry a kind letter but mean no blurring
    blur_kind = BlurKind(code[4]) if radius else None
    try:
        return DonorRecipe(
            manip_type=manip,
            resample=_flag(code[1], 1),
            flip=_flag(code[2], 2),
            rotate=_digit(code[3], 3, 3),
            blur_kind=blur_kind,
            blur_radius=radius,
            contrast_id=_digit(code[6], 6, 5),
            noise=_flag(code[7], 7),
            brightness=_flag(code[8], 8),
            jpeg_x=_digit(code[9], 9, 9),
        )
    except RecipeError as exc:
        raise FileNameError(f"illegal combination in {code!r}: {exc}") from exc


def decode_name(name: str) -> SampleName:
    m = _NAME_RE.match(name)
    if m is None:
        raise FileNameError(f"{name!r} does not match COCO_DF_<code>_<NNNNNNNN>.<ext>")
    return SampleName(decode_code(m["code"]), int(m["seq"]), m["ext"])
