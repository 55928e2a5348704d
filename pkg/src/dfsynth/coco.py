"""COCO ``instances_*.json`` ingestion and object-mask rasterisation."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import imaging
from .raster import fill_polygons

log = logging.getLogger(__name__)

# polygon coordinates may sit this far outside the image
BOUNDS_SLACK = 1.0


class AnnotationError(ValueError):
    """Malformed or inconsistent annotation file."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class ObjectPolygon:
    category_id: int
    rings: tuple[tuple[tuple[float, float], ...], ...]


@dataclass(frozen=True)
class ImageRecord:
    source_id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class SourceImage:
    """A decoded corpus image. ``pixels`` is ``(H, W, 3)`` uint8."""

    pixels: np.ndarray
    source_id: int

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class AnnotationIndex:
    image_dir: Path
    images: tuple[ImageRecord, ...]
    annotations: Mapping[int, tuple[ObjectPolygon, ...]] = field(default_factory=dict)
    categories: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {im.source_id: im for im in self.images})

    def record(self, source_id: int) -> ImageRecord:
        return self._by_id[source_id]

    def path(self, source_id: int) -> Path:
        return self.image_dir / self._by_id[source_id].file_name

    def eligible_for_objects(self, source_id: int) -> bool:
        return bool(self.annotations.get(source_id))

    def object_categories(self, source_id: int) -> list[int]:
        return sorted({p.category_id for p in self.annotations.get(source_id, ())})

    def load(self, source_id: int) -> SourceImage:
        return SourceImage(imaging.load_rgb(self.path(source_id)), source_id)

    def to_coco(self) -> dict:
        """Serialise back to a COCO-style dict (polygon annotations only)."""
        anns = []
        for sid in sorted(self.annotations):
            for poly in self.annotations[sid]:
                anns.append({
                    "id": len(anns) + 1,
                    "image_id": sid,
                    "category_id": poly.category_id,
                    "iscrowd": 0,
                    "segmentation": [[c for xy in ring for c in xy] for ring in poly.rings],
                })
        return {
            "images": [{"id": im.source_id, "file_name": im.file_name,
                        "width": im.width, "height": im.height} for im in self.images],
            "annotations": anns,
            "categories": [{"id": cid, "name": name} for cid, name in sorted(self.categories.items())],
        }


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _rings(segmentation, record: ImageRecord) -> tuple | None:
    # RLE (dict) segmentations carry no polygon and are skipped
    if not isinstance(segmentation, list):
        return None
    lo_x, hi_x = -BOUNDS_SLACK, record.width + BOUNDS_SLACK
    lo_y, hi_y = -BOUNDS_SLACK, record.height + BOUNDS_SLACK
    rings = []
    for flat in segmentation:
        if not isinstance(flat, list) or len(flat) < 6 or len(flat) % 2:
            continue
        pts = tuple((min(max(float(x), lo_x), hi_x), min(max(float(y), lo_y), hi_y))
                    for x, y in zip(flat[0::2], flat[1::2]))
        rings.append(pts)
    return tuple(rings) or None


def parse_annotations(json_bytes: bytes | str, image_dir) -> AnnotationIndex:
    text = json_bytes.decode("utf-8") if isinstance(json_bytes, (bytes, bytearray)) else json_bytes
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"malformed annotation JSON: {exc.msg}", _byte_offset(text, exc.pos)) from exc
    if not isinstance(doc, dict):
        raise AnnotationError("annotation JSON must be an object")
    for key in ("images", "annotations", "categories"):
        if not isinstance(doc.get(key), list):
            raise AnnotationError(f"missing mandatory array {key!r}")

    images = []
    for im in doc["images"]:
        try:
            images.append(ImageRecord(int(im["id"]), str(im["file_name"]), int(im["width"]), int(im["height"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise AnnotationError(f"bad image entry {im!r}") from exc
    by_id = {im.source_id: im for im in images}
    if len(by_id) != len(images):
        raise AnnotationError("duplicate image ids")

    categories = {int(c["id"]): str(c.get("name", c["id"])) for c in doc["categories"]}

    polys: dict[int, list[ObjectPolygon]] = {}
    skipped = 0
    for ann in doc["annotations"]:
        sid = ann.get("image_id")
        if sid not in by_id:
            raise AnnotationError(f"annotation {ann.get('id')} references unknown image {sid}")
        if ann.get("iscrowd", 0):
            skipped += 1
            continue
        rings = _rings(ann.get("segmentation"), by_id[sid])
        if rings is None:
            skipped += 1
            continue
        polys.setdefault(sid, []).append(ObjectPolygon(int(ann["category_id"]), rings))
    if skipped:
        log.debug("skipped %d crowd/RLE/degenerate annotations", skipped)

    # canonical order so that ingestion does not depend on file order
    annotations = {sid: tuple(sorted(v, key=lambda p: (p.category_id, p.rings)))
                   for sid, v in sorted(polys.items())}
    return AnnotationIndex(Path(image_dir), tuple(images), annotations, categories)


def load_index(annotation_file, image_dir) -> AnnotationIndex:
    return parse_annotations(Path(annotation_file).read_bytes(), image_dir)


def sample_source(index: AnnotationIndex, rng: np.random.Generator,
                  exclude: int | None = None) -> ImageRecord:
    """Uniform draw over the corpus, never returning ``exclude``."""
    if not index.images:
        raise ValueError("empty annotation index")
    candidates = index.images
    if exclude is not None:
        candidates = tuple(im for im in index.images if im.source_id != exclude)
        if not candidates:
            raise ValueError("cannot exclude the only image of the index")
    return candidates[int(rng.integers(len(candidates)))]


def category_mask(index: AnnotationIndex, source_id: int, category_id: int,
                  height: int, width: int, window: tuple[int, int] = (0, 0),
                  scale: tuple[float, float] = (1.0, 1.0)) -> np.ndarray:
    """Union of all ``category_id`` objects of an image as a boolean raster.

    Polygon vertices are multiplied by ``scale`` (the per-axis factors applied
    to the source image) and rasterised in the ``height x width`` window whose
    top-left corner is ``window``.
    """
    polys = [p for p in index.annotations.get(source_id, ()) if p.category_id == category_id]
    if not polys:
        raise KeyError(f"image {source_id} has no objects of category {category_id}")
    sx, sy = scale
    out = np.zeros((height, width), dtype=bool)
    for poly in polys:
        rings = [[(x * sx, y * sy) for x, y in ring] for ring in poly.rings]
        out |= fill_polygons(rings, height, width, origin=window)
    return out


def rasterize_category(index: AnnotationIndex, source_id: int, category_id: int,
                       window: tuple[int, int], scale: tuple[float, float] = (1.0, 1.0),
                       size: int = imaging.PATCH_SIZE) -> np.ndarray:
    """Object mask of one category inside a ``size x size`` crop window, as float."""
    rec = index.record(source_id)
    scaled_w = round(rec.width * scale[0])
    scaled_h = round(rec.height * scale[1])
    x, y = window
    if not (0 <= x <= scaled_w - size and 0 <= y <= scaled_h - size):
        raise ValueError(f"window {window} outside scaled image {scaled_w}x{scaled_h}")
    return category_mask(index, source_id, category_id, size, size, window, scale).astype(np.float64)
