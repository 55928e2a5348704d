"""Small synthetic COCO-style corpus for demos and tests.

Images are smooth colour fields with textured blobs painted on top; the
blobs are recorded as polygon annotations, so every mask family (including
object segmentation) has something to work with.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

CATEGORIES = {1: "person", 2: "car", 3: "dog", 4: "chair", 5: "bottle"}
SIZES = [(640, 480), (480, 640), (500, 375), (640, 427), (427, 640), (612, 612),
         (320, 240), (200, 300), (640, 360), (375, 500)]


def _background(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    c0, c1 = rng.uniform(20, 235, size=(2, 3))
    angle = rng.uniform(0, 2 * math.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    t = (np.cos(angle) * xx / w + np.sin(angle) * yy / h)
    t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
    img = c0 + t[..., None] * (c1 - c0)
    # low-frequency texture from a coarse random grid
    coarse = rng.normal(0, 18, size=(h // 32 + 2, w // 32 + 2, 3))
    tex = np.asarray(Image.fromarray(coarse.astype(np.float32)[..., 0]).resize((w, h), Image.BILINEAR))
    img += tex[..., None]
    img += rng.normal(0, 4, size=img.shape)
    return img


def _blob(rng: np.random.Generator, w: int, h: int) -> list[tuple[float, float]]:
    cx, cy = rng.uniform(0.1 * w, 0.9 * w), rng.uniform(0.1 * h, 0.9 * h)
    r = rng.uniform(0.08, 0.3) * min(w, h)
    n = int(rng.integers(6, 14))
    angles = np.sort(rng.uniform(0, 2 * math.pi, n))
    radii = r * rng.uniform(0.6, 1.2, n)
    return [(float(np.clip(cx + rr * math.cos(a), 0, w)), float(np.clip(cy + rr * math.sin(a), 0, h)))
            for a, rr in zip(angles, radii)]


def build_demo_corpus(out_dir, n_images: int = 24, seed: int = 0) -> Path:
    """Write ``n_images`` JPEGs and ``instances_demo.json`` under ``out_dir``.

    Every sixth image has no annotations; one annotation is a crowd region.
    Returns the path of the annotation file.
    """
    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    images, anns = [], []
    for i in range(n_images):
        w, h = SIZES[i % len(SIZES)]
        pixels = _background(rng, w, h)
        canvas = Image.fromarray(np.clip(pixels, 0, 255).astype(np.uint8))
        draw = ImageDraw.Draw(canvas)
        labelled = i % 6 != 5
        for _ in range(int(rng.integers(2, 6))):
            ring = _blob(rng, w, h)
            colour = tuple(int(c) for c in rng.integers(0, 256, 3))
            draw.polygon(ring, fill=colour)
            if labelled:
                anns.append({
                    "id": len(anns) + 1, "image_id": i + 1,
                    "category_id": int(rng.integers(1, len(CATEGORIES) + 1)),
                    "iscrowd": 0, "area": 0.0,
                    "segmentation": [[c for xy in ring for c in xy]],
                })
        if i == 0:
            anns.append({"id": len(anns) + 1, "image_id": 1, "category_id": 1, "iscrowd": 1,
                         "segmentation": {"counts": [0, w * h], "size": [h, w]}})
        arr = np.asarray(canvas).astype(np.float64) + rng.normal(0, 3, size=(h, w, 3))
        name = f"{i + 1:012d}.jpg"
        Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8)).save(img_dir / name, quality=92)
        images.append({"id": i + 1, "file_name": name, "width": w, "height": h})

    doc = {"images": images, "annotations": anns,
           "categories": [{"id": k, "name": v} for k, v in CATEGORIES.items()]}
    ann_path = out_dir / "instances_demo.json"
    ann_path.write_text(json.dumps(doc))
    return ann_path
