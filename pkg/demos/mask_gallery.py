"""Draw a few masks of every shape family, plus the superpixels they come from.

    python demos/mask_gallery.py [output_dir]
"""

import sys
from pathlib import Path

import numpy as np
from PIL import Image

from dfsynth import masks
from dfsynth.masks import MaskShapeKind
from dfsynth.slic import slic_segment

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out_dir.mkdir(parents=True, exist_ok=True)
rng = np.random.default_rng(7)

# a patch with some structure for the superpixel family
yy, xx = np.mgrid[0:256, 0:256] / 256.0
patch = np.stack([200 * xx, 180 * yy, 120 + 100 * np.sin(6 * xx * yy)], axis=-1).astype(np.uint8)
patch[(xx - 0.6) ** 2 + (yy - 0.4) ** 2 < 0.03] = (250, 220, 40)

tiles = []
for kind in list(masks.GEOMETRIC_KINDS) + [MaskShapeKind.SUPERPIXEL]:
    gen = masks.shape_generator(kind, donor_patch=patch)
    row = []
    for _ in range(4):
        res = masks.gen_constrained_mask(gen, rng)
        row.append((res.values * 255).astype(np.uint8))
        print(f"{kind.value:18s} area={masks.nonzero_fraction(res.values):.3f} "
              f"blurred={res.blurred} draws={res.attempts}")
    tiles.append(np.hstack(row))
Image.fromarray(np.vstack(tiles)).save(out_dir / "mask_gallery.png")

labels = slic_segment(patch, 12)
edges = np.zeros(labels.shape, bool)
edges[:-1] |= labels[:-1] != labels[1:]
edges[:, :-1] |= labels[:, :-1] != labels[:, 1:]
overlay = patch.copy()
overlay[edges] = 0
Image.fromarray(overlay).save(out_dir / "superpixels.png")
print(f"{labels.max() + 1} superpixels; wrote images to {out_dir}")
