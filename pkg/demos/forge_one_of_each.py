"""Forge one patch per manipulation type and save a contact sheet.

Each row shows the pristine patch, the forged patch and its ground truth.
The corpus is a small synthetic COCO-style set built on the fly, so the
script runs without any downloads.

    python demos/forge_one_of_each.py [output_dir]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from dfsynth import DeterministicRng, ManipType, forge_sample, load_index
from dfsynth.corpus import build_demo_corpus
from dfsynth.naming import encode_name

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out_dir.mkdir(parents=True, exist_ok=True)

with tempfile.TemporaryDirectory() as tmp:
    ann = build_demo_corpus(tmp, n_images=12, seed=3)
    index = load_index(ann, Path(tmp) / "images")

    rows = []
    for seq, kind in enumerate(ManipType):
        sample = forge_sample(index, kind, seq, DeterministicRng(2023, seq))
        prov = sample.provenance
        print(f"{encode_name(sample.recipe, seq):36s} mask={prov.mask_kind:20s} "
              f"alpha={prov.alpha:.3f} area={sample.gt.mean():.3f}")
        gt_rgb = np.repeat(sample.gt[..., None] * 255, 3, axis=2).astype(np.uint8)
        rows.append(np.hstack([sample.pristine, sample.forged, gt_rgb]))

sheet = np.vstack(rows)
Image.fromarray(sheet).save(out_dir / "one_of_each.png")
print("wrote", out_dir / "one_of_each.png")
