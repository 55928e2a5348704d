"""Generate a small dataset, audit it, then break it on purpose.

The audit is the same one the ``dfsynth validate`` command runs. After a
clean pass we blank one ground-truth mask and show that exactly that file
is flagged.

    python demos/generate_and_audit.py [output_dir]
"""

import json
import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from dfsynth import GenerationConfig, run_generate, stats_report, validate_dataset
from dfsynth.corpus import build_demo_corpus

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "dataset"

with tempfile.TemporaryDirectory() as tmp:
    ann = build_demo_corpus(tmp, n_images=24, seed=0)
    cfg = GenerationConfig(Path(tmp) / "images", ann, out_dir, count=100, seed=1)
    summary = run_generate(cfg)
print(json.dumps(summary, indent=2))

report = validate_dataset(out_dir)
print(f"audit: {report.n_images} images, {len(report.violations)} violations, types {report.type_counts}")

stats = stats_report(out_dir)
print("flip/rotate rates among S+C:", stats["rates"]["SC"])
print("filter rates among E:", stats["rates"]["E"])
print("mask kinds:", stats["mask_kinds"])

victim = sorted((out_dir / "masks").iterdir())[0]
Image.fromarray(np.zeros((256, 256), np.uint8)).save(victim)
for v in validate_dataset(out_dir).violations:
    print("after blanking one mask:", v.check, v.file, v.detail)
