"""Dataset generation, validation and statistics.

Sample ``i`` is generated from the random stream ``(seed, i)`` with a
manipulation type fixed by a deterministic interleaving of the per-type
quotas, so the output tree depends only on the configuration and never on
the number of worker processes.
"""

from __future__ import annotations

import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from . import coco, imaging, masks, naming
from .compositor import ForgeError, forge_sample
from .donor import DonorRecipe, ManipType
from .masks import MaskRetryError
from .rng import DeterministicRng

log = logging.getLogger(__name__)

TYPE_ORDER = (ManipType.SPLICING, ManipType.COPY_MOVE, ManipType.ENHANCEMENT, ManipType.REMOVAL)
DEFAULT_MIX = (4.0, 3.0, 2.0, 1.0)
MAX_REATTEMPTS = 3
MANIFEST = "manifest.jsonl"


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OutputFormat:
    kind: str = "jpg"
    quality: int = 95

    @classmethod
    def parse(cls, text: str) -> "OutputFormat":
        kind, _, q = text.partition(":")
        kind = kind.strip().lower()
        if kind in ("jpg", "jpeg"):
            quality = int(q) if q else 95
            if not 1 <= quality <= 100:
                raise ValueError(f"JPEG quality must be in [1, 100], got {quality}")
            return cls("jpg", quality)
        if kind == "png" and not q:
            return cls("png", 0)
        raise ValueError(f"unknown output format {text!r} (expected jpg:Q or png)")

    def __str__(self) -> str:
        return f"jpg:{self.quality}" if self.kind == "jpg" else "png"


@dataclass(frozen=True)
class GenerationConfig:
    source_dir: Path
    annotation_file: Path
    out_dir: Path
    count: int
    mix: tuple[float, float, float, float] = DEFAULT_MIX
    seed: int = 0
    jobs: int = 1
    output_format: OutputFormat = OutputFormat()

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be non-negative")
        if len(self.mix) != 4 or any(w < 0 for w in self.mix) or sum(self.mix) == 0:
            raise ValueError(f"mix needs four non-negative weights, not all zero: {self.mix}")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


# -- scheduling -------------------------------------------------------------

def apportion(count: int, weights) -> list[int]:
    """Largest-remainder split of ``count``; ties go to the earlier weight."""
    weights = [float(w) for w in weights]
    total = sum(weights)
    quotas = [count * w / total for w in weights]
    base = [int(q) for q in quotas]
    rest = count - sum(base)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base


def type_schedule(count: int, mix=DEFAULT_MIX) -> list[ManipType]:
    """Type of every sample index: the quotas spread evenly over ``0..count-1``."""
    slots = []
    for t_idx, n in enumerate(apportion(count, mix)):
        slots.extend(((j + 0.5) / n, t_idx) for j in range(n))
    slots.sort()
    return [TYPE_ORDER[t] for _, t in slots]


# -- workers ----------------------------------------------------------------

@dataclass
class ManifestRecord:
    file: str
    mask: str
    manip_type: str
    code: str
    recipe: dict
    mask_kind: str
    alpha: float
    mask_blurred: bool
    pristine_id: int
    donor_id: int
    pristine_downscale: bool
    pristine_offset: list
    donor_offset: list
    copy_move_offset: list | None
    inpaint_method: str | None
    object_category: int | None
    attempt: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


_STATE: dict = {}


def _init_worker(index: coco.AnnotationIndex, out_dir: Path, seed: int, fmt: OutputFormat):
    _STATE.update(index=index, out_dir=out_dir, seed=seed, fmt=fmt)

    @lru_cache(maxsize=64)
    def load(source_id: int) -> np.ndarray:
        return index.load(source_id).pixels

    _STATE["load"] = load


def _make_sample(job: tuple[int, str]) -> str:
    i, manip = job
    st = _STATE
    stream = DeterministicRng(st["seed"], i)
    last = None
    for attempt in range(MAX_REATTEMPTS + 1):
        try:
            sample = forge_sample(st["index"], manip, i, stream.retry(attempt), st["load"])
            break
        except (ForgeError, MaskRetryError) as exc:
            log.warning("sample %d attempt %d failed: %s", i, attempt, exc)
            last = exc
    else:
        raise GenerationError(f"sample {i} failed after {MAX_REATTEMPTS} reattempts") from last

    fmt: OutputFormat = st["fmt"]
    name = naming.encode_name(sample.recipe, i, fmt.kind)
    stem = name.rsplit(".", 1)[0]
    out_dir: Path = st["out_dir"]
    imaging.save_rgb(out_dir / "images" / name, sample.forged, fmt.kind, fmt.quality)
    imaging.save_mask_png(out_dir / "masks" / f"{stem}.png", sample.gt)
    prov = sample.provenance
    rec = ManifestRecord(
        file=name, mask=f"{stem}.png", manip_type=manip, code=naming.encode_code(sample.recipe),
        recipe=sample.recipe.to_dict(), mask_kind=prov.mask_kind, alpha=prov.alpha,
        mask_blurred=prov.mask_blurred, pristine_id=prov.pristine_id, donor_id=prov.donor_id,
        pristine_downscale=prov.pristine_downscale, pristine_offset=list(prov.pristine_offset),
        donor_offset=list(prov.donor_offset),
        copy_move_offset=list(prov.copy_move_offset) if prov.copy_move_offset else None,
        inpaint_method=prov.inpaint_method, object_category=prov.object_category, attempt=attempt,
    )
    return rec.to_json()


def run_generate(cfg: GenerationConfig) -> dict:
    """Write ``cfg.count`` forged samples, their masks and ``manifest.jsonl``."""
    t0 = time.perf_counter()
    try:
        index = coco.load_index(cfg.annotation_file, cfg.source_dir)
    except OSError as exc:
        raise GenerationError(f"cannot read annotations: {exc}") from exc
    if not index.images:
        raise GenerationError("the source corpus has no images")
    missing = [im.file_name for im in index.images if not index.path(im.source_id).is_file()]
    if missing:
        raise GenerationError(f"{len(missing)} corpus images not found, e.g. {missing[0]}")

    out = Path(cfg.out_dir)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
        (out / "masks").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GenerationError(f"cannot create output directory {out}: {exc}") from exc

    schedule = type_schedule(cfg.count, cfg.mix)
    jobs = [(i, t.value) for i, t in enumerate(schedule)]
    init_args = (index, out, cfg.seed, cfg.output_format)
    if cfg.jobs == 1 or len(jobs) < 2:
        _init_worker(*init_args)
        records = [_make_sample(j) for j in jobs]
    else:
        chunk = max(1, min(32, len(jobs) // (cfg.jobs * 8)))
        with ProcessPoolExecutor(cfg.jobs, initializer=_init_worker, initargs=init_args) as pool:
            records = list(pool.map(_make_sample, jobs, chunksize=chunk))

    with open(out / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        for line in records:
            fh.write(line + "\n")

    counts = Counter(t.value for t in schedule)
    return {
        "count": cfg.count,
        "type_counts": {t.value: counts.get(t.value, 0) for t in TYPE_ORDER},
        "reattempts": sum(json.loads(r)["attempt"] for r in records),
        "out_dir": str(out),
        "seconds": round(time.perf_counter() - t0, 3),
    }


# -- validation -------------------------------------------------------------

@dataclass
class Violation:
    file: str
    check: str
    detail: str


@dataclass
class ValidationReport:
    n_images: int = 0
    violations: list[Violation] = field(default_factory=list)
    type_counts: dict[str, int] = field(default_factory=dict)
    digit_histograms: list[dict[str, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_check(self) -> Counter:
        return Counter(v.check for v in self.violations)

    def to_dict(self) -> dict:
        return {"n_images": self.n_images, "ok": self.ok,
                "violations": [asdict(v) for v in self.violations],
                "type_counts": self.type_counts, "digit_histograms": self.digit_histograms}


def read_manifest(path: Path) -> dict[str, dict]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out[rec["file"]] = rec
    return out


def _check_mask(path: Path, name: str, report: ValidationReport) -> np.ndarray | None:
    if not path.is_file():
        report.violations.append(Violation(name, "mask-missing", f"{path.name} not found"))
        return None
    with Image.open(path) as im:
        mode, size = im.mode, im.size
        arr = np.asarray(im)
    if mode != "L" or size != (imaging.PATCH_SIZE, imaging.PATCH_SIZE):
        report.violations.append(Violation(name, "mask-format", f"mode {mode}, size {size}"))
        return None
    if not np.isin(arr, (0, 255)).all():
        report.violations.append(Violation(name, "mask-format", "mask values other than 0/255"))
        return None
    frac = masks.nonzero_fraction(arr)
    if not masks.MIN_AREA <= frac <= masks.MAX_AREA:
        report.violations.append(Violation(name, "mask-area", f"nonzero fraction {frac:.4f}"))
    return arr


def validate_dataset(root) -> ValidationReport:
    root = Path(root)
    if not root.is_dir():
        raise OSError(f"{root} is not a directory")
    report = ValidationReport(digit_histograms=[{} for _ in range(10)])
    manifest = read_manifest(root / MANIFEST) if (root / MANIFEST).is_file() else None
    names = sorted(p.name for p in (root / "images").iterdir() if p.is_file()) \
        if (root / "images").is_dir() else []
    types = Counter()
    seen_stems = set()
    for name in names:
        report.n_images += 1
        try:
            decoded = naming.decode_name(name)
        except naming.FileNameError as exc:
            report.violations.append(Violation(name, "grammar", str(exc)))
            continue
        stem = name.rsplit(".", 1)[0]
        seen_stems.add(stem)
        code = stem.split("_")[2]
        types[code[0]] += 1
        for pos, ch in enumerate(code):
            hist = report.digit_histograms[pos]
            hist[ch] = hist.get(ch, 0) + 1

        with Image.open(root / "images" / name) as im:
            mode, size = im.mode, im.size
        if mode != "RGB" or size != (imaging.PATCH_SIZE, imaging.PATCH_SIZE):
            report.violations.append(Violation(name, "image-format", f"mode {mode}, size {size}"))
        _check_mask(root / "masks" / f"{stem}.png", name, report)

        if manifest is not None:
            rec = manifest.get(name)
            if rec is None:
                report.violations.append(Violation(name, "manifest", "no manifest record"))
            elif DonorRecipe.from_dict(rec["recipe"]) != decoded.recipe:
                report.violations.append(Violation(name, "manifest", "recipe differs from file name"))

    if manifest is not None:
        present = set(names)
        for name in sorted(set(manifest) - present):
            report.violations.append(Violation(name, "manifest", "record without image file"))
    if (root / "masks").is_dir():
        for p in sorted((root / "masks").iterdir()):
            if p.suffix == ".png" and p.stem not in seen_stems and \
                    not any(n.startswith(p.stem + ".") for n in names):
                report.violations.append(Violation(p.name, "orphan-mask", "mask without image"))
    report.type_counts = {t.value: types.get(t.value, 0) for t in TYPE_ORDER}
    return report


# -- statistics -------------------------------------------------------------

def stats_report(root, area_bins: int = 14) -> dict:
    """Per-type counts, mask-area histogram and recipe-field frequencies."""
    root = Path(root)
    img_dir = root / "images"
    if not img_dir.is_dir():
        raise OSError(f"{img_dir} is not a directory")
    recipes: dict[str, list[DonorRecipe]] = {t.value: [] for t in TYPE_ORDER}
    areas = []
    for p in sorted(img_dir.iterdir()):
        try:
            decoded = naming.decode_name(p.name)
        except naming.FileNameError:
            continue
        recipes[decoded.recipe.manip_type.value].append(decoded.recipe)
        mask_path = root / "masks" / f"{p.stem}.png"
        if mask_path.is_file():
            with Image.open(mask_path) as im:
                areas.append(masks.nonzero_fraction(np.asarray(im)))

    def rate(rs, pred):
        return sum(1 for r in rs if pred(r)) / len(rs) if rs else None

    geo = recipes["S"] + recipes["C"]
    enh = recipes["E"]
    edges = np.linspace(0.0, 0.70, area_bins + 1)
    hist, _ = np.histogram(areas, bins=edges)
    doc = {
        "n_samples": sum(len(v) for v in recipes.values()),
        "type_counts": {k: len(v) for k, v in recipes.items()},
        "mask_area": {
            "bin_edges": [round(float(e), 4) for e in edges],
            "counts": hist.tolist(),
            "min": min(areas) if areas else None,
            "max": max(areas) if areas else None,
            "mean": float(np.mean(areas)) if areas else None,
        },
        "rates": {
            "SC": {"resample": rate(geo, lambda r: r.resample), "flip": rate(geo, lambda r: r.flip),
                   "rotate": rate(geo, lambda r: r.rotate != 0)},
            "E": {"blur": rate(enh, lambda r: r.blur_kind is not None),
                  "gaussian_blur": rate(enh, lambda r: r.blur_kind is imaging.BlurKind.GAUSSIAN),
                  "contrast": rate(enh, lambda r: r.contrast_id != 0),
                  "noise": rate(enh, lambda r: r.noise),
                  "brightness": rate(enh, lambda r: r.brightness),
                  "jpeg": rate(enh, lambda r: r.jpeg_x != 0)},
        },
    }
    if (root / MANIFEST).is_file():
        kinds = Counter(rec["mask_kind"] for rec in read_manifest(root / MANIFEST).values())
        doc["mask_kinds"] = dict(sorted(kinds.items()))
    return doc


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)
