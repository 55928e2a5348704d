"""Command line: ``generate``, ``validate`` and ``stats``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pipeline import (GenerationConfig, GenerationError, OutputFormat, run_generate, stats_report,
                       validate_dataset)

# config-file keys and the flag each one mirrors
_KEYS = ("source", "annotations", "out", "count", "seed", "mix", "jobs", "format")


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or key not in _KEYS:
            raise ValueError(f"{path}:{n}: expected one of {', '.join(_KEYS)} as key = value")
        out[key] = value.strip()
    return out


def _mix(text: str) -> tuple[float, float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"--mix needs four comma-separated weights for S,C,E,R, got {text!r}")
    return tuple(parts)


def build_config(args: argparse.Namespace) -> GenerationConfig:
    values = read_config(args.config) if args.config else {}
    for key in _KEYS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = str(flag)
    missing = [k for k in ("source", "annotations", "out", "count") if k not in values]
    if missing:
        raise ValueError("missing required setting(s): " + ", ".join("--" + k for k in missing))
    return GenerationConfig(
        source_dir=Path(values["source"]),
        annotation_file=Path(values["annotations"]),
        out_dir=Path(values["out"]),
        count=int(values["count"]),
        mix=_mix(values.get("mix", "4,3,2,1")),
        seed=int(values.get("seed", 0)),
        jobs=int(values.get("jobs", 1)),
        output_format=OutputFormat.parse(values.get("format", "jpg:95")),
    )


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dfsynth", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a forged dataset")
    g.add_argument("--config", help="key = value file mirroring the flags (flags win)")
    g.add_argument("--source", help="directory of source images")
    g.add_argument("--annotations", help="COCO instances JSON")
    g.add_argument("--out", help="output directory")
    g.add_argument("--count", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--mix", help="S,C,E,R weights (default 4,3,2,1)")
    g.add_argument("--jobs", type=int)
    g.add_argument("--format", help="jpg:Q or png (default jpg:95)")

    v = sub.add_parser("validate", help="check a dataset directory")
    v.add_argument("dir")
    v.add_argument("--json", action="store_true", help="print the full report as JSON")

    s = sub.add_parser("stats", help="summary statistics of a dataset directory")
    s.add_argument("dir")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            print(json.dumps(run_generate(build_config(args)), indent=2))
            return 0
        if args.command == "validate":
            report = validate_dataset(args.dir)
            if args.json:
                print(json.dumps(report.to_dict(), indent=2))
            else:
                for v in report.violations:
                    print(f"{v.check}\t{v.file}\t{v.detail}")
                counts = ", ".join(f"{k}={n}" for k, n in report.type_counts.items())
                print(f"{report.n_images} images ({counts}), {len(report.violations)} violations")
            return 0 if report.ok else 1
        print(json.dumps(stats_report(args.dir), indent=2))
        return 0
    except (GenerationError, ValueError, OSError) as exc:
        print(f"dfsynth: error: {exc}", file=sys.stderr)
        return 2
