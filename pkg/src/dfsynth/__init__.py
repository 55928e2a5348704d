"""Synthetic image-forgery data: splicing, copy-move, removal and enhancement
patches with per-pixel ground truth, plus a dataset auditor."""

from .coco import AnnotationError, AnnotationIndex, load_index, parse_annotations
from .compositor import ForgeError, ForgedSample, compose, forge_sample, ground_truth, scaled_size
from .donor import DonorRecipe, ManipType, RecipeError, sample_recipe
from .imaging import PATCH_SIZE, BlurKind
from .inpaint import InpaintMethod, inpaint
from .masks import MaskRetryError, MaskShapeKind, gen_constrained_mask
from .naming import FileNameError, decode_name, encode_name
from .pipeline import (GenerationConfig, GenerationError, OutputFormat, run_generate, stats_report,
                       validate_dataset)
from .rng import DeterministicRng
from .slic import slic_segment

__version__ = "0.1.0"

__all__ = [
    "AnnotationError", "AnnotationIndex", "BlurKind", "DeterministicRng", "DonorRecipe",
    "FileNameError", "ForgeError", "ForgedSample", "GenerationConfig", "GenerationError",
    "InpaintMethod", "ManipType", "MaskRetryError", "MaskShapeKind", "OutputFormat", "PATCH_SIZE",
    "RecipeError", "compose", "decode_name", "encode_name", "forge_sample", "gen_constrained_mask",
    "ground_truth", "inpaint", "load_index", "parse_annotations", "run_generate", "sample_recipe",
    "scaled_size", "slic_segment", "stats_report", "validate_dataset",
]
