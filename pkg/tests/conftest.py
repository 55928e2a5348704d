from functools import lru_cache

import numpy as np
import pytest

from dfsynth import coco
from dfsynth.corpus import build_demo_corpus


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    ann = build_demo_corpus(root, n_images=24, seed=0)
    return root / "images", ann


@pytest.fixture(scope="session")
def index(corpus):
    img_dir, ann = corpus
    return coco.load_index(ann, img_dir)


@pytest.fixture(scope="session")
def loader(index):
    @lru_cache(maxsize=None)
    def load(sid):
        return index.load(sid).pixels
    return load


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def natural_patch(seed: int = 0, size: int = 256) -> np.ndarray:
    """Smooth colour field with a few edges; stands in for a photograph."""
    g = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    base = np.stack([120 + 80 * np.sin(3 * xx + g.uniform(0, 6)),
                     110 + 70 * np.cos(4 * yy + g.uniform(0, 6)),
                     100 + 60 * np.sin(2 * (xx + yy))], axis=-1)
    base[(xx - 0.4) ** 2 + (yy - 0.6) ** 2 < 0.04] += 60
    base += g.normal(0, 3, base.shape)
    return np.clip(np.rint(base), 0, 255).astype(np.uint8)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
