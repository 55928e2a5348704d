import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from dfsynth import imaging, masks, raster
from dfsynth.masks import MaskShapeKind
from dfsynth.slic import slic_segment

from conftest import natural_patch
from test_raster_coco import even_odd_oracle

FOUR = ndimage.generate_binary_structure(2, 1)


def assert_partition(labels, shape=(256, 256)):
    assert labels.shape == shape
    n = int(labels.max()) + 1
    assert labels.min() == 0
    sizes = np.bincount(labels.ravel(), minlength=n)
    assert (sizes > 0).all() and sizes.sum() == labels.size
    for lab in range(n):
        _, comps = ndimage.label(labels == lab, structure=FOUR)
        assert comps == 1, f"label {lab} has {comps} components"


# -- geometric shapes ---------------------------------------------------------

@pytest.mark.parametrize("kind", masks.GEOMETRIC_KINDS)
def test_geometric_masks_binary(kind, rng):
    for _ in range(20):
        m = masks.gen_geometric_mask(kind, rng)
        assert m.shape == (256, 256) and set(np.unique(m)) <= {0.0, 1.0} and m.any()


def test_rounded_rectangle_zero_radius():
    bbox = (30.2, 40.8, 170.5, 99.1)
    a = masks.rasterize_shape(MaskShapeKind.ROUNDED_RECTANGLE, {"bbox": bbox, "radius": 0.0})
    yy, xx = np.mgrid[0:256, 0:256] + 0.5
    rect = (xx >= bbox[0]) & (xx < bbox[2]) & (yy >= bbox[1]) & (yy < bbox[3])
    assert np.array_equal(a, rect)


def test_full_ellipse_rejected():
    m = masks.rasterize_shape(MaskShapeKind.ELLIPSE, {"bbox": (0, 0, 256, 256)})
    assert abs(masks.nonzero_fraction(m) - np.pi / 4) < 0.01 * np.pi / 4
    assert not masks.area_ok(m)


def test_collinear_triangle_is_redrawn(rng):
    calls = []

    def draw(kind, g):
        calls.append(kind)
        if len(calls) == 1:
            return {"points": [(10.0, 10.0), (100.0, 100.0), (200.0, 200.0)]}
        return masks.draw_shape_params(kind, g)

    m = masks.gen_geometric_mask(MaskShapeKind.TRIANGLE, rng, draw=draw)
    assert len(calls) >= 2 and m.any()


def test_polygon5_matches_oracle():
    g = np.random.default_rng(5)
    for _ in range(100):
        params = masks.draw_shape_params(MaskShapeKind.POLYGON5, g)
        # scale down to keep the brute-force oracle cheap
        pts = [(x / 8, y / 8) for x, y in params["points"]]
        assert np.array_equal(raster.fill_polygons([pts], 32, 32), even_odd_oracle([pts], 32, 32))


def test_ellipse_polygon4_is_union(rng):
    p = masks.draw_shape_params(MaskShapeKind.ELLIPSE_POLYGON4, rng)
    m = masks.rasterize_shape(MaskShapeKind.ELLIPSE_POLYGON4, p)
    e = raster.fill_ellipse(p["bbox"], 256, 256)
    q = raster.fill_polygons([p["points"]], 256, 256)
    assert np.array_equal(m, e | q)


# -- SLIC ---------------------------------------------------------------------

def test_slic_k1():
    labels = slic_segment(natural_patch(0), 1)
    assert (labels == 0).all()


def test_slic_constant_patch_grid():
    labels = slic_segment(np.full((256, 256, 3), 90, np.uint8), 16)
    sizes = np.bincount(labels.ravel())
    assert len(sizes) == 16
    assert np.all(np.abs(sizes - 4096) <= 0.25 * 4096)


@pytest.mark.parametrize("seed", range(6))
def test_slic_partition(seed):
    g = np.random.default_rng(seed)
    patch = natural_patch(seed) if seed % 2 else g.integers(0, 256, (256, 256, 3), dtype=np.uint8)
    labels = slic_segment(patch, int(g.integers(2, 80)), compactness=float(g.uniform(1, 40)))
    assert_partition(labels)


def test_slic_deterministic():
    p = natural_patch(3)
    assert np.array_equal(slic_segment(p, 12), slic_segment(p, 12))


def test_slic_follows_colour_edges():
    p = np.zeros((256, 256, 3), np.uint8)
    p[:, 128:] = (230, 40, 40)
    labels = slic_segment(p, 4)
    for lab in np.unique(labels):
        cols = np.nonzero(labels == lab)[1]
        assert cols.max() < 128 or cols.min() >= 128


def test_slic_rejects_bad_k():
    with pytest.raises(ValueError):
        slic_segment(natural_patch(0), 0)


def test_superpixel_area_range():
    """Single-superpixel areas mostly fall in the admissible window for the k range in use."""
    g = np.random.default_rng(0)
    ok = total = 0
    for seed in range(10):
        labels = slic_segment(natural_patch(seed), int(g.integers(*masks.SUPERPIXEL_K)))
        frac = np.bincount(labels.ravel()) / labels.size
        ok += int(((frac >= masks.MIN_AREA) & (frac <= masks.MAX_AREA)).sum())
        total += len(frac)
    assert ok / total > 0.5


def test_pick_superpixel_mask(rng):
    assert masks.pick_superpixel_mask(np.zeros((256, 256), np.int32), rng).all()
    halves = np.zeros((256, 256), np.int32)
    halves[:, 128:] = 1
    m = masks.pick_superpixel_mask(halves, rng)
    assert masks.nonzero_fraction(m) == 0.5
    labels = slic_segment(natural_patch(2), 10)
    m = masks.pick_superpixel_mask(labels, rng) > 0
    assert len(np.unique(labels[m])) == 1
    assert np.array_equal(m, labels == labels[m][0])


# -- softening ----------------------------------------------------------------

def disk(r=40, c=(128, 128)):
    yy, xx = np.mgrid[0:256, 0:256]
    return ((yy - c[0]) ** 2 + (xx - c[1]) ** 2 <= r * r).astype(np.float64)


def test_soften_no_blur(rng):
    m = disk()
    assert np.array_equal(masks.soften_mask(m, False, 1.0, rng), m)
    s = masks.soften_mask(m, False, 0.94, rng)
    assert s.max() == pytest.approx(0.94)
    assert np.array_equal(s > 0, m > 0)


def test_soften_blur_support_bound():
    m = disk()
    g = np.random.default_rng(3)
    state = g.bit_generator.state
    radius = int(g.integers(masks.MASK_BLUR_RADII[0], masks.MASK_BLUR_RADII[1] + 1))
    g.bit_generator.state = state
    s = masks.soften_mask(m, True, 0.97, g)
    half = len(imaging.gaussian_kernel(radius)) // 2
    grown = ndimage.binary_dilation(m > 0, structure=np.ones((2 * half + 1, 2 * half + 1)))
    assert not ((s > 0) & ~grown).any()
    assert (s > 0).sum() > (m > 0).sum()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(0.94, 1.0), blur=st.booleans())
def test_soften_bounds(seed, alpha, blur):
    g = np.random.default_rng(seed)
    m = masks.gen_geometric_mask(MaskShapeKind.ELLIPSE, g)
    s = masks.soften_mask(m, blur, alpha, g)
    assert s.min() >= 0 and s.max() <= alpha + 1e-12


def test_soften_rejects_alpha(rng):
    with pytest.raises(ValueError):
        masks.soften_mask(disk(), False, 0.5, rng)


# -- constrained generation ---------------------------------------------------

def test_full_masks_exhaust_budget(rng):
    with pytest.raises(masks.MaskRetryError):
        masks.gen_constrained_mask(lambda g: np.ones((256, 256)), rng)


def test_ten_percent_ellipse_accepted_unchanged(rng):
    r = np.sqrt(0.10 * 256 * 256 / np.pi)
    m = disk(r)
    res = masks.gen_constrained_mask(lambda g: m, rng, blur_prob=0.0, alpha_range=(1.0, 1.0))
    assert res.attempts == 1
    assert np.array_equal(res.values, m)


def test_accepted_masks_within_bounds():
    g = np.random.default_rng(11)
    kinds = list(masks.GEOMETRIC_KINDS) + [MaskShapeKind.SUPERPIXEL]
    patch = natural_patch(4)
    fracs = []
    for i in range(1000):
        kind = kinds[i % len(kinds)]
        gen = masks.shape_generator(kind, donor_patch=patch)
        try:
            res = masks.gen_constrained_mask(gen, g)
        except masks.MaskRetryError:
            continue
        fracs.append(masks.nonzero_fraction(res.values))
    fracs = np.array(fracs)
    assert len(fracs) > 900
    assert fracs.min() >= 0.05 and fracs.max() <= 0.40


def test_object_generator_picks_given_masks(rng):
    a, b = disk(30) > 0, disk(50, (100, 90)) > 0
    gen = masks.shape_generator(MaskShapeKind.OBJECT, object_masks=[a, b])
    seen = {int(gen(rng).sum()) for _ in range(40)}
    assert seen == {int(a.sum()), int(b.sum())}
    with pytest.raises(ValueError):
        masks.shape_generator(MaskShapeKind.OBJECT, object_masks=[])
