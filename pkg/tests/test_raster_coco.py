import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfsynth import coco, raster


def even_odd_oracle(rings, h, w):
    """Crossing-number test at every pixel centre, one pixel at a time.

    Crossings at or left of the centre count, so spans are closed on the
    left and open on the right, like the scanline half-open rule in y.
    """
    out = np.zeros((h, w), bool)
    for i in range(h):
        yc = i + 0.5
        for j in range(w):
            xc = j + 0.5
            inside = False
            for ring in rings:
                n = len(ring)
                for k in range(n):
                    (x0, y0), (x1, y1) = ring[k], ring[(k + 1) % n]
                    if (y0 <= yc < y1) or (y1 <= yc < y0):
                        xi = x0 + (yc - y0) * (x1 - x0) / (y1 - y0)
                        if xi <= xc:
                            inside = not inside
            out[i, j] = inside
    return out


def fixture_doc(**extra):
    doc = {
        "images": [{"id": 1, "file_name": "a.jpg", "width": 300, "height": 300}],
        "annotations": [{"id": 1, "image_id": 1, "category_id": 3, "iscrowd": 0,
                         "segmentation": [[10, 10, 74, 10, 74, 74, 10, 74]]}],
        "categories": [{"id": 3, "name": "dog"}],
    }
    doc.update(extra)
    return doc


def parse(doc):
    return coco.parse_annotations(json.dumps(doc).encode(), "/nowhere")


# -- rasteriser ---------------------------------------------------------------

def test_square_exact():
    m = raster.fill_polygons([[(8, 8), (72, 8), (72, 72), (8, 72)]], 100, 100)
    assert m.sum() == 64 * 64
    assert m[8:72, 8:72].all()


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 45), st.floats(-5, 45)), min_size=3, max_size=7))
def test_fill_matches_oracle(points):
    ours = raster.fill_polygons([points], 40, 40)
    assert np.array_equal(ours, even_odd_oracle([points], 40, 40))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 84).map(lambda v: v / 2), st.integers(-4, 84).map(lambda v: v / 2)),
                min_size=3, max_size=7))
def test_fill_matches_oracle_on_pixel_centres(points):
    # half-integer vertices put many pixel centres exactly on edges and vertices
    ours = raster.fill_polygons([points], 40, 40)
    assert np.array_equal(ours, even_odd_oracle([points], 40, 40))


def test_hole_by_even_odd():
    outer = [(0, 0), (40, 0), (40, 40), (0, 40)]
    inner = [(10, 10), (30, 10), (30, 30), (10, 30)]
    m = raster.fill_polygons([outer, inner], 40, 40)
    assert m.sum() == 40 * 40 - 20 * 20
    assert not m[10:30, 10:30].any()
    assert np.array_equal(m, even_odd_oracle([outer, inner], 40, 40))


def test_origin_shifts_window():
    ring = [(50, 60), (90, 60), (70, 100)]
    full = raster.fill_polygons([ring], 200, 200)
    win = raster.fill_polygons([ring], 64, 64, origin=(40, 50))
    assert np.array_equal(win, full[50:114, 40:104])


def test_ellipse_area():
    m = raster.fill_ellipse((0, 0, 256, 256), 256, 256)
    assert abs(m.mean() - np.pi / 4) < 0.01


def test_rounded_rect_zero_radius_is_rectangle():
    a = raster.fill_rounded_rect((10.3, 20.7, 100.2, 60.9), 0.0, 128, 128)
    b = raster.fill_polygons([[(10.3, 20.7), (100.2, 20.7), (100.2, 60.9), (10.3, 60.9)]], 128, 128)
    assert np.array_equal(a, b)


# -- annotation parsing -------------------------------------------------------

def test_parse_single_image():
    idx = parse(fixture_doc())
    assert len(idx.images) == 1
    assert idx.eligible_for_objects(1)
    assert idx.object_categories(1) == [3]


def test_image_without_annotations_is_ineligible():
    doc = fixture_doc()
    doc["images"].append({"id": 2, "file_name": "b.jpg", "width": 300, "height": 300})
    idx = parse(doc)
    assert [im.source_id for im in idx.images] == [1, 2]
    assert not idx.eligible_for_objects(2)


def test_crowd_and_rle_are_skipped():
    doc = fixture_doc()
    doc["annotations"] = [
        {"id": 1, "image_id": 1, "category_id": 3, "iscrowd": 1, "segmentation": [[0, 0, 9, 0, 9, 9]]},
        {"id": 2, "image_id": 1, "category_id": 3, "iscrowd": 0,
         "segmentation": {"counts": [0, 5], "size": [300, 300]}},
    ]
    assert not parse(doc).eligible_for_objects(1)


def test_truncated_json_reports_byte_offset():
    raw = json.dumps(fixture_doc()).encode()
    cut = raw[:57]
    with pytest.raises(coco.AnnotationError) as err:
        coco.parse_annotations(cut, ".")
    assert err.value.offset is not None
    assert 0 <= err.value.offset <= len(cut)


def test_multibyte_offset_is_in_bytes():
    raw = '{"images": [], "categories": [{"id": 1, "name": "ü"}], "annotations": [}'.encode()
    with pytest.raises(coco.AnnotationError) as err:
        coco.parse_annotations(raw, ".")
    assert raw[err.value.offset:err.value.offset + 1] == b"}"


@pytest.mark.parametrize("bad", [
    {"images": []},
    fixture_doc(annotations=[{"id": 9, "image_id": 5, "category_id": 3, "segmentation": []}]),
    fixture_doc(images=[{"id": 1, "file_name": "a", "width": 1, "height": 1}] * 2),
])
def test_structural_errors(bad):
    with pytest.raises(coco.AnnotationError):
        parse(bad)


def test_reserialise_is_fixed_point(index):
    again = coco.parse_annotations(json.dumps(index.to_coco()).encode(), index.image_dir)
    assert again == index
    assert again.to_coco() == index.to_coco()


def test_annotation_order_does_not_matter(corpus):
    img_dir, ann = corpus
    doc = json.loads(ann.read_text())
    shuffled = dict(doc, annotations=list(reversed(doc["annotations"])))
    a = coco.parse_annotations(json.dumps(doc), img_dir)
    b = coco.parse_annotations(json.dumps(shuffled), img_dir)
    assert a.annotations == b.annotations
    for sid in a.annotations:
        for cat in a.object_categories(sid):
            assert np.array_equal(coco.category_mask(a, sid, cat, 64, 64, (20, 20)),
                                  coco.category_mask(b, sid, cat, 64, 64, (20, 20)))


# -- sampling -----------------------------------------------------------------

def test_sample_source_forced_choices(rng):
    one = parse(fixture_doc())
    assert coco.sample_source(one, rng).source_id == 1
    doc = fixture_doc()
    doc["images"].append({"id": 2, "file_name": "b.jpg", "width": 300, "height": 300})
    two = parse(doc)
    assert all(coco.sample_source(two, rng, exclude=1).source_id == 2 for _ in range(50))
    with pytest.raises(ValueError):
        coco.sample_source(one, rng, exclude=1)


def test_sample_source_uniform():
    doc = fixture_doc(images=[{"id": i, "file_name": f"{i}.jpg", "width": 300, "height": 300}
                              for i in range(1, 5)])
    idx = parse(doc)
    g = np.random.default_rng(99)
    counts = np.bincount([coco.sample_source(idx, g).source_id for _ in range(10_000)], minlength=5)[1:]
    assert np.all(np.abs(counts / 10_000 - 0.25) <= 0.02)


# -- category rasterisation ---------------------------------------------------

def test_rasterize_square_block():
    idx = parse(fixture_doc())
    m = coco.rasterize_category(idx, 1, 3, (0, 0))
    assert abs(m.sum() - 4096) <= 256
    assert m.dtype == np.float64 and set(np.unique(m)) <= {0.0, 1.0}


def test_rasterize_outside_and_covering():
    outside = fixture_doc(annotations=[{"id": 1, "image_id": 1, "category_id": 3, "iscrowd": 0,
                                        "segmentation": [[280, 280, 299, 280, 299, 299]]}])
    assert not coco.rasterize_category(parse(outside), 1, 3, (0, 0)).any()
    cover = fixture_doc(annotations=[{"id": 1, "image_id": 1, "category_id": 3, "iscrowd": 0,
                                      "segmentation": [[0, 0, 300, 0, 300, 300, 0, 300]]}])
    assert coco.rasterize_category(parse(cover), 1, 3, (20, 30)).all()


def test_rasterize_inside_bounding_boxes(index):
    for sid, polys in index.annotations.items():
        rec = index.record(sid)
        x0, y0 = rec.width - 256, rec.height - 256
        if x0 < 0 or y0 < 0:
            continue
        for cat in index.object_categories(sid):
            m = coco.rasterize_category(index, sid, cat, (x0, y0)) > 0
            allowed = np.zeros_like(m)
            for p in polys:
                if p.category_id != cat:
                    continue
                pts = np.concatenate([np.asarray(r) for r in p.rings])
                lo = np.floor(pts.min(axis=0) - [x0, y0]).astype(int)
                hi = np.ceil(pts.max(axis=0) - [x0, y0]).astype(int)
                allowed[max(lo[1], 0):max(hi[1], 0), max(lo[0], 0):max(hi[0], 0)] = True
            assert not (m & ~allowed).any()


def test_rasterize_scaled_polygons():
    idx = parse(fixture_doc())
    m = coco.rasterize_category(idx, 1, 3, (0, 0), scale=(2.0, 2.0), size=256)
    assert m.sum() == 128 * 128
    assert m[20:148, 20:148].all()


def test_rasterize_errors():
    idx = parse(fixture_doc())
    with pytest.raises(KeyError):
        coco.rasterize_category(idx, 1, 99, (0, 0))
    with pytest.raises(ValueError):
        coco.rasterize_category(idx, 1, 3, (100, 0))
