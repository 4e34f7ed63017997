import numpy as np
import pytest

from crowdmaps.annotations import HeadAnnotation
from crowdmaps.geometry import ImageRect, voronoi_tessellate
from crowdmaps.kernels import GeoParams, geo_kernel_specs, voronoi_kernel_specs
from crowdmaps.postprocess import (
    Detection,
    PostprocessParams,
    count_from_map,
    estimate_boxes,
    extract_anchors,
)
from crowdmaps.rasterize import blend, render_anchors, render_density


def scatter_separated(rng, n, width, height, min_dist, margin=0.0):
    """Rejection-sample n points with pairwise distance >= min_dist."""
    pts = []
    while len(pts) < n:
        cand = rng.uniform(margin, [width - margin - 0.01, height - margin - 0.01])
        if all((cand[0] - p[0]) ** 2 + (cand[1] - p[1]) ** 2 >= min_dist**2 for p in pts):
            pts.append(cand)
    return np.array(pts)


def naive_extract(arr, threshold, nms_radius):
    """Independent oracle: peak extraction by literal loops."""
    h, w = arr.shape
    r = int(np.ceil(nms_radius))
    peaks = []
    for row in range(h):
        for col in range(w):
            v = arr[row, col]
            if v <= 0.0 or v < threshold:
                continue
            wins = True
            for rr in range(max(0, row - r), min(h, row + r + 1)):
                for cc in range(max(0, col - r), min(w, col + r + 1)):
                    if (rr, cc) == (row, col):
                        continue
                    if arr[rr, cc] > v or (arr[rr, cc] == v and (rr, cc) < (row, col)):
                        wins = False
                        break
                if not wins:
                    break
            if wins:
                peaks.append((row, col, v))
    peaks.sort(key=lambda p: (-p[2], p[0], p[1]))
    kept = []
    for row, col, v in peaks:
        if all((row - kr) ** 2 + (col - kc) ** 2 >= nms_radius**2 for kr, kc, _ in kept):
            kept.append((row, col, v))
    return [(float(row), float(col), float(v)) for row, col, v in kept]


class TestExtractAnchors:
    def test_recovers_single_planted_peak(self):
        ann = HeadAnnotation(ImageRect(100, 100), [(30, 40)])
        m = render_anchors(ann, sigma_anc=2.0)
        params = PostprocessParams(threshold=m.max() / 2.0, nms_radius=4.0)
        dets = extract_anchors(m, params)
        assert len(dets) == 1
        assert (dets[0].x, dets[0].y) == (30.0, 40.0)
        assert dets[0].score == m[40, 30]

    def test_zero_map_gives_nothing(self):
        params = PostprocessParams(threshold=0.0)
        assert extract_anchors(np.zeros((32, 32)), params) == []

    def test_equal_peaks_within_radius_collapse_to_one(self):
        m = np.zeros((100, 100))
        m[50, 50] = 1.0
        m[50, 53] = 1.0  # 3 px away, equal value
        dets = extract_anchors(m, PostprocessParams(threshold=0.5, nms_radius=4.0))
        assert len(dets) == 1
        assert (dets[0].x, dets[0].y) == (50.0, 50.0)  # lowest (row, col) wins

    def test_separated_equal_peaks_both_survive(self):
        m = np.zeros((100, 100))
        m[50, 50] = 1.0
        m[50, 55] = 1.0  # 5 px away
        dets = extract_anchors(m, PostprocessParams(threshold=0.5, nms_radius=4.0))
        assert len(dets) == 2

    def test_sorted_by_descending_score(self):
        m = np.zeros((60, 60))
        m[10, 10] = 0.5
        m[30, 30] = 0.9
        m[50, 20] = 0.7
        dets = extract_anchors(m, PostprocessParams(threshold=0.1, nms_radius=3.0))
        assert [d.score for d in dets] == sorted([d.score for d in dets], reverse=True)

    def test_raising_threshold_never_adds_detections(self):
        rng = np.random.default_rng(79)
        m = rng.uniform(0, 1, size=(64, 64))
        params = [PostprocessParams(threshold=t, nms_radius=3.0) for t in (0.0, 0.3, 0.6, 0.9)]
        counts = [len(extract_anchors(m, p)) for p in params]
        assert counts == sorted(counts, reverse=True)

    def test_nms_separation_invariant(self):
        rng = np.random.default_rng(83)
        for trial in range(5):
            m = rng.uniform(0, 1, size=(48, 48))
            radius = float(rng.uniform(2.0, 6.0))
            dets = extract_anchors(m, PostprocessParams(threshold=0.2, nms_radius=radius))
            for i in range(len(dets)):
                for j in range(i + 1, len(dets)):
                    d = np.hypot(dets[i].x - dets[j].x, dets[i].y - dets[j].y)
                    assert d >= radius

    def test_planted_peaks_recovered_exactly(self):
        rng = np.random.default_rng(89)
        pts = scatter_separated(rng, 40, 256, 256, min_dist=16.0)
        ann = HeadAnnotation(ImageRect(256, 256), pts)
        m = render_anchors(ann, sigma_anc=2.0)
        dets = extract_anchors(m, PostprocessParams(threshold=0.2 * m.max(), nms_radius=3.0))
        assert len(dets) == 40
        found = np.array([[d.x, d.y] for d in dets])
        for p in pts:
            assert np.sqrt(((found - p) ** 2).sum(axis=1)).min() <= 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(97)
        m = rng.uniform(0, 1, size=(40, 40))
        params = PostprocessParams(threshold=0.4, nms_radius=3.0)
        assert extract_anchors(m, params) == extract_anchors(m, params)

    def test_matches_naive_reimplementation_with_ties(self):
        # quantized values force plateaus and exact ties
        rng = np.random.default_rng(991)
        for _ in range(8):
            m = np.round(rng.uniform(0, 1, size=(24, 24)), 1)
            radius = float(rng.choice([2.0, 3.0, 4.5]))
            threshold = float(rng.choice([0.2, 0.5, 0.8]))
            params = PostprocessParams(threshold=threshold, nms_radius=radius)
            got = [(d.y, d.x, d.score) for d in extract_anchors(m, params)]
            assert got == naive_extract(m, threshold, radius)


class TestEstimateBoxes:
    def test_two_anchors_forty_pixels_apart(self):
        dets = [Detection(10.0, 50.0, 1.0), Detection(50.0, 50.0, 0.9)]
        pts = [(10.0, 50.0), (50.0, 50.0)]
        out = estimate_boxes(dets, pts, GeoParams(beta=0.3, m=1), box_scale=2.0)
        for det in out:
            x, y, w, h = det.box
            assert w == pytest.approx(24.0)
            assert h == pytest.approx(24.0)
            assert x == pytest.approx(det.x - 12.0)
            assert y == pytest.approx(det.y - 12.0)

    def test_single_anchor_falls_back(self):
        dets = [Detection(20.0, 20.0, 1.0)]
        out = estimate_boxes(dets, [(20.0, 20.0)], GeoParams(fallback_sigma=15.0), box_scale=2.0)
        assert out[0].box[2] == pytest.approx(30.0)

    def test_box_contains_its_anchor(self):
        rng = np.random.default_rng(101)
        pts = rng.uniform(0, 200, size=(12, 2))
        dets = [Detection(float(x), float(y), 1.0) for x, y in pts]
        for det in estimate_boxes(dets, pts, GeoParams(), box_scale=2.0):
            x, y, w, h = det.box
            assert x <= det.x <= x + w
            assert y <= det.y <= y + h

    def test_inputs_not_mutated(self):
        det = Detection(5.0, 5.0, 1.0)
        estimate_boxes([det], [(5.0, 5.0)], GeoParams(), 2.0)
        assert det.box is None

    def test_point_order_irrelevant(self):
        rng = np.random.default_rng(103)
        pts = rng.uniform(0, 100, size=(8, 2))
        dets = [Detection(float(x), float(y), 1.0) for x, y in pts]
        a = estimate_boxes(dets, pts, GeoParams(), 2.0)
        b = estimate_boxes(dets, pts[rng.permutation(8)], GeoParams(), 2.0)
        for da, db in zip(a, b):
            assert da.box == pytest.approx(db.box)


class TestCountFromMap:
    def test_ground_truth_count(self):
        rng = np.random.default_rng(107)
        pts = rng.uniform(0, 127.9, size=(7, 2))
        ann = HeadAnnotation(ImageRect(128, 128), pts)
        m = render_density(geo_kernel_specs(ann), ann.rect)
        assert abs(count_from_map(m) - 7.0) <= 7e-6

    def test_zero_map(self):
        assert count_from_map(np.zeros((10, 10))) == 0.0

    def test_blend_preserves_count(self):
        rng = np.random.default_rng(109)
        pts = rng.uniform(1, 126, size=(9, 2))
        ann = HeadAnnotation(ImageRect(128, 128), pts)
        tess = voronoi_tessellate(ann.points, ann.rect)
        geo_map = render_density(geo_kernel_specs(ann), ann.rect)
        vor_map = render_density(voronoi_kernel_specs(ann, tess), ann.rect)
        blended = blend(geo_map, vor_map, 0.5)
        assert count_from_map(blended) == pytest.approx(9.0, abs=9e-6)
