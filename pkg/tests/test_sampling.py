import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manylights import rng as rngmod
from manylights.accel import build_bvh
from manylights.sampling import (AreaPrefixTable, ClassifiedScene, SamplerConfig, VplSet, build_area_table,
                                 classify, deposit_rate, calibrated_count, generate_hybrid_vpls,
                                 generate_ir_vpls, generate_metropolis_vpls, generate_patch_vpls,
                                 generate_rejection_vpls, generate_vpls, lookup_g, make_probes, morton_code,
                                 morton_sort, read_vpls, sample_point_in_triangle, score_vpls, split_budget,
                                 write_vpls)
from manylights.sampling.rejection import select_by_score
from manylights.scene import PointLight, Triangle, parse_scene
from manylights.scenes import closed_box

from .conftest import random_soup, small_scene


class ZeroRng:
    """Stand-in generator whose uniforms are all 0."""

    def random(self, shape):
        return np.zeros(shape)


# ---------------------------------------------------------------------------
# classification


def _oracle_close(scene, threshold):
    """Per-triangle angular test in a camera basis rebuilt from scratch."""
    cam = scene.camera
    f = cam.forward / np.linalg.norm(cam.forward)
    up = cam.up - (cam.up @ f) * f
    up /= np.linalg.norm(up)
    right = np.cross(f, up)
    half_v = cam.vertical_fov / 2
    half_h = math.atan(math.tan(half_v) * cam.width / cam.height)
    out = []
    for c in scene.centroids:
        d = c - cam.position
        z, x, y = d @ f, d @ right, d @ up
        inside = z > 0 and abs(math.atan2(x, z)) <= half_h and abs(math.atan2(y, z)) <= half_v
        out.append(inside and np.linalg.norm(d) < threshold)
    return np.array(out)


def test_classify_matches_oracle(fine_room):
    for frac in (0.15, 0.3, 0.5):
        t = frac * fine_room.diagonal
        cl = classify(fine_room, t)
        expect = np.flatnonzero(_oracle_close(fine_room, t))
        np.testing.assert_array_equal(cl.close_set, expect)
        assert 0 < len(cl.close_set) < len(fine_room)


def test_classify_behind_and_on_axis():
    # camera at z=5 looking down -z; one triangle on the axis at z=4 (distance 1), one behind at z=6
    body = "v -0.1 -0.1 4\nv 0.1 -0.1 4\nv 0 0.1 4\nf 1 2 3\nv -0.1 -0.1 6\nv 0.1 -0.1 6\nv 0 0.1 6\nf 4 5 6"
    s = small_scene(body)
    cl = classify(s, 2.0)
    assert list(cl.close_set) == [0]
    assert list(cl.distant_set) == [1]


def test_classify_rejects_bad_threshold(room):
    with pytest.raises(ValueError):
        classify(room, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 20.0))
def test_classify_partitions(room, threshold):
    cl = classify(room, threshold)
    both = np.concatenate([cl.close_set, cl.distant_set])
    assert sorted(both.tolist()) == list(range(len(room)))
    assert not set(cl.close_set) & set(cl.distant_set)


# ---------------------------------------------------------------------------
# Morton order


def _interleave(x, y, z):
    code = 0
    for i in range(10):
        code |= ((x >> i) & 1) << (3 * i) | ((y >> i) & 1) << (3 * i + 1) | ((z >> i) & 1) << (3 * i + 2)
    return code


def test_morton_examples():
    assert int(morton_code(0, 0, 0)) == 0
    assert int(morton_code(3, 0, 0)) == 0b1001 == 9
    assert int(morton_code(0, 1, 0)) == 2
    assert int(morton_code(0, 0, 1)) == 4
    assert int(morton_code(1023, 1023, 1023)) == 2 ** 30 - 1


def test_morton_matches_bit_loop():
    rng = np.random.default_rng(0)
    q = rng.integers(0, 1024, (2000, 3))
    codes = morton_code(q[:, 0], q[:, 1], q[:, 2])
    assert [int(c) for c in codes] == [_interleave(*map(int, r)) for r in q]


def test_morton_sort_is_permutation(fine_room):
    subset = np.arange(0, len(fine_room), 3)
    order = morton_sort(fine_room, subset)
    assert sorted(order.tolist()) == subset.tolist()


def test_morton_sort_empty_subset(room):
    with pytest.raises(ValueError):
        morton_sort(room, [])


def test_morton_locality():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        s = small_scene(random_soup(rng, 400, scale=0.2))
        idx = np.arange(len(s))
        c = s.centroids

        def mean_step(order):
            return np.linalg.norm(np.diff(c[order], axis=0), axis=1).mean()
        assert mean_step(morton_sort(s, idx)) <= mean_step(idx)


# ---------------------------------------------------------------------------
# area table and inverse lookup


def test_area_table_arithmetic():
    t = AreaPrefixTable(np.arange(3), np.cumsum([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(t.cumulative, [1, 3, 6])
    assert t.total == 6
    assert lookup_g(t, 0.5) == 0
    assert lookup_g(t, 2.5) == 1
    assert lookup_g(t, 5.999) == 2
    assert lookup_g(t, 1.0) == 1  # f(0) <= s < f(1)
    assert lookup_g(t, 0.0) == 0


def test_single_triangle_table():
    s = small_scene("v 0 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3")
    t = build_area_table(s, [0])
    np.testing.assert_array_equal(t.cumulative, [1.0])


def test_fixture_close_set_table(fine_room):
    close = classify(fine_room, 0.5 * fine_room.diagonal).close_set
    t = build_area_table(fine_room, morton_sort(fine_room, close))
    naive = 0.0
    for i in close:
        tri = fine_room.triangles[i]
        naive += 0.5 * np.linalg.norm(np.cross(np.subtract(tri.v1, tri.v0), np.subtract(tri.v2, tri.v0)))
    assert t.total == pytest.approx(naive, rel=1e-9)
    assert np.all(np.diff(t.cumulative) > 0)


@pytest.mark.parametrize("s", [-1e-9, 6.0, 7.0, float("nan")])
def test_lookup_out_of_range(s):
    t = AreaPrefixTable(np.arange(3), np.cumsum([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        lookup_g(t, s)


def test_lookup_matches_linear_scan():
    rng = np.random.default_rng(42)
    for trial in range(10_000):
        n = int(rng.integers(1, 40))
        areas = rng.uniform(1e-3, 2.0, n) if trial % 2 else rng.integers(1, 4, n).astype(float)
        t = AreaPrefixTable(np.arange(n), np.cumsum(areas))
        s = rng.uniform(0, t.total) if trial % 3 else t.cumulative[int(rng.integers(0, n))] * (trial % 5 != 0)
        if s >= t.total:
            continue
        m = 0
        while not t.cumulative[m] > s:
            m += 1
        assert lookup_g(t, s) == m


# ---------------------------------------------------------------------------
# points in triangles


def _tri():
    return Triangle((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0)


def test_warp_corners():
    tri = _tri()
    p, n = sample_point_in_triangle(tri, (0.0, 0.37))
    np.testing.assert_allclose(p, tri.v0)
    np.testing.assert_allclose(n, [0, 0, 1])
    p, _ = sample_point_in_triangle(tri, (1 - 1e-12, 0.0))
    np.testing.assert_allclose(p, tri.v2, atol=1e-6)  # u2 = 0 keeps b2 = 0: the v0-v2 edge end
    p, _ = sample_point_in_triangle(tri, (1 - 1e-12, 1 - 1e-12))
    np.testing.assert_allclose(p, tri.v1, atol=1e-6)


def test_warp_uniform_centroid():
    rng = np.random.default_rng(7)
    u = rng.random((100_000, 2))
    from manylights.sampling.patch import warp_to_triangle

    tri = _tri()
    pts = warp_to_triangle(np.array(tri.v0), np.array(tri.v1), np.array(tri.v2), u[:, 0], u[:, 1])
    np.testing.assert_allclose(pts.mean(0), tri.centroid, atol=1e-2)
    # inside the triangle
    assert np.all(pts[:, 0] >= -1e-12) and np.all(pts[:, 1] >= -1e-12) and np.all(pts.sum(1) <= 1 + 1e-12)


# ---------------------------------------------------------------------------
# patch VPLs


def _unit_patch_scene(light="0 0 1 1 1 1"):
    r = math.sqrt(2.0)
    return small_scene(f"v 0 0 0\nv {r!r} 0 0\nv 0 {r!r} 0\nf 1 2 3", light=light)


def test_patch_hand_value():
    # unit-area triangle, light of intensity 1 (power 4 pi) at distance 1 straight above the sample
    s = _unit_patch_scene()
    cl = ClassifiedScene(np.array([0]), np.array([], dtype=np.int64), 1.0)
    v = generate_patch_vpls(s, build_bvh(s), cl, s.lights[0], 1, ZeroRng())
    assert len(v) == 1
    np.testing.assert_allclose(v.position[0], [0, 0, 0])
    # D cos / (4 pi r^2) * 4 pi * albedo / pi = 1 * 1 * 1 / pi
    np.testing.assert_allclose(v.intensity[0], [1 / math.pi] * 3, rtol=1e-12)
    assert v.area[0] == pytest.approx(1.0, rel=1e-12)
    assert v.tags == ["patch_close"]


def test_patch_light_hidden_from_close_set():
    # a large sheet between the light and the only close triangle: nothing to sample
    body = ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
            "v -1 -1 0.5\nv 2 -1 0.5\nv 2 2 0.5\nv -1 2 0.5\nf 4 5 6 7")
    s = small_scene(body, light="0.3 0.3 1 1 1 1")
    cl = ClassifiedScene(np.array([0]), np.array([1]), 1.0)
    v = generate_patch_vpls(s, build_bvh(s), cl, s.lights[0], 8, np.random.default_rng(0))
    assert len(v) == 0 and v.diagnostics["empty_close_set"]


def test_patch_samples_occluded_after_centroid_test():
    # the centroid sees the light, but a small shield hides vertex v0, where every u1 = 0 sample lands
    s = small_scene("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
                    "v -0.05 -0.05 0.5\nv 0.05 -0.05 0.5\nv 0.05 0.05 0.5\nv -0.05 0.05 0.5\nf 4 5 6 7",
                    light="0 0 1 1 1 1")
    cl = ClassifiedScene(np.array([0]), np.array([1]), 1.0)
    v = generate_patch_vpls(s, build_bvh(s), cl, s.lights[0], 4, ZeroRng())
    assert len(v) == 4
    np.testing.assert_array_equal(v.intensity, 0.0)


def test_patch_equal_areas_k8(fine_room, fine_bvh):
    cl = classify(fine_room, 0.5 * fine_room.diagonal)
    v = generate_patch_vpls(fine_room, fine_bvh, cl, fine_room.lights[0], 8, np.random.default_rng(1))
    assert len(v) == 8
    assert np.all(v.area == v.diagnostics["lit_area"] / 8)
    assert np.var(v.area) == 0.0


def test_patch_strata_are_independent_rows(fine_room, fine_bvh):
    # stratum k only reads row k of the (K, 3) draw, so computing a stratum alone gives the same VPL
    cl = classify(fine_room, 0.5 * fine_room.diagonal)
    light = fine_room.lights[0]
    K = 16
    full = generate_patch_vpls(fine_room, fine_bvh, cl, light, K, np.random.default_rng(9))
    rows = np.random.default_rng(9).random((K, 3))
    from manylights.sampling.patch import light_facing_visible, warp_to_triangle

    lit = light_facing_visible(fine_room, fine_bvh, light, cl.close_set)
    table = build_area_table(fine_room, morton_sort(fine_room, lit))
    for k in (0, 5, 15):
        s = (k + rows[k, 0]) * table.total / K
        tri = table.sorted_indices[lookup_g(table, s)]
        p = warp_to_triangle(fine_room.v0[tri], fine_room.v1[tri], fine_room.v2[tri], rows[k, 1], rows[k, 2])
        np.testing.assert_array_equal(full.position[k], p)
        assert full.triangle[k] == tri


# ---------------------------------------------------------------------------
# random walks


def _solid_angle(p, tri):
    a, b, c = (np.asarray(v, float) - p for v in tri)
    la, lb, lc = map(np.linalg.norm, (a, b, c))
    num = abs(a @ np.cross(b, c))
    den = la * lb * lc + (a @ b) * lc + (a @ c) * lb + (b @ c) * la
    return 2 * math.atan2(num, den)


def test_ir_empty_cases(room, room_bvh):
    assert len(generate_ir_vpls(room, room_bvh, room.lights[0], 0, 1)) == 0
    assert len(generate_ir_vpls(room, room_bvh, room.lights[0], 500, 3, restrict_to=[])) == 0


def test_ir_single_bounce_solid_angle():
    # big triangle below the light facing it: capture fraction = solid angle / 4 pi
    verts = ((-1.5, -1.0, 0.0), (1.5, -1.0, 0.0), (0.0, 1.6, 0.0))
    body = "\n".join("v {} {} {}".format(*v) for v in verts) + "\nf 1 2 3"
    s = small_scene(body, light="0.1 0.05 0.6 1 1 1")
    light = s.lights[0]
    frac = _solid_angle(light.position, verts) / (4 * math.pi)
    assert 0.2 < frac < 0.45
    n = 100_000
    v = generate_ir_vpls(s, build_bvh(s), light, n, 1, rng=np.random.default_rng(3))
    deposited = (v.intensity * math.pi / s.albedo[v.triangle]).sum(0)  # power, per channel
    np.testing.assert_allclose(deposited / light.power, frac, rtol=0.02)
    np.testing.assert_allclose(v.intensity, 4 * math.pi / n / math.pi)  # each VPL: rho * (Phi / n) / pi


def test_ir_second_bounce_power_in_closed_box():
    # every path lands somewhere in a closed box; grey albedo rho means the second
    # bounce must carry rho * Phi in expectation (roulette reweighting is unbiased)
    s = parse_scene(closed_box(albedo=0.6))
    bvh = build_bvh(s)
    n = 100_000
    v = generate_ir_vpls(s, bvh, s.lights[0], n, 2, rng=np.random.default_rng(4))
    second = np.bincount(v.diagnostics["path_index"], minlength=n)
    first_idx = np.r_[0, np.cumsum(second)[:-1]]
    is_first = np.zeros(len(v), bool)
    is_first[first_idx[second > 0]] = True
    power = v.intensity * math.pi / 0.6
    np.testing.assert_allclose(power[is_first].sum(0), s.lights[0].power, rtol=1e-9)
    np.testing.assert_allclose(power[~is_first].sum(0), 0.6 * s.lights[0].power, rtol=0.02)


def test_ir_restriction_only_filters(fine_room, fine_bvh):
    light = fine_room.lights[0]
    cl = classify(fine_room, 0.5 * fine_room.diagonal)
    full = generate_ir_vpls(fine_room, fine_bvh, light, 3000, 3, rng=np.random.default_rng(5))
    part = generate_ir_vpls(fine_room, fine_bvh, light, 3000, 3, restrict_to=cl.distant_set,
                            rng=np.random.default_rng(5))
    keep = np.isin(full.triangle, cl.distant_set)
    np.testing.assert_array_equal(part.position, full.position[keep])
    np.testing.assert_array_equal(part.intensity, full.intensity[keep])


def test_calibrated_count():
    assert calibrated_count(100, 0.5) == 200
    assert calibrated_count(100, 0.0) == 0
    assert calibrated_count(0, 1.0) == 0


# ---------------------------------------------------------------------------
# rejection


def test_select_identical_scores():
    kept, fills, n_above = select_by_score(np.full(50, 0.1), 20)
    np.testing.assert_array_equal(kept, np.arange(20))
    assert not fills.any() and n_above == 50


def test_select_single_visible_candidate():
    scores = np.zeros(100)
    scores[37] = 2.5
    for budget in (1, 5, 100):
        kept, fills, _ = select_by_score(scores, budget)
        assert 37 in kept
        assert kept[0] == 37 and not fills[0]


def test_select_fills_best_rejected():
    scores = np.array([5.0, 0.0, 1.0, 1.0, 0.5])  # mean 1.5: only index 0 passes
    kept, fills, n_above = select_by_score(scores, 3)
    np.testing.assert_array_equal(kept, [0, 2, 3])
    np.testing.assert_array_equal(fills, [False, True, True])
    assert n_above == 1


def test_rejection_on_fixture(fine_room, fine_bvh):
    v = generate_rejection_vpls(fine_room, fine_bvh, fine_room.camera, fine_room.lights[0], 256, 1024,
                                np.random.default_rng(2))
    d = v.diagnostics
    assert len(v) == 256
    ok = (d["kept_scores"] >= d["mean_score"] * (1 - 1e-12)) | d["fill"]
    assert ok.all()
    assert set(v.tags) == {"rejection"}


def test_rejection_pilot_must_cover_budget(room, room_bvh):
    with pytest.raises(ValueError):
        generate_rejection_vpls(room, room_bvh, room.camera, room.lights[0], 10, 5, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# Metropolis


def test_metropolis_flat_target_accepts_everything(room, room_bvh):
    v = generate_metropolis_vpls(room, room_bvh, room.camera, room.lights[0], 50, 0.3,
                                 np.random.default_rng(0), burn_in=50, target=lambda vs: 1.0)
    assert v.diagnostics["acceptance_rate"] == 1.0


def test_metropolis_zero_sigma_stays_put(room, room_bvh):
    v = generate_metropolis_vpls(room, room_bvh, room.camera, room.lights[0], 40, 0.0,
                                 np.random.default_rng(1), burn_in=20)
    assert len(v) >= 40
    assert np.all(v.position == v.position[0])


def test_metropolis_power_matches_walk(fine_room, fine_bvh):
    # the normalisation makes total intensity an unbiased match for plain walks (loose check)
    light = fine_room.lights[0]
    m = generate_metropolis_vpls(fine_room, fine_bvh, fine_room.camera, light, 3000, 0.1,
                                 np.random.default_rng(2), burn_in=500)
    w = generate_ir_vpls(fine_room, fine_bvh, light, 20000, 1, rng=np.random.default_rng(2))
    ratio = m.intensity.sum() / w.intensity.sum()
    assert 0.5 < ratio < 1.5


@pytest.mark.slow
def test_metropolis_favours_high_contribution_half(fine_room, fine_bvh):
    # split triangles by the probe score of a unit VPL at their centroid; the upper half by score
    # is the high-contribution half. Metropolis should put more of its VPLs there than plain walks.
    probes = make_probes(fine_room, fine_bvh, fine_room.camera, 0.01 * fine_room.diagonal)
    unit = VplSet(fine_room.centroids + 1e-6 * fine_room.normals, fine_room.normals,
                  np.ones((len(fine_room), 3)), "metropolis", np.arange(len(fine_room)))
    score = score_vpls(fine_bvh, probes, unit)
    high = score > np.median(score)
    light = fine_room.lights[0]
    fm, fb = [], []
    for seed in range(10):
        m = generate_metropolis_vpls(fine_room, fine_bvh, fine_room.camera, light, 300, 0.1,
                                     np.random.default_rng(seed), burn_in=1000)
        b = generate_ir_vpls(fine_room, fine_bvh, light, 300, 1, rng=np.random.default_rng(seed))
        fm.append(high[m.triangle].mean())
        fb.append(high[b.triangle].mean())
    assert np.mean(fm) > np.mean(fb)


# ---------------------------------------------------------------------------
# hybrid and dispatcher


def test_split_budget():
    assert split_budget(10, [1, 1, 1]) == [4, 3, 3]
    assert split_budget(7, [3, 0, 1]) == [5, 0, 2]
    assert sum(split_budget(1001, [0.2, 0.7, 0.1])) == 1001


def test_hybrid_zero_fraction_is_restricted_walk(fine_room, fine_bvh):
    cfg = SamplerConfig(strategy="hybrid", vpl_budget=500, close_fraction=0.0, seed=3)
    out = generate_hybrid_vpls(fine_room, fine_bvh, cfg)
    cl = classify(fine_room, cfg.threshold_for(fine_room))
    light = fine_room.lights[0]
    rate = deposit_rate(fine_room, fine_bvh, light, 1, cl.distant_set,
                        rngmod.stream(3, "hybrid", 0, rngmod.CALIBRATE))
    ref = generate_ir_vpls(fine_room, fine_bvh, light, calibrated_count(500, rate), 1, cl.distant_set,
                           rngmod.stream(3, "hybrid", 0, rngmod.WALK), tag="ir_distant")
    assert out.same_as(ref)


def _all_close_scene():
    # a floor and a back wall seen from far away through a wide lens: everything is in view
    body = ("v -1 0 -1\nv 1 0 -1\nv 1 0 1\nv -1 0 1\nf 1 4 3 2\n"
            "v -1 0 -1\nv 1 0 -1\nv 1 2 -1\nv -1 2 -1\nf 5 6 7 8")
    return small_scene(body, light="0 1 0 1 1 1", camera="0 1 6 0 -0.1 -1 0 1 0 60 16 16")


def test_hybrid_full_fraction_all_close_is_patch():
    s = _all_close_scene()
    bvh = build_bvh(s)
    cfg = SamplerConfig(strategy="hybrid", vpl_budget=64, close_fraction=1.0, distance_threshold=100.0, seed=1)
    cl = classify(s, 100.0)
    assert len(cl.distant_set) == 0
    out = generate_hybrid_vpls(s, bvh, cfg)
    ref = generate_patch_vpls(s, bvh, cl, s.lights[0], 64, rngmod.stream(1, "hybrid", 0, rngmod.PATCH))
    assert out.same_as(ref)
    # with nothing distant the whole budget still goes to patches
    half = generate_hybrid_vpls(s, bvh, SamplerConfig(strategy="hybrid", vpl_budget=64, close_fraction=0.5,
                                                     distance_threshold=100.0, seed=1))
    assert len(half) == 64 and set(half.tags) == {"patch_close"}


def test_hybrid_empty_close_set_falls_back(fine_room, fine_bvh):
    cfg = SamplerConfig(strategy="hybrid", vpl_budget=400, distance_threshold=1e-3, seed=0)
    v = generate_hybrid_vpls(fine_room, fine_bvh, cfg)
    assert set(v.tags) == {"ir_distant"}
    assert abs(len(v) - 400) <= 20
    assert v.diagnostics["lights"][0]["close_fallback"]


def test_hybrid_fixture_counts(fine_room, fine_bvh):
    cfg = SamplerConfig(strategy="hybrid", vpl_budget=1000, seed=4)
    v = generate_vpls(fine_room, fine_bvh, cfg)
    assert abs(len(v) - 1000) <= 50
    assert v.count("patch_close") >= cfg.close_fraction * 0.9 * len(v)
    assert set(v.tags) <= {"patch_close", "ir_distant"}
    assert np.all(v.intensity >= 0)
    np.testing.assert_allclose(np.linalg.norm(v.normal, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("strategy", ["baseline_ir", "rejection", "metropolis", "hybrid"])
def test_generate_vpls_deterministic(fine_room, fine_bvh, strategy):
    cfg = SamplerConfig(strategy=strategy, vpl_budget=200, seed=11, metropolis_burn_in=100)
    a = generate_vpls(fine_room, fine_bvh, cfg)
    b = generate_vpls(fine_room, fine_bvh, cfg)
    assert a.same_as(b)
    c = generate_vpls(fine_room, fine_bvh, SamplerConfig(strategy=strategy, vpl_budget=200, seed=12,
                                                          metropolis_burn_in=100))
    assert not a.same_as(c)


def test_multiple_lights_share_budget(room, room_bvh):
    lights = [room.lights[0], PointLight(np.array([6.0, 2.0, 6.0]), np.array([6.0, 6.0, 6.0]))]
    s = room.with_lights(lights)
    v = generate_vpls(s, build_bvh(s), SamplerConfig(strategy="baseline_ir", vpl_budget=800, seed=0))
    assert abs(len(v) - 800) <= 40


@pytest.mark.parametrize("kw", [dict(vpl_budget=0), dict(close_fraction=1.5), dict(bounce_limit=0),
                                dict(strategy="magic"), dict(distance_threshold=-1.0),
                                dict(metropolis_mutation_sigma=0.0), dict(rejection_pilot=10)])
def test_sampler_config_validation(kw):
    with pytest.raises(ValueError):
        SamplerConfig(**kw)


def test_vpl_dump_round_trip(tmp_path, room, room_bvh):
    v = generate_vpls(room, room_bvh, SamplerConfig(strategy="hybrid", vpl_budget=100, seed=0))
    p = tmp_path / "v.txt"
    write_vpls(v, p)
    lines = p.read_text().splitlines()
    assert len(lines) == len(v)
    assert all(len(l.split()) == 10 for l in lines)
    back = read_vpls(p)
    np.testing.assert_array_equal(back.position, v.position)
    np.testing.assert_array_equal(back.intensity, v.intensity)
    assert back.tags == v.tags
