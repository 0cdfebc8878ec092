"""Stratified area sampling of VPLs on the lit, nearby part of the scene.

The lit close-set triangles are put in Morton order, their areas are summed
into a prefix table ``f``, and ``[0, f(N))`` is cut into K equal strata. One
uniform draw per stratum is mapped back through the table to a triangle and
then to a point inside it, so every VPL stands for exactly ``f(N) / K`` of
surface. Its intensity is the light's power arriving on that area,

    D cos(w) / (4 pi r^2) * V * Phi,   Phi = 4 pi I (light power),

re-emitted diffusely, i.e. multiplied by albedo / pi. ``w`` and ``r`` are
measured from the sample point toward the light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..accel import Bvh, visible_batch
from ..scene import PointLight, Scene, Triangle
from .classify import ClassifiedScene
from .vpl import VplSet

MORTON_BITS = 10


def _spread_bits(v: np.ndarray) -> np.ndarray:
    """Insert two zero bits after each of the low 10 bits: b9..b0 -> b9 0 0 b8 ... 0 0 b0."""
    v = v.astype(np.uint64) & np.uint64(0x3FF)
    v = (v | (v << np.uint64(16))) & np.uint64(0x030000FF)
    v = (v | (v << np.uint64(8))) & np.uint64(0x0300F00F)
    v = (v | (v << np.uint64(4))) & np.uint64(0x030C30C3)
    v = (v | (v << np.uint64(2))) & np.uint64(0x09249249)
    return v


def morton_code(qx, qy, qz) -> np.ndarray:
    """30-bit code with bit i of x at 3i, of y at 3i+1 and of z at 3i+2."""
    return (_spread_bits(np.asarray(qx)) | (_spread_bits(np.asarray(qy)) << np.uint64(1))
            | (_spread_bits(np.asarray(qz)) << np.uint64(2)))


def quantize(points: np.ndarray) -> np.ndarray:
    """Map points onto the 1024^3 grid spanning their own bounding box."""
    lo = points.min(axis=0)
    ext = points.max(axis=0) - lo
    scale = np.where(ext > 0, (2 ** MORTON_BITS - 1) / np.where(ext > 0, ext, 1.0), 0.0)
    return np.clip(np.floor((points - lo) * scale), 0, 2 ** MORTON_BITS - 1).astype(np.uint64)


def morton_sort(scene: Scene, subset) -> np.ndarray:
    """``subset`` reordered by the Morton code of triangle centroids (stable)."""
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("morton_sort needs a non-empty subset")
    q = quantize(scene.centroids[subset])
    codes = morton_code(q[:, 0], q[:, 1], q[:, 2])
    return subset[np.argsort(codes, kind="stable")]


@dataclass(frozen=True)
class AreaPrefixTable:
    sorted_indices: np.ndarray
    cumulative: np.ndarray  # cumulative[i] = area of the first i+1 triangles

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def __len__(self) -> int:
        return len(self.sorted_indices)


def build_area_table(scene: Scene, ordered) -> AreaPrefixTable:
    ordered = np.asarray(ordered, dtype=np.int64)
    if ordered.size == 0:
        raise ValueError("area table needs at least one triangle")
    return AreaPrefixTable(ordered, np.cumsum(scene.areas[ordered]))


def lookup_g(table: AreaPrefixTable, s):
    """Position m with f(m-1) <= s < f(m), taking f(-1) = 0. Accepts scalars or arrays."""
    arr = np.asarray(s, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr >= table.total) or np.any(np.isnan(arr)):
        raise ValueError(f"lookup_g: s must lie in [0, {table.total}); caller passed {s!r}")
    m = np.searchsorted(table.cumulative, arr, side="right")
    return int(m) if m.ndim == 0 else m


def warp_to_triangle(v0, v1, v2, u1, u2) -> np.ndarray:
    """Uniform-area square-root warp; broadcasts over leading axes."""
    r = np.sqrt(u1)
    b1 = 1.0 - r
    b2 = u2 * r
    b1, b2 = np.expand_dims(b1, -1), np.expand_dims(b2, -1)
    return b1 * v0 + b2 * v1 + (1.0 - b1 - b2) * v2


def sample_point_in_triangle(tri: Triangle, u) -> tuple[np.ndarray, np.ndarray]:
    p = warp_to_triangle(np.asarray(tri.v0, float), np.asarray(tri.v1, float), np.asarray(tri.v2, float),
                         np.float64(u[0]), np.float64(u[1]))
    return p, tri.normal


def light_facing_visible(scene: Scene, bvh: Bvh, light: PointLight, subset) -> np.ndarray:
    """Members of ``subset`` whose front faces the light and whose centroid sees it."""
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        return subset
    c = scene.centroids[subset]
    facing = np.einsum("ij,ij->i", scene.normals[subset], light.position - c) > 0
    keep = subset[facing]
    if keep.size == 0:
        return keep
    vis = visible_batch(bvh, scene.centroids[keep], light.position)
    return keep[vis == 1]


def generate_patch_vpls(scene: Scene, bvh: Bvh, classified: ClassifiedScene, light: PointLight,
                        K: int, rng: np.random.Generator) -> VplSet:
    """K stratified VPLs on the light-visible close set; see the module docstring.

    Randomness: one ``(K, 3)`` draw, row k feeding stratum k (offset within
    the stratum, then the two triangle coordinates), so splitting the strata
    across workers reproduces the serial result exactly.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    lit = light_facing_visible(scene, bvh, light, classified.close_set)
    if lit.size == 0:
        return VplSet.empty(empty_close_set=True)
    table = build_area_table(scene, morton_sort(scene, lit))
    total = table.total
    u = rng.random((K, 3))
    k = np.arange(K)
    s = np.minimum((k + u[:, 0]) * (total / K), np.nextafter(total, 0.0))
    tri = table.sorted_indices[lookup_g(table, s)]
    pts = warp_to_triangle(scene.v0[tri], scene.v1[tri], scene.v2[tri], u[:, 1], u[:, 2])
    nrm = scene.normals[tri]
    to_light = light.position - pts
    r2 = np.einsum("ij,ij->i", to_light, to_light)
    cos_w = np.maximum(np.einsum("ij,ij->i", nrm, to_light), 0.0) / np.sqrt(r2)
    vis = visible_batch(bvh, pts, light.position).astype(np.float64)
    area = total / K
    incident = (area * cos_w * vis / (4.0 * math.pi * r2))[:, None] * light.power
    intensity = incident * scene.albedo[tri] / math.pi
    return VplSet(pts, nrm, intensity, "patch_close", tri, np.full(K, area),
                  {"empty_close_set": False, "lit_triangles": int(lit.size), "lit_area": total})
