"""Bounding-volume hierarchy, closest-hit and shadow-ray queries.

Every query goes through :func:`ray_triangle`, the one triangle test in the
package, so the BVH and the exhaustive scan agree bit-for-bit on ``t``.

The tree is built top-down, first over groups of coplanar triangles and then
inside each group, always splitting at the median centroid of the longest
axis (stable sort, so builds are deterministic). Leaves hold at most
``LEAF_SIZE`` triangles and triangle data is stored in leaf order. Subtrees
of one group remember their plane: a shadow segment whose ends lie strictly
on the same side skips the whole group, which is what makes rooms made of
large tessellated walls cheap to test against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .scene import Ray, Scene

LEAF_SIZE = 4
STACK_SIZE = 64
SHADOW_EPSILON_SCALE = 1e-4

_jit = dict(nogil=True, cache=True, error_model="numpy")
_inline = dict(_jit, inline="always")


@dataclass(frozen=True)
class Hit:
    t: float
    triangle_index: int
    b1: float
    b2: float
    position: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True)
class Bvh:
    node_lo: np.ndarray      # (n, 3)
    node_hi: np.ndarray      # (n, 3)
    node_child: np.ndarray   # (n, 2) int64, -1 for leaves
    node_range: np.ndarray   # (n, 2) start, count into the leaf-ordered arrays
    node_plane: np.ndarray   # (n, 4) normal and offset when every triangle below is coplanar
    node_planar: np.ndarray  # (n,) bool
    prim_index: np.ndarray   # leaf-ordered -> scene triangle index
    tri_v0: np.ndarray       # leaf-ordered
    tri_e1: np.ndarray
    tri_e2: np.ndarray
    epsilon: float           # shadow-ray endpoint offset
    normals: np.ndarray      # scene order

    @property
    def arrays(self):
        """Tuple passed to the jitted kernels."""
        return (self.node_lo, self.node_hi, self.node_child, self.node_range, self.node_plane,
                self.node_planar, self.prim_index, self.tri_v0, self.tri_e1, self.tri_e2)

    @property
    def n_nodes(self) -> int:
        return self.node_lo.shape[0]


def plane_groups(scene: Scene) -> np.ndarray:
    """Label triangles lying in exactly the same oriented plane (up to rounding noise)."""
    n = scene.normals
    d = np.einsum("ij,ij->i", n, scene.v0)
    scale = max(scene.diagonal, 1e-30)
    key = np.column_stack([np.round(n * 1e9), np.round(d / scale * 1e9)])
    _, labels = np.unique(key, axis=0, return_inverse=True)
    return labels.reshape(-1)


def build_bvh(scene: Scene) -> Bvh:
    """Two-stage build: first over plane groups, then inside each group.

    Nodes whose triangles all share one plane carry that plane, which lets a
    shadow segment lying strictly on one side skip the subtree. Within a stage
    the split is the median centroid along the longest centroid axis.
    """
    v0, v1, v2 = scene.v0, scene.v1, scene.v2
    lo_t = np.minimum(np.minimum(v0, v1), v2)
    hi_t = np.maximum(np.maximum(v0, v1), v2)
    cent = scene.centroids
    labels = plane_groups(scene)
    planes = np.column_stack([scene.normals, np.einsum("ij,ij->i", scene.normals, v0)])

    groups = [np.flatnonzero(labels == g) for g in range(labels.max() + 1)]
    g_cent = np.array([0.5 * (lo_t[g].min(axis=0) + hi_t[g].max(axis=0)) for g in groups])

    node_lo, node_hi, child, rng, plane, planar = [], [], [], [], [], []
    order: list[int] = []

    def new_node(idx):
        me = len(node_lo)
        node_lo.append(lo_t[idx].min(axis=0))
        node_hi.append(hi_t[idx].max(axis=0))
        child.append([-1, -1])
        rng.append([0, 0])
        plane.append([0.0, 0.0, 0.0, 0.0])
        planar.append(False)
        return me

    def build_tris(idx: np.ndarray, pl) -> int:
        me = new_node(idx)
        if pl is not None:
            plane[me] = list(pl)
            planar[me] = True
        if idx.size <= LEAF_SIZE:
            rng[me] = [len(order), idx.size]
            order.extend(int(i) for i in idx)
            return me
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        idx = idx[np.argsort(c[:, axis], kind="stable")]
        half = idx.size // 2
        left = build_tris(idx[:half], pl)
        right = build_tris(idx[half:], pl)
        child[me] = [left, right]
        return me

    def build_groups(gids: np.ndarray) -> int:
        if gids.size == 1:
            g = groups[gids[0]]
            return build_tris(g, planes[g[0]])
        tris = np.concatenate([groups[g] for g in gids])
        if tris.size <= LEAF_SIZE:
            return build_tris(np.sort(tris), None)
        me = new_node(tris)
        c = g_cent[gids]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        gids = gids[np.argsort(c[:, axis], kind="stable")]
        half = gids.size // 2
        left = build_groups(gids[:half])
        right = build_groups(gids[half:])
        child[me] = [left, right]
        return me

    build_groups(np.arange(len(groups), dtype=np.int64))
    perm = np.array(order, dtype=np.int64)
    tv0 = np.ascontiguousarray(v0[perm])
    return Bvh(
        node_lo=np.array(node_lo, dtype=np.float64),
        node_hi=np.array(node_hi, dtype=np.float64),
        node_child=np.array(child, dtype=np.int64),
        node_range=np.array(rng, dtype=np.int64),
        node_plane=np.array(plane, dtype=np.float64),
        node_planar=np.array(planar, dtype=np.bool_),
        prim_index=perm,
        tri_v0=tv0,
        tri_e1=np.ascontiguousarray(v1[perm] - tv0),
        tri_e2=np.ascontiguousarray(v2[perm] - tv0),
        epsilon=SHADOW_EPSILON_SCALE * scene.diagonal,
        normals=scene.normals,
    )


# ---------------------------------------------------------------------------
# jitted kernels


@njit(**_inline)
def ray_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, k, t_min, t_max):
    """Moller-Trumbore against triangle ``k`` of the (v0, e1, e2) arrays, two-sided.

    Returns (t, b1, b2) with t = inf on a miss.
    """
    e1x = e1[k, 0]
    e1y = e1[k, 1]
    e1z = e1[k, 2]
    e2x = e2[k, 0]
    e2y = e2[k, 1]
    e2z = e2[k, 2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    # rays in (or within ~1e-10 rad of) the triangle's plane never hit it
    if det * det <= 1e-20 * (e1x * e1x + e1y * e1y + e1z * e1z) * (px * px + py * py + pz * pz):
        return math.inf, 0.0, 0.0
    inv = 1.0 / det
    tx = ox - v0[k, 0]
    ty = oy - v0[k, 1]
    tz = oz - v0[k, 2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return math.inf, 0.0, 0.0
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return math.inf, 0.0, 0.0
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t < t_min or t > t_max or t != t:
        return math.inf, 0.0, 0.0
    return t, u, v


@njit(**_inline)
def _safe_inv(d):
    if d == 0.0:
        return 1e300
    return 1.0 / d


@njit(**_inline)
def _box_entry(lo, hi, n, ox, oy, oz, ix, iy, iz, t_min, t_max):
    t0 = (lo[n, 0] - ox) * ix
    t1 = (hi[n, 0] - ox) * ix
    if t0 > t1:
        t0, t1 = t1, t0
    tn = max(t_min, t0)
    tf = min(t_max, t1)
    t0 = (lo[n, 1] - oy) * iy
    t1 = (hi[n, 1] - oy) * iy
    if t0 > t1:
        t0, t1 = t1, t0
    tn = max(tn, t0)
    tf = min(tf, t1)
    t0 = (lo[n, 2] - oz) * iz
    t1 = (hi[n, 2] - oz) * iz
    if t0 > t1:
        t0, t1 = t1, t0
    tn = max(tn, t0)
    tf = min(tf, t1)
    # small slack so grazing hits on flat boxes are never culled
    if tn > tf * (1.0 + 1e-12) + 1e-12:
        return math.inf
    return tn


@njit(**_jit)
def closest_hit(bvh, ox, oy, oz, dx, dy, dz, t_min, t_max, stack):
    """Returns (t, triangle_index, b1, b2); triangle_index = -1 on a miss.

    Equal-``t`` ties resolve to the smaller scene triangle index.
    """
    node_lo, node_hi, node_child, node_range, node_plane, node_planar, prim_index, tv0, te1, te2 = bvh
    ix = _safe_inv(dx)
    iy = _safe_inv(dy)
    iz = _safe_inv(dz)
    best_t = t_max
    best_i = -1
    best_b1 = 0.0
    best_b2 = 0.0
    if _box_entry(node_lo, node_hi, 0, ox, oy, oz, ix, iy, iz, t_min, best_t) == math.inf:
        return math.inf, -1, 0.0, 0.0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        left = node_child[n, 0]
        if left < 0:
            start = node_range[n, 0]
            for k in range(start, start + node_range[n, 1]):
                t, b1, b2 = ray_triangle(ox, oy, oz, dx, dy, dz, tv0, te1, te2, k, t_min, best_t)
                if t != math.inf:
                    idx = prim_index[k]
                    if t < best_t or best_i < 0 or idx < best_i:
                        best_t = t
                        best_i = idx
                        best_b1 = b1
                        best_b2 = b2
            continue
        right = node_child[n, 1]
        tl = _box_entry(node_lo, node_hi, left, ox, oy, oz, ix, iy, iz, t_min, best_t)
        tr = _box_entry(node_lo, node_hi, right, ox, oy, oz, ix, iy, iz, t_min, best_t)
        # push the far child first so the near one is popped next
        if tl <= tr:
            if tr != math.inf:
                stack[sp] = right
                sp += 1
            if tl != math.inf:
                stack[sp] = left
                sp += 1
        else:
            if tl != math.inf:
                stack[sp] = left
                sp += 1
            if tr != math.inf:
                stack[sp] = right
                sp += 1
    if best_i < 0:
        return math.inf, -1, 0.0, 0.0
    return best_t, best_i, best_b1, best_b2


@njit(**_jit)
def occluded(bvh, ox, oy, oz, dx, dy, dz, t_max, stack):
    """Any hit on the segment origin + t*dir, t in [0, t_max]."""
    node_lo, node_hi, node_child, node_range, node_plane, node_planar, prim_index, tv0, te1, te2 = bvh
    ix = _safe_inv(dx)
    iy = _safe_inv(dy)
    iz = _safe_inv(dz)
    ex = ox + t_max * dx
    ey = oy + t_max * dy
    ez = oz + t_max * dz
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        if node_planar[n]:
            nx = node_plane[n, 0]
            ny = node_plane[n, 1]
            nz = node_plane[n, 2]
            w = node_plane[n, 3]
            sa = nx * ox + ny * oy + nz * oz - w
            sb = nx * ex + ny * ey + nz * ez - w
            if (sa > 0.0 and sb > 0.0) or (sa < 0.0 and sb < 0.0):
                continue
            # the subtree lies in the plane, so only the crossing point can touch it
            if sa != sb:
                f = sa / (sa - sb)
                hx = ox + f * (ex - ox)
                hy = oy + f * (ey - oy)
                hz = oz + f * (ez - oz)
                slack = 1e-9 * (1.0 + t_max)
                if (hx < node_lo[n, 0] - slack or hx > node_hi[n, 0] + slack
                        or hy < node_lo[n, 1] - slack or hy > node_hi[n, 1] + slack
                        or hz < node_lo[n, 2] - slack or hz > node_hi[n, 2] + slack):
                    continue
        elif _box_entry(node_lo, node_hi, n, ox, oy, oz, ix, iy, iz, 0.0, t_max) == math.inf:
            continue
        left = node_child[n, 0]
        if left < 0:
            start = node_range[n, 0]
            for k in range(start, start + node_range[n, 1]):
                t, b1, b2 = ray_triangle(ox, oy, oz, dx, dy, dz, tv0, te1, te2, k, 0.0, t_max)
                if t != math.inf:
                    return True
            continue
        stack[sp] = node_child[n, 1]
        stack[sp + 1] = left
        sp += 2
    return False


@njit(**_jit)
def segment_visible(bvh, eps, ax, ay, az, bx, by, bz, stack):
    """1 if the segment a-b, shortened by ``eps`` at both ends, is unobstructed."""
    # canonical endpoint order makes the test exactly symmetric
    if bx < ax or (bx == ax and (by < ay or (by == ay and bz < az))):
        ax, ay, az, bx, by, bz = bx, by, bz, ax, ay, az
    dx = bx - ax
    dy = by - ay
    dz = bz - az
    length = math.sqrt(dx * dx + dy * dy + dz * dz)
    if length <= 2.0 * eps:
        return 1
    dx /= length
    dy /= length
    dz /= length
    if occluded(bvh, ax + eps * dx, ay + eps * dy, az + eps * dz, dx, dy, dz, length - 2.0 * eps, stack):
        return 0
    return 1


@njit(**_jit)
def closest_hit_linear(v0, e1, e2, ox, oy, oz, dx, dy, dz, t_min, t_max):
    """Exhaustive-scan oracle for :func:`closest_hit` (scene triangle order)."""
    best_t = t_max
    best_i = -1
    best_b1 = 0.0
    best_b2 = 0.0
    for k in range(v0.shape[0]):
        t, b1, b2 = ray_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, k, t_min, best_t)
        if t != math.inf and (t < best_t or best_i < 0):
            best_t, best_i, best_b1, best_b2 = t, k, b1, b2
    if best_i < 0:
        return math.inf, -1, 0.0, 0.0
    return best_t, best_i, best_b1, best_b2


@njit(**_jit)
def segment_visible_linear(v0, e1, e2, eps, ax, ay, az, bx, by, bz):
    if bx < ax or (bx == ax and (by < ay or (by == ay and bz < az))):
        ax, ay, az, bx, by, bz = bx, by, bz, ax, ay, az
    dx = bx - ax
    dy = by - ay
    dz = bz - az
    length = math.sqrt(dx * dx + dy * dy + dz * dz)
    if length <= 2.0 * eps:
        return 1
    dx /= length
    dy /= length
    dz /= length
    ox = ax + eps * dx
    oy = ay + eps * dy
    oz = az + eps * dz
    for k in range(v0.shape[0]):
        t, b1, b2 = ray_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, k, 0.0, length - 2.0 * eps)
        if t != math.inf:
            return 0
    return 1


# ---------------------------------------------------------------------------
# python-facing wrappers


def _stack():
    return np.empty(STACK_SIZE, dtype=np.int64)


@njit(**_jit)
def visible_many(bvh, eps, a, b):
    out = np.empty(a.shape[0], dtype=np.int64)
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    for i in range(a.shape[0]):
        out[i] = segment_visible(bvh, eps, a[i, 0], a[i, 1], a[i, 2], b[i, 0], b[i, 1], b[i, 2], stack)
    return out


def visible_batch(bvh: Bvh, a, b) -> np.ndarray:
    """Row-wise :func:`visible` for (n, 3) endpoint arrays; ``b`` may be a single point."""
    a = np.ascontiguousarray(np.atleast_2d(a), dtype=np.float64)
    b = np.ascontiguousarray(np.broadcast_to(np.asarray(b, dtype=np.float64), a.shape))
    return visible_many(bvh.arrays, bvh.epsilon, a, b)


def intersect(bvh: Bvh, ray: Ray) -> Hit | None:
    o, d = np.asarray(ray.origin, float), np.asarray(ray.direction, float)
    t, i, b1, b2 = closest_hit(bvh.arrays, o[0], o[1], o[2], d[0], d[1], d[2],
                               float(ray.t_min), float(ray.t_max), _stack())
    if i < 0:
        return None
    return Hit(t, int(i), b1, b2, o + t * d, bvh.normals[i].copy())


def visible(bvh: Bvh, a, b) -> int:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return int(segment_visible(bvh.arrays, bvh.epsilon, a[0], a[1], a[2], b[0], b[1], b[2], _stack()))


def intersect_linear(scene: Scene, ray: Ray) -> Hit | None:
    o, d = np.asarray(ray.origin, float), np.asarray(ray.direction, float)
    t, i, b1, b2 = closest_hit_linear(scene.v0, scene.v1 - scene.v0, scene.v2 - scene.v0,
                                      o[0], o[1], o[2], d[0], d[1], d[2],
                                      float(ray.t_min), float(ray.t_max))
    if i < 0:
        return None
    return Hit(t, int(i), b1, b2, o + t * d, scene.normals[i].copy())


def visible_linear(scene: Scene, a, b, epsilon: float | None = None) -> int:
    if epsilon is None:
        epsilon = SHADOW_EPSILON_SCALE * scene.diagonal
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return int(segment_visible_linear(scene.v0, scene.v1 - scene.v0, scene.v2 - scene.v0, epsilon,
                                      a[0], a[1], a[2], b[0], b[1], b[2]))


def iter_leaves(bvh: Bvh):
    """Yields (node, scene triangle indices) for every leaf reachable from the root."""
    todo = [0]
    while todo:
        n = todo.pop()
        left, right = bvh.node_child[n]
        if left < 0:
            s, c = bvh.node_range[n]
            yield n, bvh.prim_index[s:s + c]
        else:
            todo.extend((right, left))
