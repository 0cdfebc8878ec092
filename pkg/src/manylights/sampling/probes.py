"""Cheap image-contribution estimates for candidate VPLs.

A VPL's score is its gathered contribution (same clamp, cosines, visibility
and own-triangle exclusion as the renderer) summed over a small fixed set of
visible surface points, one per cell of an 8 x 8 grid over the image, and
reduced to luminance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..accel import STACK_SIZE, Bvh, intersect, segment_visible
from ..scene import Camera, Scene, generate_primary_ray
from .vpl import VplSet

_jit = dict(nogil=True, cache=True, error_model="numpy")
PROBE_GRID = 8


@dataclass(frozen=True)
class ProbeSet:
    position: np.ndarray  # (k, 3)
    normal: np.ndarray
    weight: np.ndarray    # (k, 3) albedo / pi
    triangle: np.ndarray
    clamp2: float

    def __len__(self) -> int:
        return len(self.position)


def make_probes(scene: Scene, bvh: Bvh, camera: Camera, clamp_distance: float, grid: int = PROBE_GRID) -> ProbeSet:
    """Hit points of the primary rays through the centres of a ``grid`` x ``grid`` block layout.

    Rays that miss or see a back face produce no probe.
    """
    pos, nrm, w, tri = [], [], [], []
    for j in range(grid):
        for i in range(grid):
            px = min(camera.width - 1, int((i + 0.5) * camera.width / grid))
            py = min(camera.height - 1, int((j + 0.5) * camera.height / grid))
            ray = generate_primary_ray(camera, (px, py))
            hit = intersect(bvh, ray)
            if hit is None or np.dot(hit.normal, ray.direction) >= 0:
                continue
            pos.append(hit.position)
            nrm.append(hit.normal)
            w.append(scene.albedo[hit.triangle_index] / math.pi)
            tri.append(hit.triangle_index)
    return ProbeSet(np.array(pos, dtype=np.float64).reshape(-1, 3), np.array(nrm, dtype=np.float64).reshape(-1, 3),
                    np.array(w, dtype=np.float64).reshape(-1, 3), np.array(tri, dtype=np.int64),
                    float(clamp_distance) ** 2)


@njit(**_jit)
def _scores(bvh, eps, p_pos, p_nrm, p_w, p_tri, b2, v_pos, v_nrm, v_int, v_tri, out):
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    for j in range(v_pos.shape[0]):
        acc = 0.0
        lum = 0.2126 * v_int[j, 0] + 0.7152 * v_int[j, 1] + 0.0722 * v_int[j, 2]
        if lum > 0.0:
            for i in range(p_pos.shape[0]):
                if p_tri[i] == v_tri[j]:
                    continue
                dx = v_pos[j, 0] - p_pos[i, 0]
                dy = v_pos[j, 1] - p_pos[i, 1]
                dz = v_pos[j, 2] - p_pos[i, 2]
                cr = p_nrm[i, 0] * dx + p_nrm[i, 1] * dy + p_nrm[i, 2] * dz
                if cr <= 0.0:
                    continue
                cv = -(v_nrm[j, 0] * dx + v_nrm[j, 1] * dy + v_nrm[j, 2] * dz)
                if cv <= 0.0:
                    continue
                if segment_visible(bvh, eps, p_pos[i, 0], p_pos[i, 1], p_pos[i, 2],
                                   v_pos[j, 0], v_pos[j, 1], v_pos[j, 2], stack) == 0:
                    continue
                r2 = dx * dx + dy * dy + dz * dz
                g = cr * cv / (r2 * max(r2, b2))
                acc += g * (0.2126 * v_int[j, 0] * p_w[i, 0] + 0.7152 * v_int[j, 1] * p_w[i, 1]
                            + 0.0722 * v_int[j, 2] * p_w[i, 2])
        out[j] = acc


def score_vpls(bvh: Bvh, probes: ProbeSet, vpls: VplSet) -> np.ndarray:
    """Luminance contribution of each VPL summed over the probes."""
    out = np.zeros(len(vpls))
    if len(vpls) and len(probes):
        _scores(bvh.arrays, bvh.epsilon, probes.position, probes.normal, probes.weight, probes.triangle,
                probes.clamp2, vpls.position, vpls.normal, vpls.intensity, vpls.triangle, out)
    return out
