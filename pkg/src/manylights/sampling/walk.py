"""Light-path tracing for instant-radiosity VPLs.

Throughput bookkeeping. Each of ``count`` paths leaves the light with power
``Phi / count`` (``Phi = 4 pi I``) in a uniformly random direction. When it
lands on a front face with albedo ``rho`` it deposits a VPL of intensity
``rho * P / pi``, where ``P`` is the power the path carries: reflected
radiance of a diffuse surface hit by power ``P`` spread over the VPL's
hemisphere. The path then survives with probability ``q = luminance(rho)``
and continues in a cosine-distributed direction. The cosine-weighted pdf
cancels the cosine and the 1/pi of the diffuse reflectance, leaving
``P <- P * rho / q``. Hitting a back face or leaving the scene ends the path,
as does reaching ``bounce_limit`` deposits.

Restricting deposits to a triangle set only suppresses the VPLs; the path
itself is traced exactly as without the restriction.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..accel import STACK_SIZE, Bvh, closest_hit
from ..scene import PointLight, Scene
from .vpl import VplSet

_jit = dict(nogil=True, cache=True, error_model="numpy")
LUMA = np.array([0.2126, 0.7152, 0.0722])


def randoms_per_path(bounce_limit: int) -> int:
    """Two for the emission direction and three (roulette + direction) per extra bounce."""
    return 2 + 3 * (bounce_limit - 1)


def sphere_directions(u: np.ndarray) -> np.ndarray:
    z = 1.0 - 2.0 * u[:, 0]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * math.pi * u[:, 1]
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


@njit(**_jit)
def trace_paths(bvh, eps, normals, albedo, light_pos, power, dirs, bounce_u, bounce_limit, allowed,
                out_pos, out_nrm, out_int, out_tri, out_path):
    """Trace every path; write deposits into the ``out_*`` buffers and return how many.

    ``out_*`` must have room for ``len(dirs) * bounce_limit`` entries.
    """
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    n_out = 0
    for i in range(dirs.shape[0]):
        ox = light_pos[0]
        oy = light_pos[1]
        oz = light_pos[2]
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        p0 = power[0]
        p1 = power[1]
        p2 = power[2]
        for b in range(bounce_limit):
            t, tri, b1, b2 = closest_hit(bvh, ox, oy, oz, dx, dy, dz, 0.0, math.inf, stack)
            if tri < 0:
                break
            nx = normals[tri, 0]
            ny = normals[tri, 1]
            nz = normals[tri, 2]
            if nx * dx + ny * dy + nz * dz >= 0.0:
                break
            hx = ox + t * dx
            hy = oy + t * dy
            hz = oz + t * dz
            r0 = albedo[tri, 0]
            r1 = albedo[tri, 1]
            r2 = albedo[tri, 2]
            if allowed[tri]:
                out_pos[n_out, 0] = hx
                out_pos[n_out, 1] = hy
                out_pos[n_out, 2] = hz
                out_nrm[n_out, 0] = nx
                out_nrm[n_out, 1] = ny
                out_nrm[n_out, 2] = nz
                out_int[n_out, 0] = r0 * p0 / math.pi
                out_int[n_out, 1] = r1 * p1 / math.pi
                out_int[n_out, 2] = r2 * p2 / math.pi
                out_tri[n_out] = tri
                out_path[n_out] = i
                n_out += 1
            if b == bounce_limit - 1:
                break
            q = min(1.0, 0.2126 * r0 + 0.7152 * r1 + 0.0722 * r2)
            if bounce_u[i, 3 * b] >= q:
                break
            p0 *= r0 / q
            p1 *= r1 / q
            p2 *= r2 / q
            # cosine-weighted direction around the normal
            u1 = bounce_u[i, 3 * b + 1]
            u2 = bounce_u[i, 3 * b + 2]
            rr = math.sqrt(u1)
            phi = 2.0 * math.pi * u2
            lx = rr * math.cos(phi)
            ly = rr * math.sin(phi)
            lz = math.sqrt(max(0.0, 1.0 - u1))
            if abs(nx) > abs(nz):
                tx, ty, tz = -ny, nx, 0.0
            else:
                tx, ty, tz = 0.0, -nz, ny
            tl = 1.0 / math.sqrt(tx * tx + ty * ty + tz * tz)
            tx *= tl
            ty *= tl
            tz *= tl
            sx = ny * tz - nz * ty
            sy = nz * tx - nx * tz
            sz = nx * ty - ny * tx
            dx = lx * tx + ly * sx + lz * nx
            dy = lx * ty + ly * sy + lz * ny
            dz = lx * tz + ly * sz + lz * nz
            ox = hx + eps * nx
            oy = hy + eps * ny
            oz = hz + eps * nz
    return n_out


def allowed_mask(scene: Scene, restrict_to) -> np.ndarray:
    if restrict_to is None:
        return np.ones(len(scene), dtype=np.bool_)
    m = np.zeros(len(scene), dtype=np.bool_)
    m[np.asarray(list(restrict_to) if not isinstance(restrict_to, np.ndarray) else restrict_to,
                 dtype=np.int64)] = True
    return m


def trace(scene: Scene, bvh: Bvh, light: PointLight, dirs: np.ndarray, bounce_u: np.ndarray,
          bounce_limit: int, power_per_path, allowed: np.ndarray):
    """Run :func:`trace_paths` on explicit path randoms; returns arrays of the deposits."""
    n = len(dirs)
    cap = n * bounce_limit
    pos = np.empty((cap, 3))
    nrm = np.empty((cap, 3))
    inten = np.empty((cap, 3))
    tri = np.empty(cap, dtype=np.int64)
    path = np.empty(cap, dtype=np.int64)
    bounce_u = np.ascontiguousarray(bounce_u.reshape(n, max(1, 3 * (bounce_limit - 1))))
    k = trace_paths(bvh.arrays, bvh.epsilon, scene.normals, scene.albedo, np.asarray(light.position, float),
                    np.asarray(power_per_path, float), np.ascontiguousarray(dirs), bounce_u,
                    bounce_limit, allowed, pos, nrm, inten, tri, path)
    return pos[:k], nrm[:k], inten[:k], tri[:k], path[:k]


def path_randoms(rng: np.random.Generator, count: int, bounce_limit: int):
    u = rng.random((count, randoms_per_path(bounce_limit)))
    return sphere_directions(u[:, :2]), u[:, 2:] if bounce_limit > 1 else np.zeros((count, 1))


def generate_ir_vpls(scene: Scene, bvh: Bvh, light: PointLight, count: int, bounce_limit: int,
                     restrict_to=None, rng: np.random.Generator | None = None,
                     tag: str = "ir_baseline") -> VplSet:
    """VPLs deposited by ``count`` random-walk paths from ``light``.

    Path i uses row i of a single ``(count, 2 + 3 (bounce_limit - 1))`` draw.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if bounce_limit < 1:
        raise ValueError("bounce_limit must be >= 1")
    allowed = allowed_mask(scene, restrict_to)
    if count == 0 or not allowed.any():
        return VplSet.empty(paths=count)
    rng = rng if rng is not None else np.random.default_rng(0)
    dirs, bu = path_randoms(rng, count, bounce_limit)
    pos, nrm, inten, tri, path = trace(scene, bvh, light, dirs, bu, bounce_limit, light.power / count, allowed)
    return VplSet(pos, nrm, inten, tag, tri, diagnostics={"paths": count, "path_index": path})


def deposit_rate(scene: Scene, bvh: Bvh, light: PointLight, bounce_limit: int, restrict_to,
                 rng: np.random.Generator, pilot_paths: int = 4096) -> float:
    """Mean number of deposits per emitted path, estimated from ``pilot_paths`` paths."""
    allowed = allowed_mask(scene, restrict_to)
    if not allowed.any():
        return 0.0
    dirs, bu = path_randoms(rng, pilot_paths, bounce_limit)
    pos = trace(scene, bvh, light, dirs, bu, bounce_limit, np.ones(3), allowed)[0]
    return len(pos) / pilot_paths


def calibrated_count(target: int, rate: float) -> int:
    """Emission count expected to yield ``target`` deposits at ``rate`` deposits per path."""
    if target <= 0 or rate <= 0:
        return 0
    return max(1, int(round(target / rate)))
