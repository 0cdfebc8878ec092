"""Per-pixel evaluation of direct light plus the VPL gather, and image I/O."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .accel import STACK_SIZE, Bvh, Hit, closest_hit, segment_visible
from .scene import Scene

INV_PI = 1.0 / math.pi
_jit = dict(nogil=True, cache=True, error_model="numpy")


@dataclass(frozen=True)
class Image:
    """Linear RGB, row-major ``(height, width, 3)`` float32; row 0 is the top of the picture."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixels, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __add__(self, other: "Image") -> "Image":
        return Image(self.pixels.astype(np.float64) + other.pixels)


@dataclass(frozen=True)
class RenderConfig:
    spp: int = 4
    clamp_distance: float | None = None  # None -> 0.01 x scene diagonal
    include_direct: bool = True
    include_indirect: bool = True
    seed: int = 0                        # pixel-jitter seed
    threads: int = 1

    def __post_init__(self):
        if self.spp < 1:
            raise ValueError("spp must be >= 1")
        if self.clamp_distance is not None and not self.clamp_distance > 0:
            raise ValueError("clamp_distance must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved_clamp(self, scene: Scene) -> float:
        return self.clamp_distance if self.clamp_distance is not None else default_clamp(scene)


def default_clamp(scene: Scene) -> float:
    return 0.01 * scene.diagonal


# ---------------------------------------------------------------------------
# jitted shading


@njit(**_jit)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(**_jit)
def pixel_random(seed, px, py, s, dim):
    """Counter-based uniform in [0, 1) keyed on (seed, pixel, sample, dimension)."""
    h = _mix64(np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15))
    h = _mix64(h ^ np.uint64(px))
    h = _mix64(h ^ np.uint64(py))
    h = _mix64(h ^ np.uint64(s))
    h = _mix64(h ^ np.uint64(dim))
    return float(h >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(**_jit)
def direct_at(bvh, eps, px, py, pz, n, lights_pos, lights_int, stack, out):
    """Adds sum over lights of I cos / r^2 * V into ``out`` (albedo/pi not applied)."""
    for k in range(lights_pos.shape[0]):
        dx = lights_pos[k, 0] - px
        dy = lights_pos[k, 1] - py
        dz = lights_pos[k, 2] - pz
        r2 = dx * dx + dy * dy + dz * dz
        c = n[0] * dx + n[1] * dy + n[2] * dz
        if c <= 0.0 or r2 == 0.0:
            continue
        if segment_visible(bvh, eps, px, py, pz, lights_pos[k, 0], lights_pos[k, 1], lights_pos[k, 2], stack) == 0:
            continue
        w = c / (r2 * math.sqrt(r2))
        out[0] += lights_int[k, 0] * w
        out[1] += lights_int[k, 1] * w
        out[2] += lights_int[k, 2] * w


@njit(**_jit)
def indirect_at(bvh, eps, px, py, pz, n, tri, vpl_pos, vpl_nrm, vpl_int, vpl_tri, b2, stack, out):
    """Adds sum over VPLs of L cos_r cos_v / max(r^2, b^2) * V into ``out`` (albedo/pi not applied)."""
    nx = n[0]
    ny = n[1]
    nz = n[2]
    for j in range(vpl_pos.shape[0]):
        if vpl_tri[j] == tri:
            continue
        dx = vpl_pos[j, 0] - px
        dy = vpl_pos[j, 1] - py
        dz = vpl_pos[j, 2] - pz
        cr = nx * dx + ny * dy + nz * dz
        if cr <= 0.0:
            continue
        cv = -(vpl_nrm[j, 0] * dx + vpl_nrm[j, 1] * dy + vpl_nrm[j, 2] * dz)
        if cv <= 0.0:
            continue
        li0 = vpl_int[j, 0]
        li1 = vpl_int[j, 1]
        li2 = vpl_int[j, 2]
        if li0 == 0.0 and li1 == 0.0 and li2 == 0.0:
            continue
        r2 = dx * dx + dy * dy + dz * dz
        if segment_visible(bvh, eps, px, py, pz, vpl_pos[j, 0], vpl_pos[j, 1], vpl_pos[j, 2], stack) == 0:
            continue
        g = cr * cv / (r2 * max(r2, b2))
        out[0] += li0 * g
        out[1] += li1 * g
        out[2] += li2 * g


@njit(**_jit)
def _render_rows(row0, row1, width, height, spp, seed, cam, bvh, eps, normals, albedo,
                 lights_pos, lights_int, vpl_pos, vpl_nrm, vpl_int, vpl_tri, b2,
                 do_direct, do_indirect, out):
    cpos, cfwd, cright, cup, tan_half, aspect = cam
    stack = np.empty(64, dtype=np.int64)
    acc = np.zeros(3)
    tmp = np.zeros(3)
    for py in range(row0, row1):
        for px in range(width):
            acc[:] = 0.0
            for s in range(spp):
                sx = (px + pixel_random(seed, px, py, s, 0)) / width * 2.0 - 1.0
                sy = 1.0 - (py + pixel_random(seed, px, py, s, 1)) / height * 2.0
                dx = cfwd[0] + sx * tan_half * aspect * cright[0] + sy * tan_half * cup[0]
                dy = cfwd[1] + sx * tan_half * aspect * cright[1] + sy * tan_half * cup[1]
                dz = cfwd[2] + sx * tan_half * aspect * cright[2] + sy * tan_half * cup[2]
                inv = 1.0 / math.sqrt(dx * dx + dy * dy + dz * dz)
                dx *= inv
                dy *= inv
                dz *= inv
                t, tri, b1, bb2 = closest_hit(bvh, cpos[0], cpos[1], cpos[2], dx, dy, dz, 0.0, math.inf, stack)
                if tri < 0:
                    continue
                n = normals[tri]
                if n[0] * dx + n[1] * dy + n[2] * dz >= 0.0:
                    continue  # back face: surfaces are one-sided
                hx = cpos[0] + t * dx
                hy = cpos[1] + t * dy
                hz = cpos[2] + t * dz
                tmp[:] = 0.0
                if do_direct:
                    direct_at(bvh, eps, hx, hy, hz, n, lights_pos, lights_int, stack, tmp)
                if do_indirect:
                    indirect_at(bvh, eps, hx, hy, hz, n, tri, vpl_pos, vpl_nrm, vpl_int, vpl_tri, b2, stack, tmp)
                for c in range(3):
                    acc[c] += tmp[c] * albedo[tri, c] * INV_PI
            for c in range(3):
                out[py, px, c] = acc[c] / spp


# ---------------------------------------------------------------------------


def _light_arrays(scene: Scene):
    pos = np.array([l.position for l in scene.lights], dtype=np.float64).reshape(-1, 3)
    inten = np.array([l.intensity for l in scene.lights], dtype=np.float64).reshape(-1, 3)
    return pos, inten


def _vpl_arrays(vpls):
    if vpls is None or len(vpls) == 0:
        z = np.zeros((0, 3))
        return z, z.copy(), z.copy(), np.zeros(0, dtype=np.int64)
    return (np.ascontiguousarray(vpls.position, dtype=np.float64),
            np.ascontiguousarray(vpls.normal, dtype=np.float64),
            np.ascontiguousarray(vpls.intensity, dtype=np.float64),
            np.ascontiguousarray(vpls.triangle, dtype=np.int64))


def _camera_tuple(scene: Scene):
    cam = scene.camera
    return (cam.position, cam.forward, cam.right, cam.up, cam.tan_half_fov, cam.aspect)


def shade_direct(scene: Scene, bvh: Bvh, hit: Hit) -> np.ndarray:
    """Outgoing radiance at ``hit`` due to the point lights."""
    lp, li = _light_arrays(scene)
    out = np.zeros(3)
    p = hit.position
    direct_at(bvh.arrays, bvh.epsilon, p[0], p[1], p[2], scene.normals[hit.triangle_index], lp, li,
              np.empty(STACK_SIZE, dtype=np.int64), out)
    return out * scene.albedo[hit.triangle_index] * INV_PI


def shade_indirect(scene: Scene, bvh: Bvh, hit: Hit, vpls, clamp_distance: float) -> np.ndarray:
    """Outgoing radiance at ``hit`` gathered from ``vpls`` with the max(r^2, b^2) clamp."""
    vp, vn, vi, vt = _vpl_arrays(vpls)
    out = np.zeros(3)
    p = hit.position
    indirect_at(bvh.arrays, bvh.epsilon, p[0], p[1], p[2], scene.normals[hit.triangle_index],
                hit.triangle_index, vp, vn, vi, vt, clamp_distance ** 2,
                np.empty(STACK_SIZE, dtype=np.int64), out)
    return out * scene.albedo[hit.triangle_index] * INV_PI


def render(scene: Scene, bvh: Bvh, vpls, config: RenderConfig = RenderConfig()) -> Image:
    """Average of ``spp`` jittered primary rays per pixel; misses and back faces are black.

    Jitter is a hash of (seed, pixel, sample), so the result does not depend on
    ``config.threads``.
    """
    cam = scene.camera
    width, height = cam.width, cam.height
    lp, li = _light_arrays(scene)
    vp, vn, vi, vt = _vpl_arrays(vpls)
    b = config.resolved_clamp(scene)
    out = np.zeros((height, width, 3), dtype=np.float64)
    args = (width, height, config.spp, config.seed, _camera_tuple(scene), bvh.arrays,
            bvh.epsilon, scene.normals, scene.albedo, lp, li, vp, vn, vi, vt, b * b,
            bool(config.include_direct), bool(config.include_indirect), out)
    if config.threads == 1:
        _render_rows(0, height, *args)
    else:
        chunk = max(1, height // (4 * config.threads))
        bounds = [(r, min(height, r + chunk)) for r in range(0, height, chunk)]
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(lambda rb: _render_rows(rb[0], rb[1], *args), bounds))
    return Image(out)


# ---------------------------------------------------------------------------
# image files


def write_pfm(image: Image, path) -> None:
    """Little-endian colour PFM. Rows are stored bottom-to-top as the format requires."""
    px = np.ascontiguousarray(image.pixels[::-1], dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(b"PF\n")
        fh.write(f"{image.width} {image.height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(px.tobytes())


def read_pfm(path) -> Image:
    data = Path(path).read_bytes()
    parts = []
    pos = 0
    while len(parts) < 4:
        end = data.index(b"\n", pos)
        tok = data[pos:end].strip()
        pos = end + 1
        if tok:
            parts.extend(tok.split())
    if parts[0] != b"PF":
        raise ValueError(f"{path}: not a colour PFM")
    width, height, scale = int(parts[1]), int(parts[2]), float(parts[3])
    dtype = "<f4" if scale < 0 else ">f4"
    expected = width * height * 3 * 4
    raw = data[pos:pos + expected]
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated PFM ({len(raw)} of {expected} bytes)")
    px = np.frombuffer(raw, dtype=dtype).reshape(height, width, 3)[::-1]
    return Image(px.astype(np.float32))


def write_png(image: Image, path, exposure: float = 1.0, gamma: float = 2.2) -> None:
    """8-bit preview: exposure scale, clip to [0, 1], then a 1/gamma power curve."""
    from PIL import Image as PILImage

    v = np.clip(image.pixels.astype(np.float64) * exposure, 0.0, 1.0) ** (1.0 / gamma)
    PILImage.fromarray((v * 255.0 + 0.5).astype(np.uint8), mode="RGB").save(path)
