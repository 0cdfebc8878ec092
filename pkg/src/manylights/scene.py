"""Scene description: triangles, Lambertian materials, point lights and a pinhole camera.

Scenes are read from a small line-oriented text format::

    # comment
    newmtl white 0.75 0.75 0.75
    usemtl white
    v 0 0 0
    v 1 0 0
    v 0 1 0
    f 1 2 3
    light 0.5 0.5 2 10 10 10
    camera 0 0 5  0 0 -1  0 1 0  60 256 256

Faces are 1-based and may be quads (fan-triangulated). Unknown directives are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

DEGENERATE_AREA = 1e-14


class SceneError(ValueError):
    """Base class for scene loading problems."""


class SceneParseError(SceneError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line


class SceneValidationError(SceneError):
    pass


@dataclass(frozen=True)
class Material:
    name: str
    diffuse_albedo: tuple[float, float, float]

    def __post_init__(self):
        clamped = tuple(min(1.0, max(0.0, float(c))) for c in self.diffuse_albedo)
        object.__setattr__(self, "diffuse_albedo", clamped)


@dataclass(frozen=True)
class Triangle:
    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    material_id: int

    def __post_init__(self):
        for k in ("v0", "v1", "v2"):
            object.__setattr__(self, k, np.asarray(getattr(self, k), dtype=np.float64))

    @property
    def cross(self) -> np.ndarray:
        return np.cross(self.v1 - self.v0, self.v2 - self.v0)

    @property
    def area(self) -> float:
        return 0.5 * float(np.linalg.norm(self.cross))

    @property
    def normal(self) -> np.ndarray:
        c = self.cross
        return c / np.linalg.norm(c)

    @property
    def centroid(self) -> np.ndarray:
        return (self.v0 + self.v1 + self.v2) / 3.0


@dataclass(frozen=True)
class PointLight:
    """Isotropic point light; ``intensity`` is radiant intensity in W/sr per channel."""

    position: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        object.__setattr__(self, "intensity", np.asarray(self.intensity, dtype=np.float64))
        if np.any(self.intensity < 0) or not np.all(np.isfinite(self.intensity)):
            raise SceneValidationError(f"light intensity must be finite and >= 0, got {self.intensity}")

    @property
    def power(self) -> np.ndarray:
        """Total emitted flux, 4*pi times the intensity."""
        return 4.0 * math.pi * self.intensity


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    forward: np.ndarray
    up: np.ndarray
    vertical_fov: float
    resolution: tuple[int, int]

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        fwd = np.asarray(self.forward, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        if not (0.0 < self.vertical_fov < math.pi) or not math.isfinite(self.vertical_fov):
            raise SceneValidationError(f"vertical fov must lie in (0, pi), got {self.vertical_fov}")
        w, h = (int(r) for r in self.resolution)
        if w < 1 or h < 1:
            raise SceneValidationError(f"resolution must be positive, got {self.resolution}")
        n = np.linalg.norm(fwd)
        if n == 0:
            raise SceneValidationError("camera forward vector is zero")
        fwd = fwd / n
        up = up - np.dot(up, fwd) * fwd
        n = np.linalg.norm(up)
        if n < 1e-12:
            raise SceneValidationError("camera up vector is parallel to forward")
        up = up / n
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "resolution", (w, h))

    @property
    def right(self) -> np.ndarray:
        return np.cross(self.forward, self.up)

    @property
    def width(self) -> int:
        return self.resolution[0]

    @property
    def height(self) -> int:
        return self.resolution[1]

    @property
    def tan_half_fov(self) -> float:
        return math.tan(0.5 * self.vertical_fov)

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_min: float = 0.0
    t_max: float = math.inf


def generate_primary_ray(camera: Camera, pixel: tuple[int, int], jitter: tuple[float, float] = (0.5, 0.5)) -> Ray:
    """Pinhole ray through ``pixel`` offset by ``jitter`` inside it. Row 0 is the top of the image."""
    px, py = pixel
    sx = (px + jitter[0]) / camera.width * 2.0 - 1.0
    sy = 1.0 - (py + jitter[1]) / camera.height * 2.0
    t = camera.tan_half_fov
    d = camera.forward + sx * t * camera.aspect * camera.right + sy * t * camera.up
    return Ray(camera.position.copy(), d / np.linalg.norm(d))


@dataclass(frozen=True)
class Scene:
    triangles: tuple[Triangle, ...]
    materials: tuple[Material, ...]
    lights: tuple[PointLight, ...]
    camera: Camera
    # flat arrays, filled in __post_init__
    v0: np.ndarray = field(init=False, repr=False)
    v1: np.ndarray = field(init=False, repr=False)
    v2: np.ndarray = field(init=False, repr=False)
    normals: np.ndarray = field(init=False, repr=False)
    areas: np.ndarray = field(init=False, repr=False)
    material_ids: np.ndarray = field(init=False, repr=False)
    albedo: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.triangles:
            raise SceneValidationError("scene has no triangles")
        if not self.lights:
            raise SceneValidationError("scene has no lights")
        for i, tri in enumerate(self.triangles):
            if not 0 <= tri.material_id < len(self.materials):
                raise SceneValidationError(f"triangle {i} references unknown material id {tri.material_id}")
        v0 = np.array([t.v0 for t in self.triangles], dtype=np.float64)
        v1 = np.array([t.v1 for t in self.triangles], dtype=np.float64)
        v2 = np.array([t.v2 for t in self.triangles], dtype=np.float64)
        cross = np.cross(v1 - v0, v2 - v0)
        norm = np.linalg.norm(cross, axis=1)
        bad = np.flatnonzero(~(0.5 * norm > DEGENERATE_AREA))
        if bad.size:
            raise SceneValidationError(f"triangle {int(bad[0])} is degenerate (area {0.5 * norm[bad[0]]:g})")
        mids = np.array([t.material_id for t in self.triangles], dtype=np.int64)
        mat_albedo = np.array([m.diffuse_albedo for m in self.materials], dtype=np.float64)
        for name, arr in (("v0", v0), ("v1", v1), ("v2", v2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        derived = {
            "normals": cross / norm[:, None],
            "areas": 0.5 * norm,
            "material_ids": mids,
            "albedo": mat_albedo[mids],
        }
        for name, arr in derived.items():
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.triangles)

    @property
    def centroids(self) -> np.ndarray:
        return (self.v0 + self.v1 + self.v2) / 3.0

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        pts = np.concatenate([self.v0, self.v1, self.v2])
        return pts.min(axis=0), pts.max(axis=0)

    @property
    def diagonal(self) -> float:
        lo, hi = self.bounds
        return float(np.linalg.norm(hi - lo))

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def with_camera(self, camera: Camera) -> "Scene":
        return Scene(self.triangles, self.materials, self.lights, camera)

    def with_lights(self, lights: Sequence[PointLight]) -> "Scene":
        return Scene(self.triangles, self.materials, tuple(lights), self.camera)


def _floats(parts, n, lineno, path, what):
    if len(parts) != n:
        raise SceneParseError(f"'{what}' expects {n} numbers, got {len(parts)}", lineno, path)
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise SceneParseError(f"bad number in '{what}': {exc}", lineno, path) from None
    if not all(math.isfinite(v) for v in vals):
        raise SceneParseError(f"non-finite number in '{what}'", lineno, path)
    return vals


def parse_scene(text: str, path: str | None = None, camera: Camera | None = None,
                lights: Sequence[PointLight] | None = None) -> Scene:
    vertices: list[np.ndarray] = []
    triangles: list[Triangle] = []
    tri_lines: list[int] = []
    materials: list[Material] = []
    mat_index: dict[str, int] = {}
    current_mat: int | None = None
    file_lights: list[PointLight] = []
    file_camera: Camera | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *parts = line.split()
        if head == "v":
            vertices.append(np.array(_floats(parts, 3, lineno, path, "v")))
        elif head == "f":
            if len(parts) not in (3, 4):
                raise SceneParseError(f"'f' expects 3 or 4 indices, got {len(parts)}", lineno, path)
            if current_mat is None:
                raise SceneParseError("face before any 'usemtl'", lineno, path)
            try:
                idx = [int(p) for p in parts]
            except ValueError:
                raise SceneParseError(f"bad face index in {parts}", lineno, path) from None
            for i in idx:
                if not 1 <= i <= len(vertices):
                    raise SceneParseError(f"face index {i} out of range (have {len(vertices)} vertices)",
                                          lineno, path)
            vs = [vertices[i - 1] for i in idx]
            for k in range(1, len(vs) - 1):
                triangles.append(Triangle(vs[0], vs[k], vs[k + 1], current_mat))
                tri_lines.append(lineno)
        elif head == "newmtl":
            if len(parts) != 4:
                raise SceneParseError("'newmtl' expects a name and 3 numbers", lineno, path)
            name = parts[0]
            if name in mat_index:
                raise SceneParseError(f"material '{name}' defined twice", lineno, path)
            rgb = _floats(parts[1:], 3, lineno, path, "newmtl")
            mat_index[name] = len(materials)
            materials.append(Material(name, tuple(rgb)))
        elif head == "usemtl":
            if len(parts) != 1:
                raise SceneParseError("'usemtl' expects one name", lineno, path)
            if parts[0] not in mat_index:
                raise SceneParseError(f"unknown material '{parts[0]}'", lineno, path)
            current_mat = mat_index[parts[0]]
        elif head == "light":
            vals = _floats(parts, 6, lineno, path, "light")
            if min(vals[3:]) < 0:
                raise SceneParseError("light intensity must be >= 0", lineno, path)
            file_lights.append(PointLight(np.array(vals[:3]), np.array(vals[3:])))
        elif head == "camera":
            if len(parts) != 12:
                raise SceneParseError(f"'camera' expects 12 values, got {len(parts)}", lineno, path)
            vals = _floats(parts[:10], 10, lineno, path, "camera")
            try:
                w, h = int(parts[10]), int(parts[11])
            except ValueError:
                raise SceneParseError("camera resolution must be integers", lineno, path) from None
            if file_camera is not None:
                raise SceneParseError("more than one camera", lineno, path)
            try:
                file_camera = Camera(np.array(vals[0:3]), np.array(vals[3:6]), np.array(vals[6:9]),
                                     math.radians(vals[9]), (w, h))
            except SceneValidationError as exc:
                raise SceneParseError(str(exc), lineno, path) from None
        else:
            raise SceneParseError(f"unknown directive '{head}'", lineno, path)

    for i, tri in enumerate(triangles):
        if tri.area <= DEGENERATE_AREA:
            raise SceneValidationError(
                f"triangle {i} (line {tri_lines[i]}) is degenerate: area {tri.area:g}")
    cam = camera if camera is not None else file_camera
    if cam is None:
        raise SceneValidationError("scene has no camera")
    light_list = tuple(lights) if lights is not None else tuple(file_lights)
    if not light_list:
        raise SceneValidationError("scene has no lights")
    if not triangles:
        raise SceneValidationError("scene has no triangles")
    return Scene(tuple(triangles), tuple(materials), light_list, cam)


def load_scene(path, camera: Camera | None = None, lights: Sequence[PointLight] | None = None) -> Scene:
    """Read and validate a scene file. ``camera``/``lights`` replace the ones in the file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scene file not found: {path}")
    return parse_scene(path.read_text(encoding="utf-8"), str(path), camera=camera, lights=lights)


def dump_scene(scene: Scene) -> str:
    """Serialize to the text format. Vertices are written per triangle (no sharing)."""
    out = ["# written by manylights"]
    for m in scene.materials:
        out.append("newmtl {} {!r} {!r} {!r}".format(m.name, *m.diffuse_albedo))
    current = None
    for k, tri in enumerate(scene.triangles):
        if tri.material_id != current:
            current = tri.material_id
            out.append(f"usemtl {scene.materials[current].name}")
        for v in (tri.v0, tri.v1, tri.v2):
            out.append("v {!r} {!r} {!r}".format(*map(float, v)))
        out.append(f"f {3 * k + 1} {3 * k + 2} {3 * k + 3}")
    for light in scene.lights:
        out.append("light " + " ".join(repr(float(x)) for x in (*light.position, *light.intensity)))
    cam = scene.camera
    vals = (*cam.position, *cam.forward, *cam.up, math.degrees(cam.vertical_fov))
    out.append("camera " + " ".join(repr(float(x)) for x in vals) + f" {cam.width} {cam.height}")
    return "\n".join(out) + "\n"


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(dump_scene(scene), encoding="utf-8")


def replace_camera(camera: Camera, **changes) -> Camera:
    return replace(camera, **changes)
