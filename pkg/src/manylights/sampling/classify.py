"""Split the scene into triangles near the viewer and everything else."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scene import Camera, Scene


@dataclass(frozen=True)
class ClassifiedScene:
    close_set: np.ndarray    # sorted triangle indices
    distant_set: np.ndarray  # sorted triangle indices
    threshold: float

    @property
    def n_triangles(self) -> int:
        return len(self.close_set) + len(self.distant_set)

    def close_mask(self) -> np.ndarray:
        m = np.zeros(self.n_triangles, dtype=bool)
        m[self.close_set] = True
        return m


def in_frustum(camera: Camera, points) -> np.ndarray:
    """True for points strictly in front of the camera and inside the four side planes."""
    d = np.atleast_2d(np.asarray(points, dtype=np.float64)) - camera.position
    z = d @ camera.forward
    x = d @ camera.right
    y = d @ camera.up
    t = camera.tan_half_fov
    return (z > 0) & (np.abs(x) <= z * t * camera.aspect) & (np.abs(y) <= z * t)


def classify(scene: Scene, threshold: float) -> ClassifiedScene:
    """Close iff the centroid is inside the view frustum and nearer than ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    c = scene.centroids
    near = np.linalg.norm(c - scene.camera.position, axis=1) < threshold
    close = in_frustum(scene.camera, c) & near
    return ClassifiedScene(np.flatnonzero(close), np.flatnonzero(~close), float(threshold))
