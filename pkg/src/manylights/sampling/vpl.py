"""Virtual point lights and their text dump format."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TAGS = ("patch_close", "ir_distant", "ir_baseline", "rejection", "metropolis")
_TAG_CODE = {t: i for i, t in enumerate(TAGS)}


@dataclass(frozen=True)
class Vpl:
    position: np.ndarray
    normal: np.ndarray
    intensity: np.ndarray   # RGB, already multiplied by albedo/pi
    origin_tag: str
    triangle: int


class VplSet:
    """Structure-of-arrays list of VPLs.

    Indexing and iteration yield :class:`Vpl` records; the renderer reads the
    arrays directly. ``area`` is the surface area a VPL stands for (patch
    VPLs only, NaN elsewhere). ``diagnostics`` carries sampler-specific
    bookkeeping such as scores or fallback flags and is not part of equality.
    """

    def __init__(self, position, normal, intensity, tag, triangle, area=None, diagnostics=None):
        self.position = np.ascontiguousarray(np.asarray(position, dtype=np.float64).reshape(-1, 3))
        n = len(self.position)
        self.normal = np.ascontiguousarray(np.asarray(normal, dtype=np.float64).reshape(n, 3))
        self.intensity = np.ascontiguousarray(np.asarray(intensity, dtype=np.float64).reshape(n, 3))
        if isinstance(tag, str):
            tag = np.full(n, _TAG_CODE[tag], dtype=np.int8)
        self.tag = np.asarray(tag, dtype=np.int8).reshape(n)
        self.triangle = np.ascontiguousarray(np.asarray(triangle, dtype=np.int64).reshape(n))
        self.area = np.full(n, np.nan) if area is None else np.asarray(area, dtype=np.float64).reshape(n)
        self.diagnostics = dict(diagnostics or {})

    @classmethod
    def empty(cls, **diagnostics) -> "VplSet":
        z = np.zeros((0, 3))
        return cls(z, z, z, np.zeros(0, dtype=np.int8), np.zeros(0, dtype=np.int64), diagnostics=diagnostics)

    @classmethod
    def concat(cls, parts, **diagnostics) -> "VplSet":
        parts = [p for p in parts if p is not None]
        if not parts:
            return cls.empty(**diagnostics)
        return cls(np.concatenate([p.position for p in parts]),
                   np.concatenate([p.normal for p in parts]),
                   np.concatenate([p.intensity for p in parts]),
                   np.concatenate([p.tag for p in parts]),
                   np.concatenate([p.triangle for p in parts]),
                   np.concatenate([p.area for p in parts]),
                   diagnostics)

    def __len__(self) -> int:
        return len(self.position)

    def __getitem__(self, i) -> Vpl:
        return Vpl(self.position[i].copy(), self.normal[i].copy(), self.intensity[i].copy(),
                   TAGS[self.tag[i]], int(self.triangle[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def subset(self, index) -> "VplSet":
        return VplSet(self.position[index], self.normal[index], self.intensity[index],
                      self.tag[index], self.triangle[index], self.area[index], self.diagnostics)

    def scaled(self, factor: float) -> "VplSet":
        return VplSet(self.position, self.normal, self.intensity * factor, self.tag, self.triangle,
                      self.area, self.diagnostics)

    @property
    def tags(self) -> list[str]:
        return [TAGS[t] for t in self.tag]

    def count(self, tag: str) -> int:
        return int(np.count_nonzero(self.tag == _TAG_CODE[tag]))

    def same_as(self, other: "VplSet") -> bool:
        """Bit-for-bit equality of every per-VPL array."""
        return all(np.array_equal(getattr(self, k), getattr(other, k), equal_nan=(k == "area"))
                   for k in ("position", "normal", "intensity", "tag", "triangle", "area"))


def format_vpls(vpls: VplSet) -> str:
    """One line per VPL: ``x y z nx ny nz Lr Lg Lb tag`` with round-trip precision."""
    lines = []
    for i in range(len(vpls)):
        nums = np.concatenate([vpls.position[i], vpls.normal[i], vpls.intensity[i]])
        lines.append(" ".join(repr(float(v)) for v in nums) + " " + TAGS[vpls.tag[i]])
    return "\n".join(lines) + ("\n" if lines else "")


def write_vpls(vpls: VplSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_vpls(vpls))


def read_vpls(path) -> VplSet:
    """Inverse of :func:`write_vpls`. Triangle indices are not stored and come back as -1."""
    rows, tags = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 10 or parts[9] not in _TAG_CODE:
                raise ValueError(f"{path}:{lineno}: expected 'x y z nx ny nz Lr Lg Lb tag'")
            rows.append([float(p) for p in parts[:9]])
            tags.append(_TAG_CODE[parts[9]])
    a = np.array(rows, dtype=np.float64).reshape(-1, 9)
    return VplSet(a[:, :3], a[:, 3:6], a[:, 6:9], np.array(tags, dtype=np.int8), np.full(len(a), -1))
