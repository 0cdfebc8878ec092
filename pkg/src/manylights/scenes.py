"""Procedural test scenes written in the text scene format."""

from __future__ import annotations

import numpy as np

ROOM = (8.0, 3.0, 8.0)
# (x0, z0, x1, z1, height): a desk in the back-left corner and a cabinet across the room
BOXES = ((0.3, 0.3, 1.5, 1.1, 0.75), (5.5, 5.5, 6.5, 6.5, 1.6))
# a bare desk lamp 35 cm above the desk top
LIGHT = ((0.9, 1.1, 0.7), (2.0, 2.0, 2.0))
# looks down at the desk corner from about 2 m away
CORNER_CAMERA = ((2.2, 1.5, 2.0), (-1.3, -0.75, -1.3), (0.0, 1.0, 0.0), 50.0)
OVERVIEW_CAMERA = ((4.0, 1.6, 7.9), (0.0, -0.1, -1.0), (0.0, 1.0, 0.0), 75.0)
# tessellation of the acceptance scene: 0.5 m wall cells, boxes cut 3 x 3 per face
FINE_SUBDIV = (16, 3)


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.nv = 0

    def quad(self, p0, p1, p2, p3, n: int) -> None:
        """Quad p0-p1-p2-p3 (counter-clockwise seen from the front) split into an n x n grid."""
        p0, p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p0, p1, p2, p3))
        base = self.nv + 1
        for j in range(n + 1):
            for i in range(n + 1):
                u, v = i / n, j / n
                p = (1 - u) * (1 - v) * p0 + u * (1 - v) * p1 + u * v * p2 + (1 - u) * v * p3
                self.lines.append("v {:.6f} {:.6f} {:.6f}".format(*p))
        self.nv += (n + 1) ** 2
        for j in range(n):
            for i in range(n):
                a = base + j * (n + 1) + i
                self.lines.append(f"f {a} {a + 1} {a + n + 2} {a + n + 1}")


def two_box_room(wall_subdiv: int = 1, box_subdiv: int = 1, camera=CORNER_CAMERA,
                 resolution=(256, 256), closed_boxes: bool = False, room=ROOM, boxes=BOXES,
                 light=LIGHT) -> str:
    """Closed room with a red left wall, two white boxes standing on the floor and one point light.

    With no subdivision this is 12 wall triangles plus 20 box triangles (boxes
    have no bottom face).
    """
    X, Y, Z = room
    w = _Writer()
    out = ["# two-box room", "newmtl white 0.75 0.75 0.75", "newmtl red 0.75 0.2 0.15"]
    n = wall_subdiv
    w.lines.append("usemtl white")
    w.quad((0, 0, 0), (0, 0, Z), (X, 0, Z), (X, 0, 0), n)          # floor, +y
    w.quad((0, Y, 0), (X, Y, 0), (X, Y, Z), (0, Y, Z), n)          # ceiling, -y
    w.quad((0, 0, 0), (X, 0, 0), (X, Y, 0), (0, Y, 0), n)          # back wall z=0, +z
    w.quad((0, 0, Z), (0, Y, Z), (X, Y, Z), (X, 0, Z), n)          # front wall z=Z, -z
    w.quad((X, 0, 0), (X, 0, Z), (X, Y, Z), (X, Y, 0), n)          # right wall x=X, -x
    w.lines.append("usemtl red")
    w.quad((0, 0, 0), (0, Y, 0), (0, Y, Z), (0, 0, Z), n)          # left wall x=0, +x
    w.lines.append("usemtl white")
    m = box_subdiv
    for x0, z0, x1, z1, h in boxes:
        w.quad((x0, h, z0), (x0, h, z1), (x1, h, z1), (x1, h, z0), m)    # top, +y
        w.quad((x0, 0, z1), (x1, 0, z1), (x1, h, z1), (x0, h, z1), m)    # +z
        w.quad((x1, 0, z0), (x0, 0, z0), (x0, h, z0), (x1, h, z0), m)    # -z
        w.quad((x1, 0, z1), (x1, 0, z0), (x1, h, z0), (x1, h, z1), m)    # +x
        w.quad((x0, 0, z0), (x0, 0, z1), (x0, h, z1), (x0, h, z0), m)    # -x
        if closed_boxes:
            w.quad((x0, 0, z0), (x1, 0, z0), (x1, 0, z1), (x0, 0, z1), m)  # -y
    out += w.lines
    (lx, ly, lz), (lr, lg, lb) = light
    out.append(f"light {lx} {ly} {lz} {lr} {lg} {lb}")
    (px, py, pz), (fx, fy, fz), (ux, uy, uz), fov = camera
    out.append(f"camera {px} {py} {pz} {fx} {fy} {fz} {ux} {uy} {uz} {fov} {resolution[0]} {resolution[1]}")
    return "\n".join(out) + "\n"


def closed_box(size: float = 2.0, subdiv: int = 4, light=((1.0, 1.3, 1.0), (1.0, 1.0, 1.0)),
               albedo: float = 0.7, resolution=(64, 64), blocker=None) -> str:
    """Closed cube [0, size]^3 with inward normals and a camera near one wall.

    ``blocker = ((x0, y0, z0), (x1, y1, z1))`` adds a floating closed box that
    casts a shadow.
    """
    s = size
    w = _Writer()
    w.quad((0, 0, 0), (0, 0, s), (s, 0, s), (s, 0, 0), subdiv)
    w.quad((0, s, 0), (s, s, 0), (s, s, s), (0, s, s), subdiv)
    w.quad((0, 0, 0), (s, 0, 0), (s, s, 0), (0, s, 0), subdiv)
    w.quad((0, 0, s), (0, s, s), (s, s, s), (s, 0, s), subdiv)
    w.quad((s, 0, 0), (s, 0, s), (s, s, s), (s, s, 0), subdiv)
    w.quad((0, 0, 0), (0, s, 0), (0, s, s), (0, 0, s), subdiv)
    if blocker is not None:
        (x0, y0, z0), (x1, y1, z1) = blocker
        w.quad((x0, y1, z0), (x0, y1, z1), (x1, y1, z1), (x1, y1, z0), 2)  # +y
        w.quad((x0, y0, z0), (x1, y0, z0), (x1, y0, z1), (x0, y0, z1), 2)  # -y
        w.quad((x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1), 2)  # +z
        w.quad((x1, y0, z0), (x0, y0, z0), (x0, y1, z0), (x1, y1, z0), 2)  # -z
        w.quad((x1, y0, z1), (x1, y0, z0), (x1, y1, z0), (x1, y1, z1), 2)  # +x
        w.quad((x0, y0, z0), (x0, y0, z1), (x0, y1, z1), (x0, y1, z0), 2)  # -x
    (lx, ly, lz), (lr, lg, lb) = light
    out = ["# closed diffuse box", f"newmtl wall {albedo} {albedo} {albedo}", "usemtl wall"]
    out += w.lines
    out.append(f"light {lx} {ly} {lz} {lr} {lg} {lb}")
    out.append(f"camera {0.5 * s} {0.5 * s} {0.95 * s} 0 0 -1 0 1 0 70 {resolution[0]} {resolution[1]}")
    return "\n".join(out) + "\n"
