from pathlib import Path

import numpy as np
import pytest

from manylights.accel import build_bvh
from manylights.scene import load_scene, parse_scene

FIXTURES = Path(__file__).parent / "fixtures"
ROOM_FILE = FIXTURES / "two_box_room.scn"
FINE_ROOM_FILE = FIXTURES / "two_box_room_fine.scn"


@pytest.fixture(scope="session")
def room():
    return load_scene(ROOM_FILE)


@pytest.fixture(scope="session")
def room_bvh(room):
    return build_bvh(room)


@pytest.fixture(scope="session")
def fine_room():
    return load_scene(FINE_ROOM_FILE)


@pytest.fixture(scope="session")
def fine_bvh(fine_room):
    return build_bvh(fine_room)


def small_scene(text_body: str, light="0 0 1 1 1 1", camera="0 0 5 0 0 -1 0 1 0 60 8 8"):
    """Scene from face/vertex lines with one white material, a light and a camera."""
    return parse_scene(f"newmtl white 1 1 1\nusemtl white\n{text_body}\nlight {light}\ncamera {camera}\n")


def random_soup(rng: np.random.Generator, n: int, scale: float = 1.0) -> str:
    lines = []
    for i in range(n):
        c = rng.uniform(-2, 2, 3)
        for _ in range(3):
            lines.append("v {:.9f} {:.9f} {:.9f}".format(*(c + rng.normal(0, 0.3 * scale, 3))))
        lines.append(f"f {3 * i + 1} {3 * i + 2} {3 * i + 3}")
    return "\n".join(lines)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
