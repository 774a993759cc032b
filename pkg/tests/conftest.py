import math

import numpy as np
import pytest

from navbench.world import Pose, WorldMap


def grid_from_rows(rows: list[str]) -> np.ndarray:
    """ASCII occupancy ('#'/'.'), row iy=0 first."""
    return np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)


def world_from_rows(rows: list[str], cell_size: float = 0.1) -> WorldMap:
    return WorldMap(grid_from_rows(rows), cell_size=cell_size)


def open_world(width: int = 40, height: int = 30, cell_size: float = 0.1) -> WorldMap:
    occ = np.zeros((height, width), dtype=bool)
    occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
    return WorldMap(occ, cell_size=cell_size)


@pytest.fixture
def empty_world() -> WorldMap:
    return open_world()


def pose(x: float, y: float, heading_deg: float = 0.0) -> Pose:
    return Pose(x, y, math.radians(heading_deg))
