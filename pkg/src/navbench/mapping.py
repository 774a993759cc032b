"""Agent-side obstacle mapping from depth scans and estimated poses.

Each cell stores the maximum number of endpoints ever binned into it in a
single integration step; a cell is occupied once that maximum exceeds the
threshold (strictly). Cells crossed by rays are flagged observed, which is
recorded for diagnostics but does not affect traversability: unobserved
cells are traversable.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import _kernels
from .world import DepthScan, Pose

# Threshold presets from the image-based mapper this module mirrors: a
# 256-ray scan deposits ~100x fewer points per cell than a 256x256 depth
# image, so the default threshold is rescaled to 2.
THRESHOLD_DEPTH_IMAGE = 128
THRESHOLD_SPARSE_CLOUD = 30
DEFAULT_THRESHOLD = 2

# Obstacle height band in meters; degenerate in the planar world, kept so a
# 3D point-cloud source can plug in unchanged.
HEIGHT_BAND = (0.1, 1.145)


class ObstacleMap:
    def __init__(self, width: int, height: int, cell_size: float = 0.1,
                 occupied_threshold: int = DEFAULT_THRESHOLD,
                 max_range: float = 4.0,
                 height_band: tuple[float, float] = HEIGHT_BAND):
        if occupied_threshold < 0:
            raise ValueError("occupied_threshold must be >= 0")
        self.width = width
        self.height = height
        self.cell_size = float(cell_size)
        self.occupied_threshold = int(occupied_threshold)
        self.max_range = float(max_range)
        self.height_band = height_band
        self.max_count = np.zeros((height, width), dtype=np.int32)
        self.observed = np.zeros((height, width), dtype=bool)
        # Live occupancy view; the planner holds a reference to this array.
        self.occupied = np.zeros((height, width), dtype=bool)
        self.dropped_endpoints = 0

    @property
    def occupied_count(self) -> int:
        return int(self.occupied.sum())

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell_size)),
                int(math.floor(y / self.cell_size)))

    def is_traversable(self, ix: int, iy: int) -> bool:
        """Occupied cells block; unobserved and out-of-extent cells are
        traversable (unknown space)."""
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            return True
        return not self.occupied[iy, ix]

    def integrate_scan(self, est_pose: Pose, scan: DepthScan) -> list[tuple[int, int]]:
        """Bin valid ray endpoints (transformed via est_pose), update the
        per-cell running maximum, and mark crossed cells observed. Returns
        the cells whose occupied status flipped."""
        counts = np.zeros((self.height, self.width), dtype=np.int32)
        visited = np.zeros((self.height, self.width), dtype=bool)
        dropped = _kernels.integrate_scan(
            scan.ranges, scan.valid, scan.bearings,
            est_pose.x, est_pose.y, est_pose.heading,
            self.cell_size, counts, visited, self.max_range)
        self.dropped_endpoints += int(dropped)
        np.maximum(self.max_count, counts, out=self.max_count)
        self.observed |= visited
        new_occ = self.max_count > self.occupied_threshold
        flipped = np.argwhere(new_occ != self.occupied)
        self.occupied[...] = new_occ
        return [(int(ix), int(iy)) for iy, ix in flipped]

    def reset(self) -> None:
        """Clear all counts and flags in place (the planner holding the
        occupancy view must be re-initialized by the caller)."""
        self.max_count[...] = 0
        self.observed[...] = False
        self.occupied[...] = False
        self.dropped_endpoints = 0

    # -- debug dumps --------------------------------------------------------
    def dump_grid(self, path) -> None:
        """Same text-grid format as world maps."""
        lines = [
            "# navbench obstacle map dump",
            f"cell_size {self.cell_size!r}",
            f"width {self.width}",
            f"height {self.height}",
        ]
        for iy in range(self.height):
            lines.append("".join("#" if self.occupied[iy, ix] else "."
                                 for ix in range(self.width)))
        Path(path).write_text("\n".join(lines) + "\n")

    def dump_counts(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            for iy in range(self.height):
                writer.writerow(self.max_count[iy, :].tolist())
