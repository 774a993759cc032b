"""Procedural world generation: rectangular rooms joined by doorways, plus
optional single-cell clutter. Stands in for the empty/furnished house
variants of the original benchmark environments.

Clutter placement is conservative: a cell is occupied only if a local
flood fill proves its free neighbors stay mutually connected and the
placement does not pinch a free cell into a one-cell-wide passage (which
the disc agent could not traverse). Free space therefore remains
8-connected by construction; a global check guards the invariant anyway.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .world import WorldMap

_CONN8 = np.ones((3, 3), dtype=int)


class MapGenerationError(Exception):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    width: int = 60
    height: int = 40
    cell_size: float = 0.1
    rooms: tuple[int, int] = (1, 4)
    clutter: float = 0.0
    # 0.5 m doorways: mapping from noisy poses thickens walls by a cell, and
    # after the pipeline's radius dilation a passage survives only if the
    # raw opening is at least 5 cells
    door_cells: int = 5
    min_room: int = 6
    max_attempts: int = 20

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError("map must be at least 8x8 cells")
        if not (0.0 <= self.clutter <= 1.0):
            raise ValueError("clutter density must be in [0, 1]")
        if self.rooms[0] < 1 or self.rooms[1] < self.rooms[0]:
            raise ValueError("invalid room-count range")


def generate_map(seed: int, params: GeneratorConfig = GeneratorConfig()) -> WorldMap:
    """Deterministic map for a fixed (seed, params); raises
    MapGenerationError if no connected map emerges within the attempt bound."""
    for attempt in range(params.max_attempts):
        rng = np.random.default_rng([seed, attempt])
        occ = _build(rng, params)
        free = ~occ
        if free.sum() < 4:
            continue
        _, n_components = ndimage.label(free, structure=_CONN8)
        if n_components != 1:
            continue
        # quality bar on the disc configuration space: essentially one
        # component (tiny stranded alcoves are tolerated — scenario
        # sampling checks pairwise feasibility anyway)
        infl_free = ~ndimage.binary_dilation(occ, structure=_CONN8.astype(bool))
        if not infl_free.any():
            continue
        labels, n_infl = ndimage.label(infl_free, structure=_CONN8)
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        if sizes.max() >= 0.9 * infl_free.sum():
            return WorldMap(occ, cell_size=params.cell_size)
    raise MapGenerationError(
        f"no connected map for seed={seed} within {params.max_attempts} attempts")


def _build(rng: np.random.Generator, params: GeneratorConfig) -> np.ndarray:
    w, h = params.width, params.height
    occ = np.zeros((h, w), dtype=bool)
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True

    target_rooms = int(rng.integers(params.rooms[0], params.rooms[1] + 1))
    leaves = [(1, 1, w - 2, h - 2)]  # inclusive interior rects (x0, y0, x1, y1)
    while len(leaves) < target_rooms:
        split = _split_some_leaf(rng, occ, leaves, params)
        if not split:
            break

    if params.clutter > 0.0:
        _place_clutter(rng, occ, params)
    return occ


def _split_some_leaf(rng, occ, leaves, params) -> bool:
    min_span = 2 * params.min_room + 1  # room, wall, room
    order = sorted(range(len(leaves)),
                   key=lambda i: -(leaves[i][2] - leaves[i][0])
                   * (leaves[i][3] - leaves[i][1]))
    for i in order:
        x0, y0, x1, y1 = leaves[i]
        can_v = (x1 - x0 + 1) >= min_span  # vertical wall splits x
        can_h = (y1 - y0 + 1) >= min_span
        if not (can_v or can_h):
            continue
        if can_v and (not can_h or (x1 - x0) >= (y1 - y0)):
            wx = int(rng.integers(x0 + params.min_room, x1 - params.min_room + 1))
            occ[y0:y1 + 1, wx] = True
            gap = int(rng.integers(y0, y1 - params.door_cells + 2))
            occ[gap:gap + params.door_cells, wx] = False
            leaves[i] = (x0, y0, wx - 1, y1)
            leaves.append((wx + 1, y0, x1, y1))
        else:
            wy = int(rng.integers(y0 + params.min_room, y1 - params.min_room + 1))
            occ[wy, x0:x1 + 1] = True
            gap = int(rng.integers(x0, x1 - params.door_cells + 2))
            occ[wy, gap:gap + params.door_cells] = False
            leaves[i] = (x0, y0, x1, wy - 1)
            leaves.append((x0, wy + 1, x1, y1))
        return True
    return False


# Clutter placements are vetted against a radius-2 dilation rather than the
# agent's radius-1 configuration space: mapping from noisy poses thickens
# observed obstacles by about a cell, and passages that only exist in the
# exact configuration space would seal in the agent's map.
_CLUTTER_MARGIN = 2


def _place_clutter(rng, occ, params) -> None:
    """Drop furniture-like rectangular blocks, accepting a placement only
    when the margined configuration space (free cells of the dilated grid)
    provably stays connected in a local window. Lone-cell confetti would
    shred the configuration space once dilated by the agent radius.
    """
    h, w = occ.shape
    interior = (w - 2) * (h - 2)
    current = int(occ[1:-1, 1:-1].sum())
    to_place = int(round(params.clutter * interior)) - current
    if to_place <= 0:
        return
    grow = _CLUTTER_MARGIN
    structure = np.ones((2 * grow + 1, 2 * grow + 1), dtype=bool)
    infl = ndimage.binary_dilation(occ, structure=structure)
    placed = 0
    for _ in range(40 * to_place):
        if placed >= to_place:
            break
        bw = int(rng.integers(1, 4))
        bh = int(rng.integers(1, 4))
        ix = int(rng.integers(1, w - bw))
        iy = int(rng.integers(1, h - bh))
        block = (slice(iy, iy + bh), slice(ix, ix + bw))
        if occ[block].any():
            continue
        if _block_keeps_space_connected(occ, infl, ix, iy, bw, bh, grow):
            occ[block] = True
            infl[max(iy - grow, 0):iy + bh + grow,
                 max(ix - grow, 0):ix + bw + grow] = True
            placed += bw * bh


def _block_keeps_space_connected(occ, infl, ix, iy, bw, bh, grow,
                                 window: int = 8) -> bool:
    """Local proof that occupying a block keeps the dilated-grid free space
    connected: the free cells bordering the block's dilation must stay
    mutually connected within a window around it."""
    h, w = occ.shape
    x0 = max(ix - window, 0)
    x1 = min(ix + bw + window, w)
    y0 = max(iy - window, 0)
    y1 = min(iy + bh + window, h)
    local = infl[y0:y1, x0:x1].copy()
    # dilation of the candidate block within the window
    dx0 = max(ix - grow, 0) - x0
    dx1 = min(ix + bw + grow, w) - x0
    dy0 = max(iy - grow, 0) - y0
    dy1 = min(iy + bh + grow, h) - y0
    before = ~local.copy()
    local[dy0:dy1, dx0:dx1] = True
    free = ~local
    # margined-free cells adjacent to the dilated block that were free before
    ring = []
    for yy in range(max(dy0 - 1, 0), min(dy1 + 1, y1 - y0)):
        for xx in range(max(dx0 - 1, 0), min(dx1 + 1, x1 - x0)):
            if (dy0 <= yy < dy1) and (dx0 <= xx < dx1):
                continue
            if before[yy, xx] and free[yy, xx]:
                ring.append((yy, xx))
    if len(ring) <= 1:
        return True  # at most one access point survives: nothing to split
    labels, _ = ndimage.label(free, structure=_CONN8)
    ids = {labels[yy, xx] for yy, xx in ring}
    return len(ids) == 1
