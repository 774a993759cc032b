"""Numba kernels for the per-tick hot loops: ray casting, scan binning,
scan-match scoring.

Grid convention everywhere: occupancy arrays are indexed ``occ[iy, ix]``,
cell (ix, iy) covers [ix*cs, (ix+1)*cs) x [iy*cs, (iy+1)*cs) in meters.
"""
import math

import numpy as np
from numba import njit

# Endpoints are nudged this far along the ray before binning so that a hit
# point lying exactly on a cell boundary lands inside the occupied cell.
ENDPOINT_NUDGE = 5e-4


@njit(cache=True)
def cast_rays(occ, cell_size, px, py, angles, max_range, ranges, hits):
    """DDA grid traversal (Amanatides-Woo) for a fan of rays.

    Writes the distance to the first occupied-cell boundary into ``ranges``
    and whether a hit occurred within ``max_range`` into ``hits``.
    """
    h, w = occ.shape
    ix0 = int(math.floor(px / cell_size))
    iy0 = int(math.floor(py / cell_size))
    for k in range(angles.shape[0]):
        if ix0 < 0 or ix0 >= w or iy0 < 0 or iy0 >= h:
            ranges[k] = 0.0
            hits[k] = False
            continue
        if occ[iy0, ix0]:
            ranges[k] = 0.0
            hits[k] = True
            continue
        a = angles[k]
        dx = math.cos(a)
        dy = math.sin(a)
        ix = ix0
        iy = iy0
        if dx > 0.0:
            step_x = 1
            t_max_x = ((ix + 1) * cell_size - px) / dx
            t_dx = cell_size / dx
        elif dx < 0.0:
            step_x = -1
            t_max_x = (ix * cell_size - px) / dx
            t_dx = -cell_size / dx
        else:
            step_x = 0
            t_max_x = math.inf
            t_dx = math.inf
        if dy > 0.0:
            step_y = 1
            t_max_y = ((iy + 1) * cell_size - py) / dy
            t_dy = cell_size / dy
        elif dy < 0.0:
            step_y = -1
            t_max_y = (iy * cell_size - py) / dy
            t_dy = -cell_size / dy
        else:
            step_y = 0
            t_max_y = math.inf
            t_dy = math.inf

        r = -1.0
        while True:
            if t_max_x < t_max_y:
                t = t_max_x
                ix += step_x
                t_max_x += t_dx
            elif t_max_y < t_max_x:
                t = t_max_y
                iy += step_y
                t_max_y += t_dy
            else:
                # exact corner crossing: advance both axes
                t = t_max_x
                ix += step_x
                iy += step_y
                t_max_x += t_dx
                t_max_y += t_dy
            if t > max_range:
                break
            if ix < 0 or ix >= w or iy < 0 or iy >= h:
                break
            if occ[iy, ix]:
                r = t
                break
        if r >= 0.0:
            ranges[k] = r
            hits[k] = True
        else:
            ranges[k] = max_range
            hits[k] = False


@njit(cache=True)
def integrate_scan(ranges, valid, bearings, px, py, heading, cell_size,
                   counts, visited, max_range):
    """Bin scan endpoints into ``counts`` and mark ray-crossed cells in
    ``visited``. Returns the number of endpoints dropped for falling
    outside the grid extent.
    """
    h, w = counts.shape
    dropped = 0
    for k in range(ranges.shape[0]):
        a = heading + bearings[k]
        dx = math.cos(a)
        dy = math.sin(a)
        if valid[k]:
            r_end = ranges[k] + ENDPOINT_NUDGE
            ex = px + r_end * dx
            ey = py + r_end * dy
            exi = int(math.floor(ex / cell_size))
            eyi = int(math.floor(ey / cell_size))
            if 0 <= exi < w and 0 <= eyi < h:
                counts[eyi, exi] += 1
            else:
                dropped += 1
        else:
            r_end = max_range

        # mark observed cells along the ray up to the hit (or max range)
        ix = int(math.floor(px / cell_size))
        iy = int(math.floor(py / cell_size))
        if 0 <= ix < w and 0 <= iy < h:
            visited[iy, ix] = True
        if dx > 0.0:
            step_x = 1
            t_max_x = ((ix + 1) * cell_size - px) / dx
            t_dx = cell_size / dx
        elif dx < 0.0:
            step_x = -1
            t_max_x = (ix * cell_size - px) / dx
            t_dx = -cell_size / dx
        else:
            step_x = 0
            t_max_x = math.inf
            t_dx = math.inf
        if dy > 0.0:
            step_y = 1
            t_max_y = ((iy + 1) * cell_size - py) / dy
            t_dy = cell_size / dy
        elif dy < 0.0:
            step_y = -1
            t_max_y = (iy * cell_size - py) / dy
            t_dy = -cell_size / dy
        else:
            step_y = 0
            t_max_y = math.inf
            t_dy = math.inf
        while True:
            if t_max_x < t_max_y:
                t = t_max_x
                ix += step_x
                t_max_x += t_dx
            elif t_max_y < t_max_x:
                t = t_max_y
                iy += step_y
                t_max_y += t_dy
            else:
                t = t_max_x
                ix += step_x
                iy += step_y
                t_max_x += t_dx
                t_max_y += t_dy
            if t > r_end:
                break
            if ix < 0 or ix >= w or iy < 0 or iy >= h:
                break
            visited[iy, ix] = True
    return dropped


@njit(cache=True)
def score_match_candidates(occ, cell_size, ranges, valid, bearings,
                           candidates, scores):
    """Score candidate poses by the fraction of valid scan endpoints that
    land on (within one cell of) occupied map cells. ``candidates`` is
    (n, 3): x, y, heading. The one-cell tolerance keeps the score basin
    smooth despite sub-cell and angular quantization of the candidates.
    """
    h, w = occ.shape
    for c in range(candidates.shape[0]):
        cx = candidates[c, 0]
        cy = candidates[c, 1]
        ch = candidates[c, 2]
        n_valid = 0
        hits = 0.0
        for k in range(ranges.shape[0]):
            if not valid[k]:
                continue
            n_valid += 1
            a = ch + bearings[k]
            r = ranges[k] + ENDPOINT_NUDGE
            ex = cx + r * math.cos(a)
            ey = cy + r * math.sin(a)
            exi = int(math.floor(ex / cell_size))
            eyi = int(math.floor(ey / cell_size))
            if 0 <= exi < w and 0 <= eyi < h and occ[eyi, exi]:
                hits += 1.0
                continue
            near = False
            for dy in range(-1, 2):
                yy = eyi + dy
                if yy < 0 or yy >= h:
                    continue
                for dx in range(-1, 2):
                    xx = exi + dx
                    if 0 <= xx < w and occ[yy, xx]:
                        near = True
                        break
                if near:
                    break
            if near:
                hits += 0.6
        if n_valid > 0:
            scores[c] = hits / n_valid
        else:
            scores[c] = 0.0
