"""Incremental shortest-path planning on the 8-connected grid.

Cells are (ix, iy) tuples over an occupancy array indexed [iy, ix]; axis
edges cost 1 and diagonal edges sqrt(2), in cell units. Unknown cells are
the caller's concern: the planner sees only a boolean occupancy view and
treats False as traversable.

By default a diagonal move requires both adjacent axis cells to be
traversable, so paths never squeeze between two diagonally-touching
obstacles (the disc agent could not follow such a path).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

SQRT2 = math.sqrt(2.0)

# Fixed successor order for deterministic tie-breaking: E, NE, N, NW, W, SW, S, SE
NEIGHBOR_ORDER = (
    (1, 0, 1.0), (1, 1, SQRT2), (0, 1, 1.0), (-1, 1, SQRT2),
    (-1, 0, 1.0), (-1, -1, SQRT2), (0, -1, 1.0), (1, -1, SQRT2),
)

INF = math.inf

# Queue keys are sums of unit/sqrt(2) costs and the octile heuristic;
# logically-equal keys can differ in the last float bits depending on
# summation order. The expansion cutoff is slackened by this epsilon so
# such ties are always processed (a few extra pops, never a wrong cost).
KEY_EPS = 1e-6


class NoPathError(Exception):
    """Raised by callers that require a path; planner APIs return None."""


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Octile distance: exact shortest-path length on an obstacle-free
    8-connected grid, consistent for the unit/sqrt(2) metric."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if dx < dy:
        dx, dy = dy, dx
    return dx + (SQRT2 - 1.0) * dy


class PlanGraph:
    """Live 8-connected view over a boolean occupancy array."""

    def __init__(self, occupied: np.ndarray, allow_corner_cutting: bool = False):
        if occupied.ndim != 2:
            raise ValueError("occupancy must be 2D")
        self.occupied = occupied
        self.height, self.width = occupied.shape
        self.allow_corner_cutting = allow_corner_cutting

    def traversable(self, ix: int, iy: int) -> bool:
        return (0 <= ix < self.width and 0 <= iy < self.height
                and not self.occupied[iy, ix])

    def edge_cost(self, ax: int, ay: int, bx: int, by: int) -> float:
        """Cost of the directed edge a->b; inf when blocked."""
        if not (self.traversable(ax, ay) and self.traversable(bx, by)):
            return INF
        dx = bx - ax
        dy = by - ay
        if dx != 0 and dy != 0:
            if not self.allow_corner_cutting:
                if self.occupied[ay, bx] or self.occupied[by, ax]:
                    return INF
            return SQRT2
        return 1.0


@dataclass
class PlanPath:
    """Cell path from start to goal with its total cost in cell units."""

    cells: list[tuple[int, int]]
    cost: float

    def to_points(self, cell_size: float) -> np.ndarray:
        pts = np.empty((len(self.cells), 2))
        for i, (ix, iy) in enumerate(self.cells):
            pts[i, 0] = (ix + 0.5) * cell_size
            pts[i, 1] = (iy + 0.5) * cell_size
        return pts


def nearest_traversable(graph: PlanGraph, cell: tuple[int, int]) -> tuple[int, int] | None:
    """Deterministic re-seed for occupied cells: the smallest flat-index
    traversable cell within an expanding Chebyshev ring."""
    cx, cy = cell
    if graph.traversable(cx, cy):
        return (cx, cy)
    max_r = max(graph.width, graph.height)
    for r in range(1, max_r):
        best = None
        x0, x1 = cx - r, cx + r
        y0, y1 = cy - r, cy + r
        for iy in range(y0, y1 + 1):
            if iy == y0 or iy == y1:
                xs = range(x0, x1 + 1)
            else:
                xs = (x0, x1)
            for ix in xs:
                if graph.traversable(ix, iy):
                    idx = iy * graph.width + ix
                    if best is None or idx < best[0]:
                        best = (idx, (ix, iy))
        if best is not None:
            return best[1]
    return None


class DStarLite:
    """D* Lite over a live PlanGraph.

    Maintains g/rhs values and a priority queue keyed by
    (min(g,rhs) + h(start, .) + km, min(g,rhs)); km accumulates
    h(old_start, new_start) whenever the start moves so stale queue keys
    remain valid lower bounds. The first compute() behaves like A*; later
    computes repair only the vertices affected by reported cell flips.
    """

    def __init__(self, graph: PlanGraph, start: tuple[int, int],
                 goal: tuple[int, int]):
        if not graph.traversable(*start):
            raise ValueError(f"start cell {start} is not traversable")
        self.graph = graph
        self.start = start
        self.goal = goal
        n = graph.width * graph.height
        self._g = np.full(n, INF)
        self._rhs = np.full(n, INF)
        self._km = 0.0
        self._heap: list[tuple[float, float, int]] = []
        self._key_of: dict[int, tuple[float, float]] = {}
        gi = self._idx(goal)
        self._rhs[gi] = 0.0
        self._push(gi, self._key(gi))
        self.expansions = 0  # processed vertex expansions, cumulative

    # -- indexing ----------------------------------------------------------
    def _idx(self, cell: tuple[int, int]) -> int:
        return cell[1] * self.graph.width + cell[0]

    def _cell(self, idx: int) -> tuple[int, int]:
        w = self.graph.width
        return (idx % w, idx // w)

    # -- queue -------------------------------------------------------------
    def _key(self, idx: int) -> tuple[float, float]:
        m = self._rhs[idx]
        g = self._g[idx]
        if g < m:
            m = g
        if m == INF:
            return (INF, INF)
        w = self.graph.width
        h = octile((idx % w, idx // w), self.start)
        return (m + h + self._km, m)

    def _push(self, idx: int, key: tuple[float, float]) -> None:
        self._key_of[idx] = key
        heapq.heappush(self._heap, (key[0], key[1], idx))

    def _update_vertex(self, idx: int) -> None:
        if self._g[idx] != self._rhs[idx]:
            self._push(idx, self._key(idx))
        else:
            self._key_of.pop(idx, None)

    def _recompute_rhs(self, idx: int) -> None:
        gi = self._idx(self.goal)
        if idx == gi:
            return
        graph = self.graph
        w = graph.width
        ix = idx % w
        iy = idx // w
        best = INF
        for dx, dy, c in NEIGHBOR_ORDER:
            cand = graph.edge_cost(ix, iy, ix + dx, iy + dy)
            if cand == INF:
                continue
            cand += self._g[(iy + dy) * w + (ix + dx)]
            if cand < best:
                best = cand
        self._rhs[idx] = best

    # -- core --------------------------------------------------------------
    def _compute_shortest_path(self) -> None:
        graph = self.graph
        w = graph.width
        si = self._idx(self.start)
        gi = self._idx(self.goal)
        heap = self._heap
        key_of = self._key_of
        g = self._g
        rhs = self._rhs
        while True:
            # top valid entry under lazy deletion
            top = None
            while heap:
                k1, k2, u = heap[0]
                cur = key_of.get(u)
                if cur is not None and cur[0] == k1 and cur[1] == k2:
                    top = (k1, k2, u)
                    break
                heapq.heappop(heap)
            sk = self._key(si)
            if top is None:
                break
            k1, k2, u = top
            if not (k1 < sk[0] + KEY_EPS or rhs[si] != g[si]):
                break
            heapq.heappop(heap)
            k_new = self._key(u)
            if (k1, k2) < k_new:
                self._push(u, k_new)
                continue
            del key_of[u]
            self.expansions += 1
            ux = u % w
            uy = u // w
            if g[u] > rhs[u]:
                g[u] = rhs[u]
                gu = g[u]
                for dx, dy, c in NEIGHBOR_ORDER:
                    sx = ux + dx
                    sy = uy + dy
                    cost = graph.edge_cost(sx, sy, ux, uy)
                    if cost == INF:
                        continue
                    s = sy * w + sx
                    if s != gi and rhs[s] > cost + gu:
                        rhs[s] = cost + gu
                        self._update_vertex(s)
            else:
                g[u] = INF
                self._recompute_rhs(u)
                self._update_vertex(u)
                for dx, dy, c in NEIGHBOR_ORDER:
                    sx = ux + dx
                    sy = uy + dy
                    if 0 <= sx < w and 0 <= sy < graph.height:
                        s = sy * w + sx
                        if s != gi:
                            self._recompute_rhs(s)
                        self._update_vertex(s)

    def compute(self) -> PlanPath | None:
        """Bring the start to consistency and extract the optimal path, or
        return None when the goal is unreachable on the current map."""
        self._compute_shortest_path()
        si = self._idx(self.start)
        if self._g[si] == INF:
            return None
        return self._extract_path()

    def _extract_path(self) -> PlanPath | None:
        graph = self.graph
        w = graph.width
        g = self._g
        cells = [self.start]
        cost = 0.0
        cx, cy = self.start
        limit = graph.width * graph.height + 1
        while (cx, cy) != self.goal:
            best = INF
            best_cell = None
            best_edge = 0.0
            for dx, dy, c in NEIGHBOR_ORDER:
                nx = cx + dx
                ny = cy + dy
                ec = graph.edge_cost(cx, cy, nx, ny)
                if ec == INF:
                    continue
                cand = ec + g[ny * w + nx]
                if cand < best:
                    best = cand
                    best_cell = (nx, ny)
                    best_edge = ec
            if best_cell is None or best == INF:
                return None  # map changed under our feet; report NoPath
            cells.append(best_cell)
            cost += best_edge
            cx, cy = best_cell
            if len(cells) > limit:
                raise RuntimeError("path extraction did not terminate")
        return PlanPath(cells=cells, cost=cost)

    def update_cells(self, changed) -> None:
        """Repair rhs values after the listed cells flipped traversability."""
        gi = self._idx(self.goal)
        w = self.graph.width
        h = self.graph.height
        affected = set()
        for cx, cy in changed:
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    nx = cx + dx
                    ny = cy + dy
                    if 0 <= nx < w and 0 <= ny < h:
                        affected.add(ny * w + nx)
        for idx in affected:
            if idx != gi:
                self._recompute_rhs(idx)
            self._update_vertex(idx)

    def set_start(self, new_start: tuple[int, int]) -> tuple[int, int]:
        """Move the start, bumping km so stale queue keys stay lower bounds.
        An occupied start is re-seeded to the nearest traversable cell;
        returns the start actually used."""
        if not self.graph.traversable(*new_start):
            reseeded = nearest_traversable(self.graph, new_start)
            if reseeded is None:
                raise ValueError("no traversable cell to re-seed the start")
            new_start = reseeded
        self._km += octile(self.start, new_start)
        self.start = new_start
        return new_start


# ---------------------------------------------------------------------------
# From-scratch searches: the Dijkstra oracle and an A* expansion counter.

def _edge_arrays(occupied: np.ndarray, allow_corner_cutting: bool):
    """Vectorized directed edge list (rows, cols, weights) of the grid graph."""
    h, w = occupied.shape
    free = ~occupied
    idx = np.arange(h * w).reshape(h, w)
    rows = []
    cols = []
    data = []

    def add(src_mask, src_idx, dst_idx, weight):
        m = src_mask.ravel()
        rows.append(src_idx.ravel()[m])
        cols.append(dst_idx.ravel()[m])
        data.append(np.full(int(m.sum()), weight))

    # E: (ix, iy) -> (ix+1, iy)
    ok = free[:, :-1] & free[:, 1:]
    add(ok, idx[:, :-1], idx[:, 1:], 1.0)
    # N: (ix, iy) -> (ix, iy+1)
    ok = free[:-1, :] & free[1:, :]
    add(ok, idx[:-1, :], idx[1:, :], 1.0)
    # NE: (ix, iy) -> (ix+1, iy+1)
    ok = free[:-1, :-1] & free[1:, 1:]
    if not allow_corner_cutting:
        ok = ok & free[:-1, 1:] & free[1:, :-1]
    add(ok, idx[:-1, :-1], idx[1:, 1:], SQRT2)
    # NW: (ix, iy) -> (ix-1, iy+1)
    ok = free[:-1, 1:] & free[1:, :-1]
    if not allow_corner_cutting:
        ok = ok & free[:-1, :-1] & free[1:, 1:]
    add(ok, idx[:-1, 1:], idx[1:, :-1], SQRT2)

    return np.concatenate(rows), np.concatenate(cols), np.concatenate(data)


def dijkstra_cost(occupied: np.ndarray, start: tuple[int, int],
                  goal: tuple[int, int],
                  allow_corner_cutting: bool = False) -> float | None:
    """Exact shortest-path cost oracle (no heuristic), or None when
    disconnected. Backed by scipy's compiled Dijkstra on the same graph
    semantics as PlanGraph."""
    h, w = occupied.shape
    graph = PlanGraph(occupied, allow_corner_cutting)
    if not (graph.traversable(*start) and graph.traversable(*goal)):
        return None
    if start == goal:
        return 0.0
    rows, cols, data = _edge_arrays(occupied, allow_corner_cutting)
    n = h * w
    mat = coo_matrix((data, (rows, cols)), shape=(n, n))
    dist = _csgraph_dijkstra(mat.tocsr(), directed=False,
                             indices=start[1] * w + start[0])
    d = float(dist[goal[1] * w + goal[0]])
    return None if math.isinf(d) else d


def uniform_cost_search(occupied: np.ndarray, start: tuple[int, int],
                        goal: tuple[int, int],
                        allow_corner_cutting: bool = False) -> float | None:
    """Plain heapq Dijkstra; readable reference used to validate the
    vectorized oracle on small grids."""
    graph = PlanGraph(occupied, allow_corner_cutting)
    if not (graph.traversable(*start) and graph.traversable(*goal)):
        return None
    dist = {start: 0.0}
    heap = [(0.0, start)]
    closed = set()
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal:
            return d
        closed.add(cell)
        cx, cy = cell
        for dx, dy, _c in NEIGHBOR_ORDER:
            nb = (cx + dx, cy + dy)
            ec = graph.edge_cost(cx, cy, nb[0], nb[1])
            if ec == INF:
                continue
            nd = d + ec
            if nd < dist.get(nb, INF):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return None


def astar_cost(occupied: np.ndarray, start: tuple[int, int],
               goal: tuple[int, int],
               allow_corner_cutting: bool = False) -> tuple[float | None, int]:
    """From-scratch A* with the octile heuristic. Returns (cost, expansions);
    the expansion count is the baseline the incremental planner is measured
    against."""
    graph = PlanGraph(occupied, allow_corner_cutting)
    if not (graph.traversable(*start) and graph.traversable(*goal)):
        return None, 0
    g_score = {start: 0.0}
    heap = [(octile(start, goal), 0.0, start)]
    closed = set()
    expansions = 0
    while heap:
        _f, d, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        expansions += 1
        if cell == goal:
            return d, expansions
        closed.add(cell)
        cx, cy = cell
        for dx, dy, _c in NEIGHBOR_ORDER:
            nb = (cx + dx, cy + dy)
            ec = graph.edge_cost(cx, cy, nb[0], nb[1])
            if ec == INF:
                continue
            nd = d + ec
            if nd < g_score.get(nb, INF):
                g_score[nb] = nd
                heapq.heappush(heap, (nd + octile(nb, goal), nd, nb))
    return None, expansions
