"""Ground-truth environment model: agent pose and kinematics, disc-vs-grid
collision, planar depth sensing, and map file I/O.

World frame: x to the right, y up, heading measured counter-clockwise from
the +x axis and normalized to [-pi, pi). Grid cell (ix, iy) covers
[ix*cs, (ix+1)*cs) x [iy*cs, (iy+1)*cs) meters; occupancy arrays are
indexed ``occ[iy, ix]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import _kernels

TWO_PI = 2.0 * math.pi

# Contact tolerance stack (all consistent at the 1e-9 m scale):
# penetrations shallower than COLLIDE_EPS do not count as collision,
# sweeps ignore tangent grazes within the same tolerance, and computed
# contacts are backed off by CONTACT_SKIN. Without the graze tolerance a
# disc resting at distance == radius from a cell corner can never slide
# past it (float noise turns the tangency into a zero-advance contact).
COLLIDE_EPS = 1e-9
CONTACT_SKIN = 1e-9
APPROACH_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a - math.pi


class Action(Enum):
    FORWARD = "forward"
    TURN_LEFT = "left"
    TURN_RIGHT = "right"
    DONE = "done"


MOVE_ACTIONS = (Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT)


@dataclass(frozen=True)
class Pose:
    """Continuous planar pose; heading is renormalized on construction."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.heading)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.heading})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def turned(self, da: float) -> "Pose":
        return Pose(self.x, self.y, self.heading + da)

    def forward_point(self, dist: float) -> tuple[float, float]:
        return (self.x + dist * math.cos(self.heading),
                self.y + dist * math.sin(self.heading))


@dataclass(frozen=True)
class AgentBody:
    radius: float = 0.1
    height: float = 1.09  # recorded only; the world is planar

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("agent radius must be positive")


class CollisionMode(Enum):
    STOP = "stop"
    SLIDE = "slide"


@dataclass(frozen=True)
class KinematicsConfig:
    """Per-action displacement magnitudes.

    Defaults (0.10 m, 10 deg) put 500 actions at roughly 50 m of travel,
    commensurate with the 500-action / 50-second episode budget.
    """

    step_len: float = 0.10
    turn_step: float = math.radians(10.0)
    collision_mode: CollisionMode = CollisionMode.SLIDE

    def __post_init__(self):
        if self.step_len <= 0:
            raise ValueError("step_len must be positive")
        if not (0.0 < self.turn_step < math.pi):
            raise ValueError("turn_step must be in (0, pi)")


@dataclass(frozen=True)
class SensorConfig:
    """1D planar depth fan standing in for a depth camera."""

    fov: float = math.pi / 2
    n_rays: int = 256
    max_range: float = 4.0
    min_range: float = 0.001


@dataclass
class DepthScan:
    """Per-ray depth, ordered left-to-right across the fov (symmetric about
    the heading). Ranges of rays that saw nothing within max_range are set
    to max_range with valid=False.
    """

    fov: float
    ranges: np.ndarray
    valid: np.ndarray

    @property
    def n_rays(self) -> int:
        return int(self.ranges.shape[0])

    @property
    def bearings(self) -> np.ndarray:
        """Ray bearings relative to the heading, +fov/2 (left) first."""
        return ray_bearings(self.fov, self.n_rays)


def ray_bearings(fov: float, n_rays: int) -> np.ndarray:
    if n_rays == 1:
        return np.zeros(1)
    return np.linspace(fov / 2.0, -fov / 2.0, n_rays)


class MapFormatError(ValueError):
    pass


class WorldMap:
    """Immutable ground-truth occupancy grid with a closed border."""

    def __init__(self, occupancy: np.ndarray, cell_size: float = 0.1,
                 spawn_region: tuple[int, int, int, int] | None = None):
        occ = np.asarray(occupancy, dtype=bool)
        if occ.ndim != 2:
            raise ValueError("occupancy must be a 2D array")
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        h, w = occ.shape
        if not (occ[0, :].all() and occ[-1, :].all()
                and occ[:, 0].all() and occ[:, -1].all()):
            raise ValueError("world border must be fully occupied")
        if occ.all():
            raise ValueError("world has no free cell")
        self.occupancy = occ
        self.cell_size = float(cell_size)
        self.width = w
        self.height = h
        self.spawn_region = spawn_region  # (ix0, iy0, ix1, iy1) inclusive, or None

    @property
    def size_m(self) -> tuple[float, float]:
        return (self.width * self.cell_size, self.height * self.cell_size)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell_size)),
                int(math.floor(y / self.cell_size)))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return ((ix + 0.5) * self.cell_size, (iy + 0.5) * self.cell_size)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def occupied(self, ix: int, iy: int) -> bool:
        if not self.in_bounds(ix, iy):
            return True  # closed world
        return bool(self.occupancy[iy, ix])

    def contains_point(self, x: float, y: float) -> bool:
        return (0.0 <= x < self.width * self.cell_size
                and 0.0 <= y < self.height * self.cell_size)

    def free_for_disc(self, x: float, y: float, radius: float) -> bool:
        return not disc_collides(self.occupancy, self.cell_size, x, y, radius)


# ---------------------------------------------------------------------------
# Disc-vs-grid collision

def disc_collides(occ: np.ndarray, cell_size: float, x: float, y: float,
                  radius: float) -> bool:
    """True if a disc at (x, y) penetrates an occupied cell deeper than the
    contact tolerance (tangency is free)."""
    h, w = occ.shape
    ix0 = max(int(math.floor((x - radius) / cell_size)), 0)
    ix1 = min(int(math.floor((x + radius) / cell_size)), w - 1)
    iy0 = max(int(math.floor((y - radius) / cell_size)), 0)
    iy1 = min(int(math.floor((y + radius) / cell_size)), h - 1)
    r_eff = radius - COLLIDE_EPS
    r2 = r_eff * r_eff
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            if not occ[iy, ix]:
                continue
            cx = min(max(x, ix * cell_size), (ix + 1) * cell_size)
            cy = min(max(y, iy * cell_size), (iy + 1) * cell_size)
            dx = x - cx
            dy = y - cy
            if dx * dx + dy * dy < r2:
                return True
    return False


def _ray_aabb_entry(px, py, dx, dy, x0, x1, y0, y1):
    """Entry distance of a ray into an axis-aligned box, or inf."""
    tmin = 0.0
    tmax = math.inf
    if dx != 0.0:
        t1 = (x0 - px) / dx
        t2 = (x1 - px) / dx
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
    elif px < x0 or px > x1:
        return math.inf
    if dy != 0.0:
        t1 = (y0 - py) / dy
        t2 = (y1 - py) / dy
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
    elif py < y0 or py > y1:
        return math.inf
    if tmin > tmax:
        return math.inf
    return tmin


def _ray_circle_entry(px, py, dx, dy, cx, cy, r):
    slack = 2.0 * r * COLLIDE_EPS  # tangent grazes within tolerance miss
    ox = px - cx
    oy = py - cy
    b = ox * dx + oy * dy
    c = ox * ox + oy * oy - r * r
    if c < -slack:
        return 0.0  # starting inside the circle
    disc = b * b - c
    if disc <= slack:
        return math.inf
    t = -b - math.sqrt(disc)
    return t if t >= 0.0 else math.inf


def _cell_contact(occ_ix, occ_iy, cs, x, y, dx, dy, radius, max_dist):
    """Earliest approaching contact of the moving disc with one cell.

    The swept shape is the cell's Minkowski sum with the disc (two expanded
    slabs plus corner arcs). Component entries where the velocity does not
    approach the surface (v . n >= 0, i.e. tangency or separation) do not
    block: without this, a disc resting exactly at distance == radius could
    never slide along a wall. Returns (t, nx, ny) or (inf, 0, 0).
    """
    cx0 = occ_ix * cs
    cx1 = cx0 + cs
    cy0 = occ_iy * cs
    cy1 = cy0 + cs
    entries = [
        _ray_aabb_entry(x, y, dx, dy, cx0 - radius, cx1 + radius, cy0, cy1),
        _ray_aabb_entry(x, y, dx, dy, cx0, cx1, cy0 - radius, cy1 + radius),
    ]
    for ccx in (cx0, cx1):
        for ccy in (cy0, cy1):
            entries.append(_ray_circle_entry(x, y, dx, dy, ccx, ccy, radius))
    for t in sorted(entries):
        if t > max_dist:
            break
        px = x + dx * t
        py = y + dy * t
        nx = px - min(max(px, cx0), cx1)
        ny = py - min(max(py, cy0), cy1)
        norm = math.hypot(nx, ny)
        if norm < 1e-12:
            nx, ny = -dx, -dy
        else:
            nx /= norm
            ny /= norm
        if dx * nx + dy * ny < -APPROACH_EPS:
            return t, nx, ny
    return math.inf, 0.0, 0.0


def first_contact(occ: np.ndarray, cell_size: float, x: float, y: float,
                  dx: float, dy: float, max_dist: float, radius: float):
    """First distance along unit direction (dx, dy) at which a disc of
    ``radius`` makes approaching contact with an occupied cell, and the
    contact normal (pointing from the obstacle toward the disc center).

    Returns (distance, nx, ny); distance is inf when the sweep is clear
    within max_dist.
    """
    h, w = occ.shape
    cs = cell_size
    ex = x + dx * max_dist
    ey = y + dy * max_dist
    reach = radius + cs  # one extra cell of slack around the swept segment
    ix0 = max(int(math.floor((min(x, ex) - reach) / cs)), 0)
    ix1 = min(int(math.floor((max(x, ex) + reach) / cs)), w - 1)
    iy0 = max(int(math.floor((min(y, ey) - reach) / cs)), 0)
    iy1 = min(int(math.floor((max(y, ey) + reach) / cs)), h - 1)

    best = math.inf
    best_n = (0.0, 0.0)
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            if not occ[iy, ix]:
                continue
            t, nx, ny = _cell_contact(ix, iy, cs, x, y, dx, dy, radius, max_dist)
            if t < best:
                best = t
                best_n = (nx, ny)
    if best > max_dist:
        return math.inf, 0.0, 0.0
    return best, best_n[0], best_n[1]


def step(world: WorldMap, pose: Pose, action: Action, cfg: KinematicsConfig,
         body: AgentBody) -> Pose:
    """Apply one discrete action. Turns are exact rotations; Forward sweeps
    the agent disc against the grid, resolving contact per collision mode.
    Done leaves the pose unchanged.
    """
    if action is Action.DONE:
        return pose
    if action is Action.TURN_LEFT:
        return pose.turned(cfg.turn_step)
    if action is Action.TURN_RIGHT:
        return pose.turned(-cfg.turn_step)

    dx = math.cos(pose.heading)
    dy = math.sin(pose.heading)
    occ = world.occupancy
    cs = world.cell_size
    r = body.radius

    if cfg.collision_mode is CollisionMode.STOP:
        t, _, _ = first_contact(occ, cs, pose.x, pose.y, dx, dy, cfg.step_len, r)
        d = cfg.step_len if t == math.inf else max(t - CONTACT_SKIN, 0.0)
        nx = pose.x + dx * d
        ny = pose.y + dy * d
    else:
        px, py = pose.x, pose.y
        vx = dx * cfg.step_len
        vy = dy * cfg.step_len
        for _ in range(3):
            vlen = math.hypot(vx, vy)
            if vlen < 1e-12:
                break
            ux = vx / vlen
            uy = vy / vlen
            t, cnx, cny = first_contact(occ, cs, px, py, ux, uy, vlen, r)
            if t == math.inf:
                px += vx
                py += vy
                break
            adv = max(t - CONTACT_SKIN, 0.0)
            px += ux * adv
            py += uy * adv
            # cancel the motion component into the obstacle
            rem = vlen - adv
            vx = ux * rem
            vy = uy * rem
            dot = vx * cnx + vy * cny
            vx -= dot * cnx
            vy -= dot * cny
        nx, ny = px, py

    if disc_collides(occ, cs, nx, ny, r):
        return pose  # numerical fallback: never leave a colliding pose
    return Pose(nx, ny, pose.heading)


# ---------------------------------------------------------------------------
# Sensing and the egocentric goal vector

def raycast(world: WorldMap, pose: Pose, sensor: SensorConfig) -> DepthScan:
    """Exact planar depth fan from the agent pose."""
    if not world.contains_point(pose.x, pose.y):
        raise ValueError("pose outside world bounds")
    angles = pose.heading + ray_bearings(sensor.fov, sensor.n_rays)
    ranges = np.empty(sensor.n_rays, dtype=np.float64)
    hits = np.empty(sensor.n_rays, dtype=np.bool_)
    _kernels.cast_rays(world.occupancy, world.cell_size, pose.x, pose.y,
                       angles, sensor.max_range, ranges, hits)
    valid = hits & (ranges <= sensor.max_range)
    np.clip(ranges, sensor.min_range, sensor.max_range, out=ranges)
    return DepthScan(fov=sensor.fov, ranges=ranges, valid=valid)


def goal_polar(pose: Pose, goal: tuple[float, float]) -> tuple[float, float]:
    """Goal position in the agent's egocentric polar coordinates:
    (distance, bearing), bearing 0 straight ahead, positive to the left.
    """
    gx = goal[0] - pose.x
    gy = goal[1] - pose.y
    dist = math.hypot(gx, gy)
    if dist == 0.0:
        return 0.0, 0.0
    bearing = wrap_angle(math.atan2(gy, gx) - pose.heading)
    return dist, bearing


def project_polar(pose: Pose, distance: float, bearing: float) -> tuple[float, float]:
    """Inverse of goal_polar: the world point at (distance, bearing) from pose."""
    a = pose.heading + bearing
    return (pose.x + distance * math.cos(a), pose.y + distance * math.sin(a))


def shortest_path_length(world: WorldMap, start: tuple[float, float],
                         goal: tuple[float, float]) -> float:
    """Length in meters of the optimal 8-connected grid path between the
    cells containing start and goal. Raises NoPathError when disconnected.
    """
    from . import planning

    s = world.cell_of(*start)
    g = world.cell_of(*goal)
    if world.occupied(*s) or world.occupied(*g):
        raise ValueError("start and goal must lie in free cells")
    cost = planning.dijkstra_cost(world.occupancy, s, g)
    if cost is None:
        raise planning.NoPathError(f"no path from {s} to {g}")
    return cost * world.cell_size


# ---------------------------------------------------------------------------
# Map file I/O
#
# Format: optional leading comment lines ('#'), then three header lines
#   cell_size <meters> / width <cells> / height <cells>,
# an optional 'spawn <ix0> <iy0> <ix1> <iy1>' line, then exactly `height`
# rows of `width` glyphs ('#' occupied, '.' free), row iy=0 first.

def save_map(world: WorldMap, path) -> None:
    lines = [
        "# navbench map",
        "# header floats are meters; rows: '#'=occupied '.'=free, row iy=0 first",
        f"cell_size {world.cell_size!r}",
        f"width {world.width}",
        f"height {world.height}",
    ]
    if world.spawn_region is not None:
        lines.append("spawn {} {} {} {}".format(*world.spawn_region))
    for iy in range(world.height):
        lines.append("".join("#" if world.occupancy[iy, ix] else "."
                             for ix in range(world.width)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_map(path) -> WorldMap:
    path = Path(path)
    raw = path.read_text().splitlines()
    i = 0
    while i < len(raw) and (not raw[i].strip() or raw[i].lstrip().startswith("#")):
        i += 1

    def header(key: str, lineno: int) -> str:
        if lineno >= len(raw):
            raise MapFormatError(f"{path}: unexpected end of file, expected '{key}'")
        parts = raw[lineno].split()
        if len(parts) != 2 or parts[0] != key:
            raise MapFormatError(f"{path}:{lineno + 1}: expected '{key} <value>', "
                                 f"got {raw[lineno]!r}")
        return parts[1]

    try:
        cell_size = float(header("cell_size", i))
    except ValueError as e:
        raise MapFormatError(f"{path}:{i + 1}: bad cell_size: {e}") from None
    try:
        width = int(header("width", i + 1))
        height = int(header("height", i + 2))
    except ValueError as e:
        raise MapFormatError(f"{path}: bad width/height: {e}") from None
    i += 3

    spawn = None
    if i < len(raw) and raw[i].startswith("spawn"):
        parts = raw[i].split()
        if len(parts) != 5:
            raise MapFormatError(f"{path}:{i + 1}: spawn needs 4 integers")
        try:
            spawn = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise MapFormatError(f"{path}:{i + 1}: spawn needs 4 integers") from None
        i += 1

    rows = raw[i:i + height]
    if len(rows) < height:
        raise MapFormatError(f"{path}: expected {height} rows, found {len(rows)}")
    occ = np.zeros((height, width), dtype=bool)
    for iy, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"{path}:{i + iy + 1}: row has {len(row)} cells, "
                                 f"expected {width}")
        for ix, ch in enumerate(row):
            if ch == "#":
                occ[iy, ix] = True
            elif ch != ".":
                raise MapFormatError(f"{path}:{i + iy + 1}: unknown cell glyph "
                                     f"{ch!r} at column {ix + 1}")
    try:
        return WorldMap(occ, cell_size=cell_size, spawn_region=spawn)
    except ValueError as e:
        raise MapFormatError(f"{path}: {e}") from None
