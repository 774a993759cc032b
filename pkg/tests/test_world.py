import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navbench.world import (Action, AgentBody, CollisionMode, KinematicsConfig,
                            MapFormatError, Pose, SensorConfig, WorldMap,
                            disc_collides, first_contact, goal_polar, load_map,
                            project_polar, raycast, save_map,
                            shortest_path_length, step, wrap_angle)

from conftest import open_world, pose, world_from_rows

KIN = KinematicsConfig()
BODY = AgentBody()


# ---------------------------------------------------------------------------
# independent references

def occupied_at_point(world: WorldMap, x: float, y: float) -> bool:
    ix = int(math.floor(x / world.cell_size))
    iy = int(math.floor(y / world.cell_size))
    return world.occupied(ix, iy)


def marching_range(world, x0, y0, angle, max_range):
    """Raycast reference, independent of the DDA: enumerate every gridline
    crossing analytically, then probe cell occupancy at each inter-crossing
    midpoint. The first occupied interval starts at the reported range."""
    cs = world.cell_size
    dx, dy = math.cos(angle), math.sin(angle)
    ts = {0.0, max_range}
    for d, origin in ((dx, x0), (dy, y0)):
        if d == 0.0:
            continue
        lo = origin
        hi = origin + d * max_range
        k0 = math.ceil(min(lo, hi) / cs)
        k1 = math.floor(max(lo, hi) / cs)
        for k in range(k0, k1 + 1):
            t = (k * cs - origin) / d
            if 0.0 < t <= max_range:
                ts.add(t)
    ts = sorted(ts)
    for a, b in zip(ts, ts[1:]):
        mid = 0.5 * (a + b)
        if occupied_at_point(world, x0 + mid * dx, y0 + mid * dy):
            return a
    return None


def marching_contact(world, x0, y0, angle, max_dist, radius, fine=1e-5):
    """Disc-contact reference: fine forward marching until overlap."""
    dx, dy = math.cos(angle), math.sin(angle)
    t = 0.0
    while t <= max_dist:
        if disc_collides(world.occupancy, world.cell_size,
                         x0 + t * dx, y0 + t * dy, radius):
            return t
        t += fine
    return None


# ---------------------------------------------------------------------------
# pose and goal vector

def test_heading_normalized_on_construction():
    assert Pose(0, 0, 3 * math.pi).heading == pytest.approx(math.pi - 2 * math.pi)
    p = Pose(0, 0, math.pi)  # pi wraps to -pi (range is [-pi, pi))
    assert p.heading == pytest.approx(-math.pi)


def test_pose_rejects_non_finite():
    with pytest.raises(ValueError):
        Pose(math.nan, 0, 0)


def test_goal_polar_examples():
    assert goal_polar(Pose(0, 0, 0), (3, 0)) == pytest.approx((3, 0))
    d, b = goal_polar(Pose(0, 0, 0), (0, 2))
    assert (d, b) == pytest.approx((2, math.pi / 2))
    d, b = goal_polar(Pose(1, 1, math.pi), (0, 1))
    assert (d, b) == pytest.approx((1, 0))


@settings(max_examples=200)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-math.pi, math.pi - 1e-9),
       st.floats(0.01, 10), st.floats(-math.pi, math.pi - 1e-9))
def test_goal_polar_round_trip(x, y, heading, dist, bearing):
    p = Pose(x, y, heading)
    gx, gy = project_polar(p, dist, bearing)
    d2, b2 = goal_polar(p, (gx, gy))
    assert d2 == pytest.approx(dist, abs=1e-9)
    assert wrap_angle(b2 - bearing) == pytest.approx(0, abs=1e-9)


# ---------------------------------------------------------------------------
# step

def test_step_forward_unobstructed(empty_world):
    p2 = step(empty_world, pose(1.0, 1.0), Action.FORWARD, KIN, BODY)
    assert (p2.x, p2.y, p2.heading) == pytest.approx((1.1, 1.0, 0.0))


def test_step_turns_change_heading_only(empty_world):
    p = pose(1.0, 1.0)
    left = step(empty_world, p, Action.TURN_LEFT, KIN, BODY)
    right = step(empty_world, p, Action.TURN_RIGHT, KIN, BODY)
    assert left.heading == pytest.approx(math.radians(10))
    assert right.heading == pytest.approx(math.radians(-10))
    assert (left.x, left.y) == (p.x, p.y)


def test_step_done_is_identity(empty_world):
    p = pose(1.0, 1.0, 33)
    assert step(empty_world, p, Action.DONE, KIN, BODY) == p


def test_step_stop_contact_matches_marching_reference():
    # wall cell face 0.05 m beyond the disc surface: contact after 0.05 m
    rows = ["#" * 20] + ["#" + "." * 18 + "#"] * 8 + ["#" * 20]
    occ = world_from_rows(rows)
    wall_rows = ["#" * 20] + ["#" + "." * 18 + "#"] * 8 + ["#" * 20]
    world = world_from_rows(wall_rows)
    world.occupancy[4, 10] = True  # cell x in [1.0, 1.1)
    p = Pose(1.0 - BODY.radius - 0.05, 0.45, 0.0)
    kin = KinematicsConfig(collision_mode=CollisionMode.STOP)
    p2 = step(world, p, Action.FORWARD, kin, BODY)
    moved = p2.x - p.x
    ref = marching_contact(world, p.x, p.y, 0.0, KIN.step_len, BODY.radius)
    assert ref is not None
    assert moved == pytest.approx(0.05, abs=1e-4)
    assert moved == pytest.approx(ref, abs=1e-4)
    assert p2.y == p.y


def test_step_slide_cancels_normal_component():
    world = open_world()
    world.occupancy[:, 20:] = True  # wall at x = 2.0
    p = Pose(2.0 - BODY.radius - 0.02, 1.0, math.radians(30))
    p2 = step(world, p, Action.FORWARD, KIN, BODY)
    # x-motion limited by the wall, y-motion keeps the tangential remainder
    assert p2.x == pytest.approx(2.0 - BODY.radius, abs=1e-6)
    assert p2.y > p.y
    assert not disc_collides(world.occupancy, world.cell_size, p2.x, p2.y,
                             BODY.radius)


def test_step_never_collides_under_random_actions():
    rng = np.random.default_rng(4)
    for trial in range(20):
        world = open_world(25, 18)
        mask = rng.random((18, 25)) < 0.12
        mask[:2, :] = mask[:, :2] = False
        world.occupancy[mask] = True
        p = Pose(0.45, 0.45, 0.0)
        if disc_collides(world.occupancy, world.cell_size, p.x, p.y, BODY.radius):
            continue
        for _ in range(300):
            a = (Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT)[
                rng.integers(0, 3)]
            p = step(world, p, a, KIN, BODY)
            assert not disc_collides(world.occupancy, world.cell_size,
                                     p.x, p.y, BODY.radius)


# ---------------------------------------------------------------------------
# raycast

def test_raycast_perpendicular_wall():
    world = open_world()
    world.occupancy[:, 20:] = True  # wall boundary at x = 2.0
    scan = raycast(world, Pose(1.0, 1.0, 0.0), SensorConfig(n_rays=5))
    mid = 2  # center ray exactly along the heading
    assert scan.valid[mid]
    assert scan.ranges[mid] == pytest.approx(1.0, abs=1e-9)


def test_raycast_long_corridor_invalid():
    world = open_world(80, 10)  # 8 m long
    scan = raycast(world, Pose(0.5, 0.5, 0.0), SensorConfig(n_rays=5))
    assert not scan.valid[2]
    assert scan.ranges[2] == pytest.approx(4.0)


def test_raycast_45_degree_hit():
    world = open_world()
    world.occupancy[:, 20:] = True  # wall at x = 2.0
    scan = raycast(world, Pose(1.0, 1.0, math.radians(45)),
                   SensorConfig(n_rays=3, fov=math.radians(90)))
    # leftmost ray bearing +45 deg points straight +y; center at 45 deg
    # hits the wall at sqrt(2) * 1.0
    assert scan.ranges[1] == pytest.approx(math.sqrt(2), abs=1e-9)


def test_raycast_ordering_left_to_right():
    world = open_world()
    world.occupancy[:, 20:] = True
    scan = raycast(world, Pose(1.0, 1.5, 0.0), SensorConfig(n_rays=9))
    assert scan.bearings[0] > 0 > scan.bearings[-1]
    assert scan.bearings[0] == pytest.approx(math.radians(45))


def test_raycast_matches_marching_reference_randomized():
    rng = np.random.default_rng(11)
    world = open_world(30, 22)
    mask = rng.random((22, 30)) < 0.15
    mask[:2, :] = mask[:, :2] = False
    world.occupancy[mask] = True
    sensor = SensorConfig(n_rays=33)
    checked = 0
    for _ in range(30):
        x = rng.uniform(0.3, 2.7)
        y = rng.uniform(0.3, 1.9)
        if occupied_at_point(world, x, y):
            continue
        p = Pose(x, y, rng.uniform(-math.pi, math.pi))
        scan = raycast(world, p, sensor)
        for k in range(0, sensor.n_rays, 4):
            ref = marching_range(world, x, y, p.heading + scan.bearings[k],
                                 sensor.max_range)
            if scan.valid[k]:
                assert ref is not None
                assert scan.ranges[k] == pytest.approx(ref, abs=1e-6)
            else:
                assert ref is None or ref > sensor.max_range - 1e-6
            checked += 1
    assert checked > 100


def test_raycast_min_range_clamp():
    world = open_world()
    world.occupancy[10, 11] = True
    p = Pose(1.1 - 1e-5, 1.05, 0.0)  # surface a hair ahead
    scan = raycast(world, p, SensorConfig(n_rays=3))
    assert scan.ranges[1] >= 0.001


# ---------------------------------------------------------------------------
# shortest path oracle plumbing

def test_shortest_path_straight_line():
    world = open_world(14, 5)
    d = shortest_path_length(world, (0.15, 0.25), (1.15, 0.25))
    assert d == pytest.approx(1.0)


def test_shortest_path_diagonal():
    world = open_world(14, 14)
    d = shortest_path_length(world, (0.15, 0.15), (1.15, 1.15))
    assert d == pytest.approx(math.sqrt(2))


def test_shortest_path_u_wall_matches_ucs():
    from navbench.planning import uniform_cost_search

    rows = [
        "############",
        "#..........#",
        "#..######..#",
        "#..#....#..#",
        "#..#.''.#..#".replace("'", "."),
        "#..#....#..#",
        "#..........#",
        "############",
    ]
    world = world_from_rows(rows)
    start = (0.45, 0.45)  # inside the U
    goal = (0.15, 0.15)
    d = shortest_path_length(world, start, goal)
    ref = uniform_cost_search(world.occupancy, world.cell_of(*start),
                              world.cell_of(*goal))
    assert d == pytest.approx(ref * world.cell_size, abs=1e-9)


def test_shortest_path_unreachable_raises():
    from navbench.planning import NoPathError

    rows = [
        "#########",
        "#...#...#",
        "#...#...#",
        "#########",
    ]
    world = world_from_rows(rows)
    with pytest.raises(NoPathError):
        shortest_path_length(world, (0.15, 0.15), (0.75, 0.15))


# ---------------------------------------------------------------------------
# map I/O

def test_map_round_trip(tmp_path):
    world = open_world(17, 9)
    world.occupancy[3, 5] = True
    path = tmp_path / "w.map"
    save_map(world, path)
    again = load_map(path)
    assert (again.occupancy == world.occupancy).all()
    assert again.cell_size == world.cell_size


def test_map_spawn_region_round_trip(tmp_path):
    occ = open_world(12, 8).occupancy
    world = WorldMap(occ, spawn_region=(2, 2, 9, 5))
    path = tmp_path / "w.map"
    save_map(world, path)
    assert load_map(path).spawn_region == (2, 2, 9, 5)


def test_map_inconsistent_row_width(tmp_path):
    path = tmp_path / "bad.map"
    path.write_text("cell_size 0.1\nwidth 4\nheight 3\n####\n#.#\n####\n")
    with pytest.raises(MapFormatError, match="row has 3 cells"):
        load_map(path)


def test_map_unknown_glyph_named(tmp_path):
    path = tmp_path / "bad.map"
    path.write_text("cell_size 0.1\nwidth 4\nheight 3\n####\n#x.#\n####\n".replace("#x.#", "#x##"))
    with pytest.raises(MapFormatError, match="'x'"):
        load_map(path)


def test_map_missing_header(tmp_path):
    path = tmp_path / "bad.map"
    path.write_text("width 4\nheight 3\n####\n####\n####\n")
    with pytest.raises(MapFormatError, match="cell_size"):
        load_map(path)


def test_worldmap_requires_closed_border():
    occ = np.zeros((5, 5), dtype=bool)
    with pytest.raises(ValueError, match="border"):
        WorldMap(occ)
