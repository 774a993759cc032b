"""Start-goal navigation tasks: generation, validation, and file I/O.

Scenario file format: '#' comment lines, then a CSV header row
``id,map,start_x,start_y,start_heading,goal_x,goal_y,budget,success_radius,seed``
followed by one record per episode. Map paths are relative to the scenario
file's directory.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import planning
from .world import AgentBody, Pose, WorldMap, load_map, shortest_path_length

FIELDS = ("id", "map", "start_x", "start_y", "start_heading",
          "goal_x", "goal_y", "budget", "success_radius", "seed")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    map_path: str
    start: Pose
    goal: tuple[float, float]
    budget: int = 500
    success_radius: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.budget <= 0:
            raise ScenarioError("budget must be positive")
        if self.success_radius <= 0:
            raise ScenarioError("success_radius must be positive")
        object.__setattr__(self, "goal",
                           (float(self.goal[0]), float(self.goal[1])))


def validate_scenario(world: WorldMap, scenario: Scenario,
                      body: AgentBody = AgentBody()) -> float:
    """Check start/goal free space and oracle reachability; returns the
    shortest-path length (needed for SPL, so unreachable goals are
    rejected up front)."""
    if not world.free_for_disc(scenario.start.x, scenario.start.y, body.radius):
        raise ScenarioError(f"{scenario.scenario_id}: start pose is in collision")
    if world.occupied(*world.cell_of(*scenario.goal)):
        raise ScenarioError(f"{scenario.scenario_id}: goal cell is occupied")
    try:
        shortest = shortest_path_length(world, scenario.start.position, scenario.goal)
    except planning.NoPathError:
        raise ScenarioError(
            f"{scenario.scenario_id}: goal unreachable from start") from None
    if shortest <= 0.0:
        raise ScenarioError(f"{scenario.scenario_id}: degenerate shortest path")
    return shortest


def _nearest_free_cell(free: np.ndarray, world: WorldMap,
                       point: tuple[float, float],
                       max_dist: float) -> tuple[int, int] | None:
    """Euclidean-nearest free cell whose center is within max_dist of the
    point; None when the point has no free cell nearby."""
    cx, cy = world.cell_of(*point)
    reach = int(math.ceil(max_dist / world.cell_size)) + 1
    best = None
    for iy in range(max(cy - reach, 0), min(cy + reach + 1, world.height)):
        for ix in range(max(cx - reach, 0), min(cx + reach + 1, world.width)):
            if not free[iy, ix]:
                continue
            d = math.hypot((ix + 0.5) * world.cell_size - point[0],
                           (iy + 0.5) * world.cell_size - point[1])
            if d <= max_dist and (best is None or d < best[0]):
                best = (d, (ix, iy))
    return None if best is None else best[1]


def disc_feasible(world: WorldMap, scenario: Scenario,
                  body: AgentBody = AgentBody()) -> bool:
    """True when an agent disc can physically travel from the start to
    within the success radius of the goal: connectivity is checked on the
    radius-dilated grid (the disc configuration space). Episodes failing
    this are unsolvable for every embodied agent and are filtered out, as
    the original evaluation protocol filters episodes without a computable
    shortest path."""
    grow = max(int(math.ceil(body.radius / world.cell_size)), 1)
    structure = np.ones((2 * grow + 1, 2 * grow + 1), dtype=bool)
    infl_free = ~ndimage.binary_dilation(world.occupancy, structure=structure)
    start_anchor = _nearest_free_cell(infl_free, world, scenario.start.position,
                                      max_dist=3 * world.cell_size + body.radius)
    goal_anchor = _nearest_free_cell(
        infl_free, world, scenario.goal,
        max_dist=max(scenario.success_radius - world.cell_size / 2,
                     world.cell_size))
    if start_anchor is None or goal_anchor is None:
        return False
    return planning.dijkstra_cost(~infl_free, start_anchor, goal_anchor) is not None


def generate_scenarios(map_paths: list[str | Path], per_map: int, seed: int,
                       budget: int = 500, success_radius: float = 0.5,
                       min_length: float = 1.0,
                       body: AgentBody = AgentBody(),
                       max_attempts_per_pair: int = 200) -> list[Scenario]:
    """Rejection-sample start/goal pairs with oracle-reachable goals and a
    minimum shortest-path length. Deterministic per seed; maps yielding no
    valid pair within the attempt bound are reported and skipped."""
    out: list[Scenario] = []
    for mi, map_path in enumerate(map_paths):
        world = load_map(map_path)
        rng = np.random.default_rng([seed, mi])
        free = np.argwhere(~world.occupancy)
        made = 0
        for k in range(per_map):
            scenario = None
            for _ in range(max_attempts_per_pair):
                si, gi = rng.integers(0, free.shape[0], 2)
                sx, sy = world.cell_center(free[si][1], free[si][0])
                gx, gy = world.cell_center(free[gi][1], free[gi][0])
                heading = float(rng.uniform(-math.pi, math.pi))
                if not world.free_for_disc(sx, sy, body.radius):
                    continue
                cand = Scenario(
                    scenario_id=f"{Path(map_path).stem}-{k:03d}",
                    map_path=str(map_path),
                    start=Pose(sx, sy, heading), goal=(gx, gy),
                    budget=budget, success_radius=success_radius,
                    seed=int(rng.integers(0, 2**31 - 1)))
                try:
                    if (validate_scenario(world, cand, body) >= min_length
                            and disc_feasible(world, cand, body)):
                        scenario = cand
                        break
                except ScenarioError:
                    continue
            if scenario is None:
                break
            out.append(scenario)
            made += 1
        if made < per_map:
            print(f"warning: {map_path}: only {made}/{per_map} valid pairs")
    return out


def save_scenarios(scenarios: list[Scenario], path) -> None:
    path = Path(path)
    base = path.parent
    with open(path, "w", newline="") as f:
        f.write("# navbench scenarios\n")
        writer = csv.writer(f)
        writer.writerow(FIELDS)
        for s in scenarios:
            try:
                rel = Path(s.map_path).relative_to(base)
            except ValueError:
                rel = Path(s.map_path)
            writer.writerow([
                s.scenario_id, str(rel),
                repr(s.start.x), repr(s.start.y), repr(s.start.heading),
                repr(s.goal[0]), repr(s.goal[1]),
                s.budget, repr(s.success_radius), s.seed,
            ])


def load_scenarios(path) -> list[Scenario]:
    path = Path(path)
    out = []
    with open(path, newline="") as f:
        rows = [r for r in f if r.strip() and not r.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or tuple(reader.fieldnames) != FIELDS:
        raise ScenarioError(f"{path}: bad header, expected {','.join(FIELDS)}")
    for ln, rec in enumerate(reader, start=2):
        try:
            map_path = path.parent / rec["map"]
            out.append(Scenario(
                scenario_id=rec["id"],
                map_path=str(map_path),
                start=Pose(float(rec["start_x"]), float(rec["start_y"]),
                           float(rec["start_heading"])),
                goal=(float(rec["goal_x"]), float(rec["goal_y"])),
                budget=int(rec["budget"]),
                success_radius=float(rec["success_radius"]),
                seed=int(rec["seed"])))
        except (TypeError, ValueError, KeyError) as e:
            raise ScenarioError(f"{path}: record {ln}: {e}") from None
    return out
