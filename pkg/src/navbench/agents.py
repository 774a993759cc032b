"""Observation-to-action policies: the blind baseline, the classic modular
pipeline, and the belief-map distance-greedy agent.

Agents are per-episode objects (no memory carries across episodes) and
emit exactly one action per tick. The blind and belief agents read only
the Observation plus their own seeded state; the classic pipeline's
Perfect localizer additionally consumes the privileged simulator pose
carried on the observation.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .beliefs import PredictorConfig, score_actions
from .localization import (LocalizerConfig, PoseStatus, make_localizer)
from .locomotion import ControllerConfig, WaypointController, turn_toward
from .mapping import ObstacleMap
from .planning import DStarLite, PlanGraph, nearest_traversable
from .world import (Action, DepthScan, KinematicsConfig, Pose, first_contact,
                    project_polar)


@dataclass
class Observation:
    """Per-tick agent input. The goal vector is always present (PointGoal);
    gt_pose is privileged information consumed only by the Perfect
    localizer. ``odometry`` is the executed body-frame motion of the
    previous action as a wheel odometer would measure it — (forward,
    leftward, heading change) — None on the first tick."""

    goal_distance: float
    goal_bearing: float
    depth: DepthScan | None = None
    prev_action: Action | None = None
    step_index: int = 0
    budget_remaining: int = 0
    odometry: tuple[float, float, float] | None = None
    gt_pose: Pose | None = None

    @property
    def goal_direction(self) -> tuple[float, float]:
        """(sin, cos) encoding of the goal bearing."""
        return (math.sin(self.goal_bearing), math.cos(self.goal_bearing))


def blind_policy(obs: Observation, cfg: ControllerConfig) -> Action:
    """Head straight for the goal, ignoring all sensors."""
    if obs.goal_distance < cfg.done_threshold:
        return Action.DONE
    turn = turn_toward(obs.goal_bearing, cfg.phi)
    return turn if turn is not None else Action.FORWARD


class BlindAgent:
    needs_depth = False

    def __init__(self, controller_cfg: ControllerConfig):
        self.cfg = controller_cfg

    def act(self, obs: Observation) -> Action:
        return blind_policy(obs, self.cfg)


class ClassicAgent:
    """Mapping + localization + incremental planning + waypoint locomotion.

    Per tick: localize (handling Failure by resetting the map and
    re-initializing the planner), integrate the scan, push flipped cells to
    the planner, move the planner start to the estimated cell, compute the
    path, and let the controller act. While the localizer is bootstrapping
    or no path exists, the tick degrades to the blind policy.

    The planner runs on a configuration-space view of the obstacle map:
    known obstacles dilated by one cell (the agent radius). With the disc
    radius equal to the cell size, raw-grid paths routinely pass through
    corner gaps narrower than the disc; planning on the dilated view keeps
    planned paths physically followable. The map itself, the goal-distance
    oracle, and the planner's own contract stay on raw cells.
    """

    needs_depth = True

    def __init__(self, start_pose: Pose, map_shape: tuple[int, int],
                 cell_size: float, kin: KinematicsConfig,
                 localizer_cfg: LocalizerConfig,
                 controller_cfg: ControllerConfig,
                 seed, obstacle_threshold: int = 2,
                 sensor_max_range: float = 4.0, body_radius: float = 0.1):
        height, width = map_shape
        self.kin = kin
        self.controller_cfg = controller_cfg
        self.map = ObstacleMap(width, height, cell_size=cell_size,
                               occupied_threshold=obstacle_threshold,
                               max_range=sensor_max_range)

        def los(x0: float, y0: float, x1: float, y1: float) -> bool:
            # disc-swept visibility on the agent's own map
            dist = math.hypot(x1 - x0, y1 - y0)
            if dist < 1e-9:
                return True
            t, _nx, _ny = first_contact(self.map.occupied, cell_size,
                                        x0, y0, (x1 - x0) / dist,
                                        (y1 - y0) / dist, dist, body_radius)
            return t == math.inf

        self.localizer = make_localizer(localizer_cfg, kin, start_pose,
                                        np.random.SeedSequence([_seed_int(seed), 1]))
        self.controller = WaypointController(
            controller_cfg, random.Random(_mix(seed, 2)),
            line_of_sight=los)
        self._plan_occ = np.zeros((height, width), dtype=bool)
        self.planner: DStarLite | None = None
        self.goal_point: tuple[float, float] | None = None
        self.prev_action: Action | None = None
        self.failures = 0

    def _dilate_changes(self, changed_raw: list[tuple[int, int]]) -> list[tuple[int, int]]:
        """Propagate raw map flips into the dilated planning view; returns
        the planning cells whose traversability flipped."""
        occ = self.map.occupied
        h, w = occ.shape
        affected = set()
        for cx, cy in changed_raw:
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h:
                        affected.add((nx, ny))
        flips = []
        for ix, iy in affected:
            x0, x1 = max(ix - 1, 0), min(ix + 2, w)
            y0, y1 = max(iy - 1, 0), min(iy + 2, h)
            value = bool(occ[y0:y1, x0:x1].any())
            if value != self._plan_occ[iy, ix]:
                self._plan_occ[iy, ix] = value
                flips.append((ix, iy))
        return flips

    def act(self, obs: Observation) -> Action:
        est_result = self.localizer.observe(self.prev_action, obs.depth,
                                            self.map, obs.gt_pose,
                                            odometry=obs.odometry)
        if est_result.status is PoseStatus.FAILURE:
            est = self._on_failure(obs)
        else:
            est = est_result.pose
        if self.goal_point is None:
            self.goal_point = project_polar(est, obs.goal_distance,
                                            obs.goal_bearing)

        changed = []
        if obs.depth is not None:
            raw_changed = self.map.integrate_scan(est, obs.depth)
            if raw_changed:
                changed = self._dilate_changes(raw_changed)

        est_cell = self.map.cell_of(est.x, est.y)
        if self.planner is not None:
            gx, gy = self.planner.goal
            if self._plan_occ[gy, gx]:
                self.planner = None  # inflation swallowed the goal; re-anchor
        if self.planner is None:
            self._init_planner(est_cell)
        else:
            if changed:
                self.planner.update_cells(changed)
            self.planner.set_start(est_cell)

        path = self.planner.compute() if self.planner is not None else None
        if self.localizer.in_bootstrap or path is None:
            action = blind_policy(obs, self.controller_cfg)
        else:
            action = self.controller.act(
                est, path.to_points(self.map.cell_size), obs.goal_distance)
        self.prev_action = action
        return action

    def _init_planner(self, est_cell: tuple[int, int]) -> None:
        graph = PlanGraph(self._plan_occ)
        start = nearest_traversable(graph, est_cell)
        goal = self._goal_cell(graph)
        if start is None or goal is None:
            self.planner = None
            return
        self.planner = DStarLite(graph, start, goal)

    def _goal_cell(self, graph: PlanGraph) -> tuple[int, int] | None:
        """Planning cell for the goal: the traversable cell whose center is
        Euclidean-closest to the goal point (so a goal hugging a wall
        anchors on its own side), tie-broken by flat index."""
        cs = self.map.cell_size
        gx, gy = self.goal_point
        cell = self.map.cell_of(gx, gy)
        if graph.traversable(*cell):
            return cell
        cx, cy = cell
        for r in range(1, max(graph.width, graph.height)):
            best = None
            for iy in range(cy - r, cy + r + 1):
                xs = range(cx - r, cx + r + 1) if iy in (cy - r, cy + r) \
                    else (cx - r, cx + r)
                for ix in xs:
                    if not graph.traversable(ix, iy):
                        continue
                    d = math.hypot((ix + 0.5) * cs - gx, (iy + 0.5) * cs - gy)
                    key = (d, iy * graph.width + ix)
                    if best is None or key < best[0]:
                        best = (key, (ix, iy))
            if best is not None:
                return best[1]
        return None

    def _on_failure(self, obs: Observation) -> Pose:
        """Localization-failure protocol: discard the map, drop the planner,
        continue from the dead-reckoned estimate, and re-anchor the goal
        from the current egocentric goal vector."""
        self.failures += 1
        self.map.reset()
        self._plan_occ[...] = False
        self.planner = None
        self.controller.forget_path()
        est = self.localizer.dead_reckoned
        self.goal_point = project_polar(est, obs.goal_distance, obs.goal_bearing)
        return est


class BeliefGreedyAgent:
    """Pick the action minimizing the expected future goal distance, i.e.
    the weighted sum over horizons of belief-map x measurement-map dot
    products. Maintains its own dead-reckoned pose and obstacle map from
    the observation stream alone."""

    needs_depth = True

    def __init__(self, start_pose: Pose, map_shape: tuple[int, int],
                 cell_size: float, kin: KinematicsConfig,
                 predictor_cfg: PredictorConfig, done_threshold: float,
                 seed, obstacle_threshold: int = 2,
                 sensor_max_range: float = 4.0):
        height, width = map_shape
        self.kin = kin
        self.cfg = predictor_cfg
        self.done_threshold = done_threshold
        self.map = ObstacleMap(width, height, cell_size=cell_size,
                               occupied_threshold=obstacle_threshold,
                               max_range=sensor_max_range)
        self.localizer = make_localizer(
            LocalizerConfig(kind="odometry"), kin, start_pose,
            np.random.SeedSequence([_seed_int(seed), 1]))
        self._rng = random.Random(_mix(seed, 3))
        self.prev_action: Action | None = None

    def act(self, obs: Observation) -> Action:
        est = self.localizer.observe(self.prev_action, obs.depth, self.map,
                                     None, odometry=obs.odometry).pose
        if obs.depth is not None:
            self.map.integrate_scan(est, obs.depth)
        if obs.goal_distance < self.done_threshold:
            self.prev_action = Action.DONE
            return Action.DONE
        scores = score_actions(self.map.occupied, self.map.cell_size, est,
                               obs.goal_distance, obs.goal_bearing,
                               self.cfg, self.kin, self._rng)
        action = pick_min_score(scores)
        self.prev_action = action
        return action


_TIE_ORDER = {Action.FORWARD: 0, Action.TURN_LEFT: 1, Action.TURN_RIGHT: 2}


def pick_min_score(scores: dict[Action, float]) -> Action:
    """Argmin with the fixed tie-break order Forward, TurnLeft, TurnRight."""
    return min(scores, key=lambda a: (scores[a], _TIE_ORDER[a]))


def _seed_int(seed) -> int:
    if isinstance(seed, int):
        return seed
    return hash(seed) & 0x7FFFFFFF


def _mix(seed, salt: int) -> int:
    """Deterministic int seed from (seed, salt); int hashing is stable
    across processes, which the parallel-determinism contract relies on."""
    return (_seed_int(seed) * 1_000_003 + salt) & 0x7FFFFFFFFFFFFFFF
