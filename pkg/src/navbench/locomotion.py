"""Rule-based path-following controller for the discrete action space.

A waypoint is held at arc length d1 ahead of the agent's projection onto
the planned path, re-selected when the path changes or the agent closes to
within d2. The agent turns until the waypoint bearing is within phi, then
drives forward; with probability p_random a uniformly random non-Done
action is issued instead.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .world import MOVE_ACTIONS, Action, Pose, wrap_angle


@dataclass(frozen=True)
class ControllerConfig:
    d1: float = 0.5  # waypoint lookahead, meters
    d2: float = 0.15  # waypoint advance radius, meters
    phi: float = math.radians(15.0)  # steering cone half-angle
    p_random: float = 0.1
    done_threshold: float = 0.5  # defaults to the scenario success radius

    def __post_init__(self):
        if not (0 < self.d2 < self.d1):
            raise ValueError("need 0 < d2 < d1")
        if not (0.0 <= self.p_random < 1.0):
            raise ValueError("p_random must be in [0, 1)")
        if not (0.0 < self.phi < math.pi):
            raise ValueError("phi must be in (0, pi)")


def turn_toward(bearing: float, phi: float) -> Action | None:
    """Turn reducing |bearing| when outside the phi cone, else None.
    A bearing of exactly -pi (directly behind) breaks left."""
    if abs(bearing) <= phi:
        return None
    if bearing > 0.0 or bearing <= -math.pi + 1e-12:
        return Action.TURN_LEFT
    return Action.TURN_RIGHT


def select_waypoint(path_pts: np.ndarray, est_pose: Pose,
                    cfg: ControllerConfig,
                    line_of_sight=None) -> tuple[float, float]:
    """First point on the path polyline at arc length >= d1 past the
    agent's projection onto the path; the path end when the remainder is
    shorter.

    With a ``line_of_sight(x0, y0, x1, y1) -> bool`` predicate (visibility
    on the agent's own map), the waypoint is pulled back along the path to
    the farthest visible point: chasing a point across a cut corner
    otherwise wedges the agent against known obstacles.
    """
    pts = np.asarray(path_pts, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("path must be a non-empty (n, 2) array")
    if pts.shape[0] == 1:
        return (float(pts[0, 0]), float(pts[0, 1]))

    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))
    p = np.array([est_pose.x, est_pose.y])

    # projection of the agent onto the polyline (arc-length parameter)
    best_d2 = math.inf
    s0 = 0.0
    for i in range(seg.shape[0]):
        if seg_len[i] < 1e-12:
            continue
        t = float(np.dot(p - pts[i], seg[i]) / (seg_len[i] ** 2))
        t = min(max(t, 0.0), 1.0)
        q = pts[i] + t * seg[i]
        d2 = float(np.sum((p - q) ** 2))
        if d2 < best_d2:
            best_d2 = d2
            s0 = cum[i] + t * seg_len[i]

    def point_at(s: float) -> tuple[float, float]:
        if s >= cum[-1]:
            return (float(pts[-1, 0]), float(pts[-1, 1]))
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(max(i, 0), seg.shape[0] - 1)
        t = (s - cum[i]) / seg_len[i] if seg_len[i] > 0 else 0.0
        q = pts[i] + t * seg[i]
        return (float(q[0]), float(q[1]))

    target = min(s0 + cfg.d1, cum[-1])
    if line_of_sight is None:
        return point_at(target)
    floor = min(s0 + cfg.d2, cum[-1])
    s = target
    while s > floor:
        wp = point_at(s)
        if line_of_sight(est_pose.x, est_pose.y, wp[0], wp[1]):
            return wp
        s -= cfg.d2 / 2.0
    return point_at(floor)


class WaypointController:
    """Per-episode path follower; owns the waypoint and the random stream."""

    def __init__(self, cfg: ControllerConfig, rng: random.Random,
                 line_of_sight=None):
        self.cfg = cfg
        self._rng = rng
        self._los = line_of_sight
        self._waypoint: tuple[float, float] | None = None
        self._path: np.ndarray | None = None

    def forget_path(self) -> None:
        self._waypoint = None
        self._path = None

    def act(self, est_pose: Pose, path_pts: np.ndarray,
            goal_distance: float) -> Action:
        cfg = self.cfg
        if goal_distance < cfg.done_threshold:
            return Action.DONE
        if self._rng.random() < cfg.p_random:
            return MOVE_ACTIONS[self._rng.randrange(3)]

        changed = self._path is None or not np.array_equal(path_pts, self._path)
        if changed:
            self._path = np.array(path_pts, copy=True)
            self._waypoint = select_waypoint(path_pts, est_pose, cfg, self._los)
        elif (self._waypoint is None
              or math.hypot(self._waypoint[0] - est_pose.x,
                            self._waypoint[1] - est_pose.y) < cfg.d2):
            self._waypoint = select_waypoint(path_pts, est_pose, cfg, self._los)

        wx, wy = self._waypoint
        bearing = wrap_angle(math.atan2(wy - est_pose.y, wx - est_pose.x)
                             - est_pose.heading)
        turn = turn_toward(bearing, cfg.phi)
        return turn if turn is not None else Action.FORWARD
