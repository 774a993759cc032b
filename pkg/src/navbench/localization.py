"""Per-step pose estimation with a Failure flag.

Three pluggable estimators stand in for a visual SLAM system:

* Perfect — returns the simulator pose (the privileged "ground-truth pose"
  condition).
* Odometry — dead-reckons the nominal kinematic model plus zero-mean
  Gaussian noise per step; never fails.
* ScanMatcher — dead-reckons a prediction, then exhaustively scores a small
  window of candidate poses by the fraction of scan endpoints landing on
  occupied map cells. Degrades and fails in sparsely-mapped areas, which is
  the qualitative failure mode of keypoint SLAM.

All estimators are seeded at the true start pose (known-initial-pose
convention); only subsequent poses are estimated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .mapping import ObstacleMap
from .world import MOVE_ACTIONS, Action, DepthScan, KinematicsConfig, Pose


class PoseStatus(Enum):
    OK = "ok"
    FAILURE = "failure"


@dataclass(frozen=True)
class PoseEstimate:
    pose: Pose  # on Failure: the last Ok estimate, for logging only
    status: PoseStatus


@dataclass(frozen=True)
class LocalizerConfig:
    kind: str = "perfect"  # perfect | odometry | scanmatch
    sigma_lin: float = 0.0  # meters/step
    sigma_ang: float = 0.0  # radians/step
    window_cells: int = 2
    window_theta_steps: int = 2
    theta_step: float = math.radians(2.5)
    match_threshold: float = 0.4
    bootstrap_min_occupied: int = 30
    # prior weight: score penalty per cell / per theta step of offset from
    # the dead-reckoned prediction. Corridors are translationally ambiguous
    # (the aperture problem); without a prior the argmax random-walks along
    # walls and ghosts the map.
    offset_penalty: float = 0.01

    def __post_init__(self):
        if self.sigma_lin < 0 or self.sigma_ang < 0:
            raise ValueError("noise sigmas must be >= 0")
        if not (0.0 <= self.match_threshold <= 1.0):
            raise ValueError("match_threshold must be in [0, 1]")
        if self.kind not in ("perfect", "odometry", "scanmatch"):
            raise ValueError(f"unknown localizer kind {self.kind!r}")


def apply_nominal(pose: Pose, action: Action, kin: KinematicsConfig) -> Pose:
    """The collision-free kinematic model used for dead reckoning."""
    if action is Action.FORWARD:
        x, y = pose.forward_point(kin.step_len)
        return Pose(x, y, pose.heading)
    if action is Action.TURN_LEFT:
        return pose.turned(kin.turn_step)
    if action is Action.TURN_RIGHT:
        return pose.turned(-kin.turn_step)
    return pose


class PerfectLocalizer:
    in_bootstrap = False

    def __init__(self, initial_pose: Pose):
        self._est = initial_pose

    @property
    def dead_reckoned(self) -> Pose:
        return self._est

    def observe(self, action_taken: Action | None, scan: DepthScan | None,
                obstacle_map: ObstacleMap, gt_pose: Pose | None,
                odometry=None) -> PoseEstimate:
        if gt_pose is None:
            raise ValueError("perfect localizer needs the simulator pose")
        self._est = gt_pose
        return PoseEstimate(gt_pose, PoseStatus.OK)


class OdometryLocalizer:
    """Integrates the executed body-frame motion readings (wheel-odometer
    style) with zero-mean Gaussian noise per step; without a reading it
    falls back to dead-reckoning the commanded action through the nominal
    kinematic model."""

    in_bootstrap = False

    def __init__(self, initial_pose: Pose, kin: KinematicsConfig,
                 cfg: LocalizerConfig, rng: np.random.Generator):
        self._est = initial_pose
        self._kin = kin
        self._cfg = cfg
        self._rng = rng

    @property
    def dead_reckoned(self) -> Pose:
        return self._est

    def _advance(self, action_taken: Action | None,
                 odometry: tuple[float, float, float] | None) -> Pose:
        est = self._est
        if odometry is not None:
            fwd, left, dheading = odometry
            c = math.cos(est.heading)
            s = math.sin(est.heading)
            est = Pose(est.x + fwd * c - left * s,
                       est.y + fwd * s + left * c,
                       est.heading + dheading)
        elif action_taken in MOVE_ACTIONS:
            est = apply_nominal(est, action_taken, self._kin)
        else:
            return est
        nl = self._rng.normal(0.0, 1.0, 3)
        return Pose(est.x + nl[0] * self._cfg.sigma_lin,
                    est.y + nl[1] * self._cfg.sigma_lin,
                    est.heading + nl[2] * self._cfg.sigma_ang)

    def observe(self, action_taken, scan, obstacle_map, gt_pose,
                odometry=None) -> PoseEstimate:
        self._est = self._advance(action_taken, odometry)
        return PoseEstimate(self._est, PoseStatus.OK)


def _centered_offsets(n: int) -> list[int]:
    """0, +1, -1, ..., +n, -n — zero first so argmax ties prefer the
    dead-reckoned prediction."""
    out = [0]
    for k in range(1, n + 1):
        out.extend((k, -k))
    return out


class ScanMatcherLocalizer(OdometryLocalizer):
    """Correlative matching over a small pose window around the odometry
    prediction. Fails (status, not error) when the best candidate scores
    under match_threshold once the map holds enough occupied cells."""

    def __init__(self, initial_pose, kin, cfg, rng):
        super().__init__(initial_pose, kin, cfg, rng)
        self._last_ok = initial_pose
        self.in_bootstrap = True

    def observe(self, action_taken, scan, obstacle_map, gt_pose,
                odometry=None) -> PoseEstimate:
        pred = self._advance(action_taken, odometry)
        self._est = pred
        self.in_bootstrap = (obstacle_map.occupied_count
                             < self._cfg.bootstrap_min_occupied)
        if self.in_bootstrap or scan is None:
            self._last_ok = pred
            return PoseEstimate(pred, PoseStatus.OK)

        cfg = self._cfg
        cs = obstacle_map.cell_size
        offsets_t = _centered_offsets(cfg.window_theta_steps)
        offsets_xy = _centered_offsets(cfg.window_cells)
        cand = np.empty((len(offsets_t) * len(offsets_xy) ** 2, 3))
        penalty = np.empty(cand.shape[0])
        i = 0
        for dt in offsets_t:
            heading = pred.heading + dt * cfg.theta_step
            for dx in offsets_xy:
                for dy in offsets_xy:
                    cand[i, 0] = pred.x + dx * cs
                    cand[i, 1] = pred.y + dy * cs
                    cand[i, 2] = heading
                    penalty[i] = cfg.offset_penalty * (abs(dx) + abs(dy)
                                                       + abs(dt))
                    i += 1
        scores = np.empty(cand.shape[0])
        _kernels.score_match_candidates(obstacle_map.occupied, cs,
                                        scan.ranges, scan.valid,
                                        scan.bearings, cand, scores)
        # the failure decision uses the raw score; the pose argmax is
        # prior-weighted so ambiguous evidence keeps the prediction
        if float(scores.max()) < cfg.match_threshold:
            return PoseEstimate(self._last_ok, PoseStatus.FAILURE)
        best = int(np.argmax(scores - penalty))
        est = Pose(cand[best, 0], cand[best, 1], cand[best, 2])
        self._est = est
        self._last_ok = est
        return PoseEstimate(est, PoseStatus.OK)


def make_localizer(cfg: LocalizerConfig, kin: KinematicsConfig,
                   initial_pose: Pose, seed) -> PerfectLocalizer | OdometryLocalizer:
    rng = np.random.default_rng(seed)
    if cfg.kind == "perfect":
        return PerfectLocalizer(initial_pose)
    if cfg.kind == "odometry":
        return OdometryLocalizer(initial_pose, kin, cfg, rng)
    return ScanMatcherLocalizer(initial_pose, kin, cfg, rng)
