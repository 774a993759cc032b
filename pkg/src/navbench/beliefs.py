"""Egocentric belief and measurement maps for distance-greedy action
selection.

A belief map holds a normalized distribution over the agent's expected
position tau steps after committing to an action now; the measurement map
holds the Euclidean distance from each cell center to the goal. Their dot
product is the expected future goal distance, and the agent picks the
action minimizing it over a set of horizons.

Both grids are egocentric: the agent sits in the center cell facing the
+column direction ("right"); the row index grows to the agent's left.
The predictor here is a model-based Monte-Carlo rollout surrogate: it
simulates the agent's own controller on the agent's own obstacle map
(unknown cells free), so the selection math is exercised without any
learned component.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .locomotion import turn_toward
from .world import Action, KinematicsConfig, MOVE_ACTIONS, Pose, wrap_angle

# Per-cell floor keeping empty cells nonzero-safe under the softmax-style
# normalization (weights proportional to count + floor).
COUNT_FLOOR = 1e-6


@dataclass(frozen=True)
class PredictorConfig:
    horizons: tuple[int, ...] = (1, 2, 4, 8, 12, 16)
    n_rollouts: int = 64
    rollout_policy: str = "greedy"  # greedy | random
    rollout_p_random: float = 0.1  # 0 makes greedy rollouts deterministic
    grid_size: int = 25
    pitch: float = 0.2  # meters per cell; 25 x 0.2 covers +-2.4 m
    steer_cone: float = math.radians(15.0)
    horizon_weights: tuple[float, ...] | None = None  # uniform when None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError("horizons must be strictly increasing")
        if self.n_rollouts < 1:
            raise ValueError("need at least one rollout")
        if self.grid_size % 2 == 0:
            raise ValueError("grid_size must be odd (a center cell must exist)")
        if self.rollout_policy not in ("greedy", "random"):
            raise ValueError(f"unknown rollout policy {self.rollout_policy!r}")
        if self.horizon_weights is not None \
                and len(self.horizon_weights) != len(self.horizons):
            raise ValueError("horizon_weights must match horizons")

    def weights(self) -> np.ndarray:
        if self.horizon_weights is None:
            return np.full(len(self.horizons), 1.0 / len(self.horizons))
        w = np.asarray(self.horizon_weights, dtype=float)
        return w / w.sum()


def measurement_map(goal_distance: float, goal_bearing: float,
                    size: int = 25, pitch: float = 0.2) -> np.ndarray:
    """Euclidean distance from each cell center to the goal placed at
    (goal_distance, goal_bearing) in the egocentric frame."""
    c0 = size // 2
    fwd = (np.arange(size) - c0) * pitch  # per column
    left = (np.arange(size) - c0) * pitch  # per row
    gx = goal_distance * math.cos(goal_bearing)
    gy = goal_distance * math.sin(goal_bearing)
    return np.hypot(fwd[None, :] - gx, left[:, None] - gy)


def expected_measurement(belief: np.ndarray, mmap: np.ndarray) -> float:
    """Elementwise dot product of a belief map with a measurement map."""
    if belief.shape != mmap.shape:
        raise ValueError(f"grid geometry mismatch: {belief.shape} vs {mmap.shape}")
    return float(np.vdot(belief, mmap))


def normalize_counts(counts: np.ndarray) -> np.ndarray:
    """Softmax of log(count + floor): weights proportional to count + floor,
    summing to 1, with empty cells kept nonzero-safe."""
    w = counts.astype(float) + COUNT_FLOOR
    return w / w.sum()


def bin_offset(displacement: float, pitch: float) -> int:
    """Grid offset of a displacement. The epsilon biases displacements
    sitting exactly on a bin boundary (e.g. one 0.1 m step against the
    0.2 m pitch) deterministically forward; plain rounding would flip on
    float noise from the frame rotation."""
    return int(math.floor(displacement / pitch + 0.5 + 1e-9))


def _rollout_step(x: float, y: float, heading: float, action: Action,
                  occupied: np.ndarray | None, cell_size: float,
                  kin: KinematicsConfig):
    """Point-agent dynamics on the belief rollouts: a forward move is
    cancelled when its endpoint lands in an occupied map cell; unknown and
    out-of-extent cells are free."""
    if action is Action.TURN_LEFT:
        return x, y, heading + kin.turn_step
    if action is Action.TURN_RIGHT:
        return x, y, heading - kin.turn_step
    nx = x + kin.step_len * math.cos(heading)
    ny = y + kin.step_len * math.sin(heading)
    if occupied is not None:
        ix = int(math.floor(nx / cell_size))
        iy = int(math.floor(ny / cell_size))
        if (0 <= ix < occupied.shape[1] and 0 <= iy < occupied.shape[0]
                and occupied[iy, ix]):
            return x, y, heading
    return nx, ny, heading


def predict_beliefs(occupied: np.ndarray | None, cell_size: float,
                    est_pose: Pose, first_action: Action,
                    goal_point: tuple[float, float], cfg: PredictorConfig,
                    kin: KinematicsConfig,
                    rng: random.Random) -> dict[int, np.ndarray]:
    """Monte-Carlo belief maps: execute ``first_action`` then follow the
    rollout policy for max(horizons) steps, binning the egocentric
    displacement at each horizon. Deterministic for a fixed rng state."""
    size = cfg.grid_size
    c0 = size // 2
    h_max = cfg.horizons[-1]
    horizon_set = set(cfg.horizons)
    counts = {tau: np.zeros((size, size), dtype=np.int64) for tau in cfg.horizons}

    x0, y0, h0 = est_pose.x, est_pose.y, est_pose.heading
    cos0 = math.cos(h0)
    sin0 = math.sin(h0)
    gx, gy = goal_point

    for _ in range(cfg.n_rollouts):
        x, y, heading = x0, y0, h0
        action = first_action
        for t in range(1, h_max + 1):
            x, y, heading = _rollout_step(x, y, heading, action, occupied,
                                          cell_size, kin)
            if t in horizon_set:
                dxw = x - x0
                dyw = y - y0
                fwd = dxw * cos0 + dyw * sin0
                left = -dxw * sin0 + dyw * cos0
                col = c0 + bin_offset(fwd, cfg.pitch)
                row = c0 + bin_offset(left, cfg.pitch)
                if 0 <= col < size and 0 <= row < size:
                    counts[t][row, col] += 1
            if t == h_max:
                break
            if cfg.rollout_policy == "random" or rng.random() < cfg.rollout_p_random:
                action = MOVE_ACTIONS[rng.randrange(3)]
            else:
                bearing = wrap_angle(math.atan2(gy - y, gx - x) - heading)
                action = turn_toward(bearing, cfg.steer_cone) or Action.FORWARD
    return {tau: normalize_counts(c) for tau, c in counts.items()}


def score_actions(occupied: np.ndarray | None, cell_size: float,
                  est_pose: Pose, goal_distance: float, goal_bearing: float,
                  cfg: PredictorConfig, kin: KinematicsConfig,
                  rng: random.Random) -> dict[Action, float]:
    """Expected future goal distance per candidate action, summed over
    horizons with the configured weights."""
    mmap = measurement_map(goal_distance, goal_bearing, cfg.grid_size, cfg.pitch)
    from .world import project_polar

    goal_point = project_polar(est_pose, goal_distance, goal_bearing)
    weights = cfg.weights()
    scores = {}
    for action in MOVE_ACTIONS:
        beliefs = predict_beliefs(occupied, cell_size, est_pose, action,
                                  goal_point, cfg, kin, rng)
        scores[action] = float(sum(
            w * expected_measurement(beliefs[tau], mmap)
            for w, tau in zip(weights, cfg.horizons)))
    return scores
