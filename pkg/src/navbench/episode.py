"""Episode execution: one shared engine drives both in-process agents and
the teleoperation server, so a replayed action sequence yields an
identical result either way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .agents import Observation
from .scenarios import Scenario, validate_scenario
from .world import (Action, AgentBody, KinematicsConfig, Pose, SensorConfig,
                    WorldMap, goal_polar, raycast, step, wrap_angle)

REASON_REACHED = "Reached"
REASON_DONE_OUTSIDE = "DoneOutsideRadius"
REASON_TIMED_OUT = "TimedOut"
REASON_AGENT_ERROR = "AgentError"


@dataclass
class EpisodeResult:
    scenario_id: str
    agent: str
    success: bool
    shortest: float  # meters, oracle
    executed: float  # meters, sum of consecutive displacements
    budget_frac: float  # fraction of the action budget used; 1 on failure
    steps_used: int  # non-Done actions taken
    reason: str
    # (pose before the action, action) per step, plus a (terminal pose, None) entry
    trajectory: list[tuple[Pose, Action | None]] = field(default_factory=list)

    @property
    def spl_term(self) -> float:
        if not self.success:
            return 0.0
        return self.shortest / max(self.shortest, self.executed)

    @property
    def pace_term(self) -> float:
        return 1.0 - self.budget_frac


class EpisodeEngine:
    """Turn-based simulator loop for one episode.

    The budget counts movement actions; Done terminates without consuming
    a step, and success requires Done inside the success radius (the
    lenient flag instead grants success whenever the budget expires inside
    the radius).
    """

    def __init__(self, world: WorldMap, scenario: Scenario,
                 kin: KinematicsConfig = KinematicsConfig(),
                 body: AgentBody = AgentBody(),
                 sensor: SensorConfig = SensorConfig(),
                 agent_name: str = "", needs_depth: bool = True,
                 lenient_success: bool = False,
                 record_trajectory: bool = False):
        self.world = world
        self.scenario = scenario
        self.kin = kin
        self.body = body
        self.sensor = sensor
        self.agent_name = agent_name
        self.needs_depth = needs_depth
        self.lenient_success = lenient_success
        self.shortest = validate_scenario(world, scenario, body)

        self.pose = scenario.start
        self._prev_pose: Pose | None = None
        self.steps_used = 0
        self.executed = 0.0
        self.prev_action: Action | None = None
        self.finished = False
        self._success = False
        self._reason = ""
        self.trajectory: list[tuple[Pose, Action]] = []
        self._record = record_trajectory

    @property
    def budget_remaining(self) -> int:
        return self.scenario.budget - self.steps_used

    def goal_distance(self) -> float:
        return math.hypot(self.scenario.goal[0] - self.pose.x,
                          self.scenario.goal[1] - self.pose.y)

    def observation(self) -> Observation:
        if self.finished:
            raise RuntimeError("episode already finished")
        dist, bearing = goal_polar(self.pose, self.scenario.goal)
        depth = raycast(self.world, self.pose, self.sensor) if self.needs_depth else None
        odom = None
        if self._prev_pose is not None:
            prev = self._prev_pose
            dxw = self.pose.x - prev.x
            dyw = self.pose.y - prev.y
            c = math.cos(prev.heading)
            s = math.sin(prev.heading)
            odom = (dxw * c + dyw * s, -dxw * s + dyw * c,
                    wrap_angle(self.pose.heading - prev.heading))
        return Observation(goal_distance=dist, goal_bearing=bearing,
                           depth=depth, prev_action=self.prev_action,
                           step_index=self.steps_used,
                           budget_remaining=self.budget_remaining,
                           odometry=odom, gt_pose=self.pose)

    def apply(self, action: Action) -> None:
        if self.finished:
            raise RuntimeError("episode already finished")
        if self._record:
            self.trajectory.append((self.pose, action))
        if action is Action.DONE:
            inside = self.goal_distance() <= self.scenario.success_radius
            self._finish(inside, REASON_REACHED if inside else REASON_DONE_OUTSIDE)
            return
        new_pose = step(self.world, self.pose, action, self.kin, self.body)
        self.executed += math.hypot(new_pose.x - self.pose.x,
                                    new_pose.y - self.pose.y)
        self._prev_pose = self.pose
        self.pose = new_pose
        self.prev_action = action
        self.steps_used += 1
        if self.steps_used >= self.scenario.budget:
            inside = self.goal_distance() <= self.scenario.success_radius
            if self.lenient_success and inside:
                self._finish(True, REASON_REACHED)
            else:
                self._finish(False, REASON_TIMED_OUT)

    def abort(self, reason: str) -> None:
        if not self.finished:
            self._finish(False, reason)

    def _finish(self, success: bool, reason: str) -> None:
        self.finished = True
        self._success = success
        self._reason = reason
        if self._record:
            self.trajectory.append((self.pose, None))  # terminal pose

    def result(self) -> EpisodeResult:
        if not self.finished:
            raise RuntimeError("episode still running")
        frac = self.steps_used / self.scenario.budget if self._success else 1.0
        return EpisodeResult(
            scenario_id=self.scenario.scenario_id, agent=self.agent_name,
            success=self._success, shortest=self.shortest,
            executed=self.executed, budget_frac=frac,
            steps_used=self.steps_used, reason=self._reason,
            trajectory=self.trajectory)


def run_episode(agent, world: WorldMap, scenario: Scenario,
                kin: KinematicsConfig = KinematicsConfig(),
                body: AgentBody = AgentBody(),
                sensor: SensorConfig = SensorConfig(),
                agent_name: str = "", lenient_success: bool = False,
                record_trajectory: bool = False) -> EpisodeResult:
    """Tick the simulator against an agent until Done or budget exhaustion.
    Agent exceptions abort the episode as a failure."""
    engine = EpisodeEngine(world, scenario, kin=kin, body=body, sensor=sensor,
                           agent_name=agent_name,
                           needs_depth=getattr(agent, "needs_depth", True),
                           lenient_success=lenient_success,
                           record_trajectory=record_trajectory)
    while not engine.finished:
        try:
            action = agent.act(engine.observation())
        except Exception:  # noqa: BLE001 - agent bugs must not kill the suite
            engine.abort(REASON_AGENT_ERROR)
            break
        if not isinstance(action, Action):
            engine.abort(REASON_AGENT_ERROR)
            break
        engine.apply(action)
    return engine.result()
