"""Suite execution: build the agent for each scenario, run episodes with
per-episode isolation (optionally across processes), and aggregate
deterministically — the report is independent of the parallelism degree.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

from .agents import BeliefGreedyAgent, BlindAgent, ClassicAgent
from .config import BenchConfig
from .episode import EpisodeResult, run_episode
from .metrics import SuiteReport, build_report
from .scenarios import Scenario
from .world import WorldMap, load_map

AGENT_KINDS = ("blind", "classic", "belief")


@lru_cache(maxsize=64)
def _world_cache(map_path: str) -> WorldMap:
    return load_map(map_path)


def make_agent(kind: str, world: WorldMap, scenario: Scenario,
               config: BenchConfig):
    controller = config.controller_for(scenario.success_radius)
    if kind == "blind":
        return BlindAgent(controller)
    if kind == "classic":
        return ClassicAgent(
            start_pose=scenario.start,
            map_shape=(world.height, world.width),
            cell_size=world.cell_size, kin=config.kin,
            localizer_cfg=config.localizer, controller_cfg=controller,
            seed=scenario.seed, obstacle_threshold=config.mapper_threshold,
            sensor_max_range=config.sensor.max_range)
    if kind == "belief":
        return BeliefGreedyAgent(
            start_pose=scenario.start,
            map_shape=(world.height, world.width),
            cell_size=world.cell_size, kin=config.kin,
            predictor_cfg=config.predictor,
            done_threshold=controller.done_threshold,
            seed=scenario.seed, obstacle_threshold=config.mapper_threshold,
            sensor_max_range=config.sensor.max_range)
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")


def run_scenario(kind: str, scenario: Scenario, config: BenchConfig,
                 record_trajectory: bool = False) -> EpisodeResult:
    world = _world_cache(scenario.map_path)
    agent = make_agent(kind, world, scenario, config)
    return run_episode(agent, world, scenario, kin=config.kin,
                       body=config.body, sensor=config.sensor,
                       agent_name=kind, lenient_success=config.lenient_success,
                       record_trajectory=record_trajectory)


def _worker(args) -> EpisodeResult:
    kind, scenario, config, record = args
    return run_scenario(kind, scenario, config, record)


def run_suite(kind: str, scenarios: list[Scenario], config: BenchConfig,
              parallelism: int = 1,
              record_trajectories: bool = False) -> SuiteReport:
    """Execute every scenario and aggregate. Episodes are seeded from their
    scenarios, so scheduling order cannot change any row."""
    if not scenarios:
        raise ValueError("empty scenario set")
    jobs = [(kind, s, config, record_trajectories) for s in scenarios]
    if parallelism <= 1:
        results = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_worker, jobs, chunksize=1))
    # aggregation order is fixed by the scenario list, not completion order
    return build_report(results, agent=kind)


def trajectory_length(result: EpisodeResult) -> float:
    """Recompute the executed length from the logged trajectory (for
    self-consistency checks)."""
    import math

    total = 0.0
    poses = [p for p, _a in result.trajectory]
    for a, b in zip(poses, poses[1:]):
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total
