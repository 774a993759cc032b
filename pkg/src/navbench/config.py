"""Single declarative configuration merging all module knobs.

YAML layout mirrors the module structure; every key is optional and
defaults to the module defaults. CLI flags override file values.

    kinematics: {step_len: 0.1, turn_step_deg: 10.0, collision_mode: slide}
    body:       {radius: 0.1, height: 1.09}
    sensor:     {fov_deg: 90.0, n_rays: 256, max_range: 4.0, min_range: 0.001}
    mapper:     {occupied_threshold: 2}
    localizer:  {kind: perfect, sigma_lin: 0.0, sigma_ang: 0.0, ...}
    controller: {d1: 0.5, d2: 0.15, phi_deg: 15.0, p_random: 0.1,
                 done_threshold: null}   # null -> scenario success radius
    predictor:  {horizons: [1,2,4,8,12,16], n_rollouts: 64, ...}
    harness:    {lenient_success: false}
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .beliefs import PredictorConfig
from .localization import LocalizerConfig
from .locomotion import ControllerConfig
from .world import AgentBody, CollisionMode, KinematicsConfig, SensorConfig


@dataclass
class BenchConfig:
    kin: KinematicsConfig = field(default_factory=KinematicsConfig)
    body: AgentBody = field(default_factory=AgentBody)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    localizer: LocalizerConfig = field(default_factory=LocalizerConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    mapper_threshold: int = 2
    done_threshold: float | None = None  # None -> scenario success radius
    lenient_success: bool = False

    def controller_for(self, success_radius: float) -> ControllerConfig:
        threshold = self.done_threshold
        if threshold is None:
            threshold = success_radius
        return dataclasses.replace(self.controller, done_threshold=threshold)


def _build(cls, data: dict, **extra):
    return cls(**{**data, **extra})


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> BenchConfig:
    raw: dict = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text())
        if loaded is not None:
            if not isinstance(loaded, dict):
                raise ValueError(f"{path}: config must be a mapping")
            raw = loaded
    if overrides:
        for section, values in overrides.items():
            raw.setdefault(section, {}).update(values)

    kin_raw = dict(raw.get("kinematics", {}))
    if "turn_step_deg" in kin_raw:
        kin_raw["turn_step"] = math.radians(kin_raw.pop("turn_step_deg"))
    if "collision_mode" in kin_raw:
        kin_raw["collision_mode"] = CollisionMode(kin_raw["collision_mode"])
    sensor_raw = dict(raw.get("sensor", {}))
    if "fov_deg" in sensor_raw:
        sensor_raw["fov"] = math.radians(sensor_raw.pop("fov_deg"))
    controller_raw = dict(raw.get("controller", {}))
    if "phi_deg" in controller_raw:
        controller_raw["phi"] = math.radians(controller_raw.pop("phi_deg"))
    done_threshold = controller_raw.pop("done_threshold", None)
    localizer_raw = dict(raw.get("localizer", {}))
    if "theta_step_deg" in localizer_raw:
        localizer_raw["theta_step"] = math.radians(localizer_raw.pop("theta_step_deg"))
    predictor_raw = dict(raw.get("predictor", {}))
    for key in ("horizons", "horizon_weights"):
        if key in predictor_raw and predictor_raw[key] is not None:
            predictor_raw[key] = tuple(predictor_raw[key])
    mapper_raw = dict(raw.get("mapper", {}))
    harness_raw = dict(raw.get("harness", {}))

    return BenchConfig(
        kin=_build(KinematicsConfig, kin_raw),
        body=_build(AgentBody, dict(raw.get("body", {}))),
        sensor=_build(SensorConfig, sensor_raw),
        localizer=_build(LocalizerConfig, localizer_raw),
        controller=_build(ControllerConfig, controller_raw),
        predictor=_build(PredictorConfig, predictor_raw),
        mapper_threshold=int(mapper_raw.get("occupied_threshold", 2)),
        done_threshold=done_threshold,
        lenient_success=bool(harness_raw.get("lenient_success", False)),
    )
