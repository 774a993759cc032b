import dataclasses
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navbench import report
from navbench.agents import BlindAgent
from navbench.config import BenchConfig, load_config
from navbench.episode import (REASON_AGENT_ERROR, REASON_DONE_OUTSIDE,
                              REASON_REACHED, REASON_TIMED_OUT, EpisodeResult,
                              run_episode)
from navbench.locomotion import ControllerConfig
from navbench.mapgen import GeneratorConfig, generate_map
from navbench.metrics import build_report, cumulative, pace, spl, sr
from navbench.scenarios import (Scenario, ScenarioError, disc_feasible,
                                generate_scenarios, load_scenarios,
                                save_scenarios, validate_scenario)
from navbench.suite import run_scenario, run_suite, trajectory_length
from navbench.world import Action, Pose, save_map

from conftest import open_world


def result(success=True, shortest=10.0, executed=10.0, frac=0.2, steps=100,
           reason=REASON_REACHED, sid="s", agent="a"):
    return EpisodeResult(scenario_id=sid, agent=agent, success=success,
                         shortest=shortest, executed=executed,
                         budget_frac=frac if success else 1.0,
                         steps_used=steps, reason=reason)


# ---------------------------------------------------------------------------
# run_episode

def test_blind_reaches_goal_in_open_room():
    world = open_world(40, 30)
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (2.55, 1.55), seed=1)
    r = run_episode(BlindAgent(ControllerConfig()), world, scenario,
                    agent_name="blind")
    assert r.success
    assert r.reason == REASON_REACHED
    assert 0.0 < r.budget_frac < 1.0


def test_turn_only_agent_times_out():
    class Spinner:
        needs_depth = False

        def act(self, obs):
            return Action.TURN_LEFT

    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (2.55, 1.55))
    r = run_episode(Spinner(), world, scenario)
    assert not r.success
    assert r.reason == REASON_TIMED_OUT
    assert r.budget_frac == 1.0
    assert r.steps_used == scenario.budget


def test_immediate_done_outside_radius():
    class Quitter:
        needs_depth = False

        def act(self, obs):
            return Action.DONE

    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (3.05, 0.55))
    r = run_episode(Quitter(), world, scenario)
    assert not r.success
    assert r.reason == REASON_DONE_OUTSIDE
    assert r.budget_frac == 1.0  # failures charge the full budget


def test_agent_exception_aborts_as_failure():
    class Buggy:
        needs_depth = False

        def act(self, obs):
            raise RuntimeError("boom")

    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (2.55, 0.55))
    r = run_episode(Buggy(), world, scenario)
    assert not r.success
    assert r.reason == REASON_AGENT_ERROR


def test_non_action_return_aborts():
    class Wrong:
        needs_depth = False

        def act(self, obs):
            return "forward"

    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (2.55, 0.55))
    r = run_episode(Wrong(), world, scenario)
    assert r.reason == REASON_AGENT_ERROR


def test_lenient_success_toggle():
    class Creeper:
        # drives at the goal but never says Done
        needs_depth = False

        def __init__(self):
            self.inner = BlindAgent(ControllerConfig(done_threshold=1e-9))

        def act(self, obs):
            a = self.inner.act(obs)
            return Action.FORWARD if a is Action.DONE else a

    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.0), (2.55, 0.55), budget=60)
    strict = run_episode(Creeper(), world, scenario)
    assert not strict.success and strict.reason == REASON_TIMED_OUT
    lenient = run_episode(Creeper(), world, scenario, lenient_success=True)
    assert lenient.success


def test_trajectory_self_consistency():
    world = open_world()
    scenario = Scenario("t", "", Pose(0.55, 0.55, 0.3), (2.55, 1.55))
    r = run_episode(BlindAgent(ControllerConfig()), world, scenario,
                    record_trajectory=True)
    assert r.trajectory[-1][1] is None  # terminal pose entry
    assert trajectory_length(r) == pytest.approx(r.executed, abs=1e-9)


# ---------------------------------------------------------------------------
# metrics

def test_sr_examples():
    rs = [result(True), result(True), result(False), result(False)]
    assert sr(rs) == 0.5
    assert sr([result(True)] * 3) == 1.0
    assert sr([result(False)] * 3) == 0.0
    with pytest.raises(ValueError):
        sr([])


def test_spl_golden_fixture():
    assert spl([result(True, shortest=10.0, executed=20.0)]) == pytest.approx(0.5)


def test_spl_clamps_when_executed_shorter():
    assert spl([result(True, shortest=10.0, executed=7.0)]) == 1.0


def test_spl_failure_contributes_zero():
    assert spl([result(False, executed=1.0)]) == 0.0


def test_pace_examples():
    assert pace([result(True, frac=100 / 500)]) == pytest.approx(0.8)
    assert pace([result(False)]) == 0.0
    assert pace([result(True, frac=0.0)]) == 1.0


def test_cumulative_fixture():
    rs = [result(True, shortest=1.0), result(False, shortest=2.0),
          result(True, shortest=3.0)]
    assert cumulative(rs, "sr", 2.5) == pytest.approx(0.5)
    assert cumulative(rs, "sr", 100.0) == sr(rs)
    assert cumulative(rs, "sr", 0.5) is None


@settings(max_examples=100)
@given(st.lists(st.tuples(st.booleans(), st.floats(0.1, 50), st.floats(0, 60),
                          st.floats(0, 1)), min_size=1, max_size=40))
def test_spl_le_sr_and_bounds(items):
    rs = [result(success=s, shortest=l, executed=p, frac=f)
          for s, l, p, f in items]
    assert 0.0 <= spl(rs) <= sr(rs) <= 1.0
    assert 0.0 <= pace(rs) <= 1.0


# ---------------------------------------------------------------------------
# scenarios

def test_generate_scenarios_deterministic_bytes(tmp_path):
    m = generate_map(7, GeneratorConfig(width=30, height=24, rooms=(1, 2),
                                        clutter=0.05))
    map_path = tmp_path / "m.map"
    save_map(m, map_path)
    files = []
    for k in range(2):
        scens = generate_scenarios([map_path], per_map=5, seed=42)
        out = tmp_path / f"s{k}.csv"
        save_scenarios(scens, out)
        files.append(out.read_bytes())
    assert files[0] == files[1]


def test_generated_scenarios_valid_and_feasible(tmp_path):
    m = generate_map(3, GeneratorConfig(width=40, height=30, rooms=(2, 3),
                                        clutter=0.1))
    map_path = tmp_path / "m.map"
    save_map(m, map_path)
    scens = generate_scenarios([map_path], per_map=6, seed=1, min_length=1.0)
    assert len(scens) == 6
    for s in scens:
        assert validate_scenario(m, s) >= 1.0
        assert disc_feasible(m, s)


def test_scenario_round_trip(tmp_path):
    m = generate_map(5, GeneratorConfig(width=30, height=24))
    map_path = tmp_path / "m.map"
    save_map(m, map_path)
    scens = generate_scenarios([map_path], per_map=3, seed=9)
    path = tmp_path / "suite.csv"
    save_scenarios(scens, path)
    again = load_scenarios(path)
    assert again == scens


def test_scenario_bad_header_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,map\nx,y\n")
    with pytest.raises(ScenarioError, match="bad header"):
        load_scenarios(path)


def test_unreachable_goal_rejected():
    rows_world = open_world(10, 10)
    rows_world.occupancy[:, 5] = True  # split the world
    s = Scenario("t", "", Pose(0.25, 0.25, 0.0), (0.85, 0.25))
    with pytest.raises(ScenarioError, match="unreachable"):
        validate_scenario(rows_world, s)


# ---------------------------------------------------------------------------
# suite runner + persistence

@pytest.fixture(scope="module")
def small_suite(tmp_path_factory):
    base = tmp_path_factory.mktemp("suite")
    paths = []
    for seed in (1, 2):
        m = generate_map(seed, GeneratorConfig(width=36, height=28,
                                               rooms=(1, 2), clutter=0.08))
        p = base / f"m{seed}.map"
        save_map(m, p)
        paths.append(p)
    scens = generate_scenarios(paths, per_map=3, seed=11, min_length=1.0)
    return scens


def test_run_suite_parallelism_invariant(small_suite):
    cfg = BenchConfig()
    seq = run_suite("blind", small_suite, cfg, parallelism=1)
    par = run_suite("blind", small_suite, cfg, parallelism=4)
    rows_seq = [report.result_row(r) for r in seq.results]
    rows_par = [report.result_row(r) for r in par.results]
    assert rows_seq == rows_par
    assert seq.sr == par.sr and seq.spl == par.spl and seq.pace == par.pace


def test_run_suite_empty_rejected():
    with pytest.raises(ValueError):
        run_suite("blind", [], BenchConfig())


def test_report_files_round_trip(tmp_path, small_suite):
    cfg = BenchConfig()
    rep = run_suite("blind", small_suite, cfg)
    report.write_report(rep, tmp_path)
    assert (tmp_path / "results_blind.csv").exists()
    assert (tmp_path / "summary_blind.json").exists()
    curves = (tmp_path / "curves_blind.csv").read_text()
    assert curves.startswith("metric,L_m,value")
    import json

    summary = json.loads((tmp_path / "summary_blind.json").read_text())
    assert summary["episodes"] == len(small_suite)


def test_curves_na_marker(tmp_path):
    rs = [result(True, shortest=5.0)]
    rep = build_report(rs, agent="x")
    rep.curves["sr"].insert(0, (0.1, None))
    report.write_curves(rep, tmp_path / "c.csv")
    assert "NA" in (tmp_path / "c.csv").read_text()


def test_plot_curves_svg(tmp_path, small_suite):
    cfg = BenchConfig()
    rep = run_suite("blind", small_suite, cfg)
    report.plot_curves([rep], tmp_path / "curves.svg")
    head = (tmp_path / "curves.svg").read_text()[:300]
    assert "<svg" in head


def test_config_file_round_trip(tmp_path):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(
        "kinematics: {step_len: 0.2, turn_step_deg: 30}\n"
        "controller: {d1: 0.7, done_threshold: 0.4}\n"
        "localizer: {kind: scanmatch, sigma_lin: 0.015, window_cells: 3}\n"
        "mapper: {occupied_threshold: 5}\n"
        "harness: {lenient_success: true}\n")
    cfg = load_config(cfg_path)
    assert cfg.kin.step_len == 0.2
    assert cfg.kin.turn_step == pytest.approx(math.radians(30))
    assert cfg.controller.d1 == 0.7
    assert cfg.done_threshold == 0.4
    assert cfg.localizer.kind == "scanmatch"
    assert cfg.mapper_threshold == 5
    assert cfg.lenient_success is True
    # done_threshold None defers to the scenario radius
    default = load_config()
    assert default.controller_for(0.33).done_threshold == 0.33
