"""Desk-scale PointGoal navigation benchmark.

A 2D grid world with a disc agent and a 1D depth sensor, a modular
navigation pipeline (mapping, localization, incremental planning,
waypoint locomotion), a blind baseline, a belief-map action-selection
agent, an evaluation harness (SR / SPL / pace), and a teleoperation
server for human baselines.
"""

__version__ = "0.1.0"
