"""Lifelong warehouse fleet simulator with flow-based task scheduling.

The package simulates fleets of agents serving an endless stream of
two-errand pickup-and-delivery tasks on grid maps. Schedulers assign
goals to free agents (nearest-task greedy, global optimal matching, or
a region-flow pipeline driven by a guidance distribution), a PIBT
planner executes collision-free steps, and the engine collects
throughput, latency, and conflict metrics.
"""

__version__ = "0.1.0"
