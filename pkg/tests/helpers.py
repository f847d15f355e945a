"""Shared demo constructions for task-level tests."""

import numpy as np

from lfdkit.trajectory import Trajectory

from oracles import min_jerk

# desk-scale pick-and-place: descend onto the part, lift it, carry it over
PICK_PLACE_START = np.array([0.40, 0.00, 0.20])
PICK_PLACE_OFFSETS = {
    "descend": np.array([0.0, 0.0, -0.05]),
    "lift": np.array([0.0, 0.0, 0.05]),
    "transport": np.array([0.10, 0.0, 0.0]),
}


def min_jerk_demo(start, goal, duration=1.0, hz=100):
    t, q = min_jerk(start, goal, duration, int(round(duration * hz)) + 1)
    return Trajectory(t, q)


def pick_place_demos(start=PICK_PLACE_START):
    """Ordered (name, demo) pairs tracing the pick-and-place motion."""
    demos = []
    position = np.asarray(start, dtype=float)
    for name, offset in PICK_PLACE_OFFSETS.items():
        demos.append((name, min_jerk_demo(position, position + offset)))
        position = position + offset
    return demos
