"""Task programs: an ordered sequence of taught motion primitives.

Each sub-task is a named trained model plus a goal rule; planning rolls the
sub-tasks out back to back, each one starting (at rest) where the previous
ended, so a whole task replans from any new start configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dmp import DmpModel, DmpParams, model_from_dict, model_to_dict, rollout, train
from .errors import FormatError, NumericError, ValidationError
from .trajectory import Trajectory

PROGRAM_SCHEMA = "lfd_task_program/1"

GOAL_ABSOLUTE = "absolute"
GOAL_RELATIVE = "relative"


@dataclass(frozen=True)
class GoalSpec:
    """How a sub-task's goal is resolved at planning time.

    absolute: the goal is the stored vector.
    relative: the goal is the sub-task's start plus the stored offset.
    """

    mode: str
    value: np.ndarray

    def __post_init__(self):
        if self.mode not in (GOAL_ABSOLUTE, GOAL_RELATIVE):
            raise ValidationError(f"unknown goal mode {self.mode!r}")
        object.__setattr__(self, "value", np.asarray(self.value, dtype=np.float64))

    @classmethod
    def absolute(cls, goal) -> "GoalSpec":
        return cls(GOAL_ABSOLUTE, np.asarray(goal, dtype=np.float64))

    @classmethod
    def relative(cls, offset) -> "GoalSpec":
        return cls(GOAL_RELATIVE, np.asarray(offset, dtype=np.float64))

    def resolve(self, segment_start: np.ndarray) -> np.ndarray:
        if self.mode == GOAL_ABSOLUTE:
            return self.value.copy()
        return segment_start + self.value


@dataclass(frozen=True)
class SubTask:
    name: str
    model: DmpModel
    goal: GoalSpec

    def __post_init__(self):
        if not self.name:
            raise ValidationError("sub-task name must be non-empty")
        if self.goal.value.shape != (self.model.n_channels,):
            raise ValidationError(
                f"goal dimension {self.goal.value.shape} does not match "
                f"{self.model.n_channels} channels"
            )


@dataclass(frozen=True)
class TaskProgram:
    """Ordered sub-tasks with a shared channel count; empty only while being built."""

    subtasks: tuple[SubTask, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "subtasks", tuple(self.subtasks))
        names = [s.name for s in self.subtasks]
        if len(set(names)) != len(names):
            raise ValidationError("sub-task names must be unique")
        channels = {s.model.n_channels for s in self.subtasks}
        if len(channels) > 1:
            raise ValidationError("sub-tasks must share one channel count")

    def __len__(self) -> int:
        return len(self.subtasks)

    @property
    def channel_count(self) -> int:
        if not self.subtasks:
            raise ValidationError("program is empty")
        return self.subtasks[0].model.n_channels


def add_subtask(
    program: TaskProgram,
    demo: Trajectory,
    name: str,
    params: DmpParams | None = None,
    goal: GoalSpec | None = None,
) -> TaskProgram:
    """Train a model from ``demo`` and append it under ``name``.

    Without an explicit goal rule the sub-task is relative, with the demo's
    own displacement as offset, so the whole task translates with a new start.
    """
    if any(s.name == name for s in program.subtasks):
        raise ValidationError(f"duplicate sub-task name {name!r}")
    if program.subtasks and demo.channel_count != program.channel_count:
        raise ValidationError(
            f"demo has {demo.channel_count} channels, program has {program.channel_count}"
        )
    model = train(demo, params)
    if goal is None:
        goal = GoalSpec.relative(model.demo_goal - model.demo_start)
    return TaskProgram(program.subtasks + (SubTask(name, model, goal),))


@dataclass(frozen=True)
class PlannedSegment:
    """Where one sub-task ran inside a planned trajectory."""

    name: str
    start: np.ndarray
    goal: np.ndarray
    final: np.ndarray
    t_start: float
    t_end: float

    @property
    def goal_error(self) -> float:
        return float(np.abs(self.final - self.goal).max())


def plan_task_segments(
    program: TaskProgram, start, tau_scale: float = 1.0
) -> tuple[Trajectory, list[PlannedSegment]]:
    """Roll out every sub-task in order and concatenate the segments.

    Sub-task i starts at rest from the final position of sub-task i-1
    (sub-task 0 from ``start``); each runs for 1.5x its own time scale times
    ``tau_scale``.  Junction positions are continuous by construction and
    the time axis strictly increases.
    """
    if not program.subtasks:
        raise ValidationError("program is empty")
    if tau_scale <= 0:
        raise ValidationError("tau_scale must be positive")
    current = np.asarray(start, dtype=np.float64)
    if current.shape != (program.channel_count,):
        raise ValidationError(
            f"start has shape {current.shape}, expected ({program.channel_count},)"
        )
    times: list[np.ndarray] = []
    positions: list[np.ndarray] = []
    segments: list[PlannedSegment] = []
    t_offset = 0.0
    for sub in program.subtasks:
        goal = sub.goal.resolve(current)
        tau = sub.model.params.tau * tau_scale
        try:
            segment = rollout(sub.model, current, goal, tau=tau, duration=1.5 * tau)
        except NumericError as exc:
            raise NumericError(f"sub-task {sub.name!r}: {exc}") from None
        keep = slice(1, None) if times else slice(None)
        times.append(segment.times[keep] + t_offset)
        positions.append(segment.positions[keep])
        segments.append(
            PlannedSegment(
                name=sub.name,
                start=current,
                goal=goal,
                final=segment.positions[-1].copy(),
                t_start=t_offset,
                t_end=t_offset + segment.times[-1],
            )
        )
        t_offset += segment.times[-1]
        current = segment.positions[-1]
    merged = Trajectory(np.concatenate(times), np.vstack(positions))
    return merged, segments


def plan_task(program: TaskProgram, start, tau_scale: float = 1.0) -> Trajectory:
    """Plan the full task motion from a (possibly new) start configuration."""
    trajectory, _ = plan_task_segments(program, start, tau_scale)
    return trajectory


def program_to_dict(program: TaskProgram) -> dict:
    if not program.subtasks:
        raise ValidationError("refusing to save an empty program")
    return {
        "schema": PROGRAM_SCHEMA,
        "channel_count": program.channel_count,
        "subtasks": [
            {
                "name": s.name,
                "goal_mode": s.goal.mode,
                "goal_value": s.goal.value.tolist(),
                "model": model_to_dict(s.model),
            }
            for s in program.subtasks
        ],
    }


def program_from_dict(doc: dict) -> TaskProgram:
    if not isinstance(doc, dict) or doc.get("schema") != PROGRAM_SCHEMA:
        raise FormatError(
            f"unsupported program schema "
            f"{doc.get('schema') if isinstance(doc, dict) else doc!r}"
        )
    try:
        subtasks = tuple(
            SubTask(
                name=entry["name"],
                model=model_from_dict(entry["model"]),
                goal=GoalSpec(entry["goal_mode"], np.array(entry["goal_value"])),
            )
            for entry in doc["subtasks"]
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"program document missing or mistyped field: {exc}") from None
    return TaskProgram(subtasks)


def save_program(program: TaskProgram) -> str:
    return json.dumps(program_to_dict(program))


def load_program(text: str) -> TaskProgram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return program_from_dict(doc)
