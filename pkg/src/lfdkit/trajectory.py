"""Recorded demonstrations: CSV ingestion, resampling, differentiation, smoothing.

A trajectory is an ordered list of timestamped multi-channel position samples.
All operations are pure functions returning new values; the CSV layout is
``t,q0,q1,...`` with one row per sample (see :func:`parse_trajectory`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputFormatError, ParameterError

# Relative timestamp jitter tolerated when a grid must be uniform.
_UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Timestamped positions: ``times`` (n,) strictly increasing, ``positions`` (n, channels)."""

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        positions = np.asarray(self.positions, dtype=np.float64)
        if positions.ndim == 1:
            positions = positions[:, None]
        if times.ndim != 1 or positions.ndim != 2:
            raise InputFormatError("times must be 1-D and positions 2-D")
        if times.shape[0] != positions.shape[0]:
            raise InputFormatError(
                f"{times.shape[0]} timestamps for {positions.shape[0]} position rows"
            )
        if times.shape[0] < 2:
            raise InputFormatError("a trajectory needs at least 2 samples")
        if positions.shape[1] < 1:
            raise InputFormatError("a trajectory needs at least 1 channel")
        if not (np.isfinite(times).all() and np.isfinite(positions).all()):
            raise InputFormatError("trajectory contains non-finite values")
        if np.any(np.diff(times) <= 0):
            raise InputFormatError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @property
    def sample_count(self) -> int:
        return self.times.shape[0]

    @property
    def channel_count(self) -> int:
        return self.positions.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def start(self) -> np.ndarray:
        return self.positions[0].copy()

    @property
    def end(self) -> np.ndarray:
        return self.positions[-1].copy()


@dataclass(frozen=True)
class KinematicTrajectory:
    """Uniformly sampled positions with finite-difference velocities and accelerations."""

    dt: float
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        shapes = {self.positions.shape, self.velocities.shape, self.accelerations.shape}
        if len(shapes) != 1:
            raise InputFormatError("kinematic arrays must share one shape")

    @property
    def sample_count(self) -> int:
        return self.positions.shape[0]

    @property
    def channel_count(self) -> int:
        return self.positions.shape[1]


def parse_trajectory(text: str) -> Trajectory:
    """Parse CSV ``t,q0,q1,...`` into a validated trajectory.

    Raises InputFormatError naming the 1-based offending line for malformed
    rows, column mismatches, or non-increasing timestamps.
    """
    lines = text.rstrip("\n").split("\n")
    if not lines or not lines[0].strip():
        raise InputFormatError("empty trajectory file")
    header = [tok.strip() for tok in lines[0].split(",")]
    n_channels = len(header) - 1
    expected = ["t"] + [f"q{i}" for i in range(n_channels)]
    if n_channels < 1 or header != expected:
        raise InputFormatError(
            f"bad header at line 1: expected 't,q0,q1,...', got {lines[0]!r}"
        )
    times = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split(",")
        if len(tokens) != n_channels + 1:
            raise InputFormatError(
                f"expected {n_channels + 1} columns at line {lineno}, got {len(tokens)}"
            )
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            raise InputFormatError(f"malformed number at line {lineno}: {line!r}") from None
        if times and values[0] <= times[-1]:
            raise InputFormatError(f"non-increasing timestamp at line {lineno}")
        times.append(values[0])
        rows.append(values[1:])
    if len(rows) < 2:
        raise InputFormatError("a trajectory needs at least 2 samples")
    return Trajectory(np.array(times), np.array(rows))


def write_trajectory(traj: Trajectory) -> str:
    """Serialize to the CSV layout read by :func:`parse_trajectory`.

    Numbers use the shortest decimal form that round-trips the exact float,
    so parse(write(t)) == t bitwise.
    """
    header = "t," + ",".join(f"q{i}" for i in range(traj.channel_count))
    lines = [header]
    for t, row in zip(traj.times, traj.positions):
        lines.append(",".join(repr(float(v)) for v in (t, *row)))
    return "\n".join(lines) + "\n"


def read_trajectory_file(path) -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trajectory(fh.read())


def write_trajectory_file(path, traj: Trajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_trajectory(traj))


def resample_uniform(traj: Trajectory, dt: float) -> Trajectory:
    """Linearly interpolate onto the grid t0, t0+dt, ... with the last point
    clamped to the original end time; endpoints are preserved exactly."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    duration = traj.duration
    if dt >= duration:
        raise ParameterError(f"dt={dt} must be smaller than the duration {duration}")
    n_intervals = int(np.ceil(duration / dt - _UNIFORM_RTOL))
    grid = traj.times[0] + np.arange(n_intervals + 1) * dt
    grid[-1] = traj.times[-1]
    # Snap grid points that land on original samples, so resampling an
    # already-uniform trajectory with its own dt is the identity.
    idx = np.searchsorted(traj.times, grid)
    for j, i in enumerate(idx):
        for k in (i - 1, i):
            if 0 <= k < traj.sample_count and abs(traj.times[k] - grid[j]) <= _UNIFORM_RTOL * dt:
                grid[j] = traj.times[k]
                break
    positions = np.column_stack(
        [np.interp(grid, traj.times, traj.positions[:, c]) for c in range(traj.channel_count)]
    )
    positions[0] = traj.positions[0]
    positions[-1] = traj.positions[-1]
    return Trajectory(grid, positions)


def _uniform_dt(times: np.ndarray) -> float:
    steps = np.diff(times)
    dt = float(steps.mean())
    if np.abs(steps - dt).max() > _UNIFORM_RTOL * dt:
        raise InputFormatError("trajectory is not uniformly sampled")
    return dt


def _differentiate(values: np.ndarray, dt: float) -> np.ndarray:
    """Second-order differences: central interior, one-sided at the endpoints."""
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2 * dt)
    d[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * dt)
    d[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * dt)
    return d


def derive_kinematics(traj: Trajectory) -> KinematicTrajectory:
    """Estimate velocities and accelerations on a uniform grid.

    The same second-order scheme is applied once for velocity and once more
    for acceleration; it is exact on polynomials of degree <= 2.
    """
    if traj.sample_count < 3:
        raise InputFormatError("differentiation needs at least 3 samples")
    dt = _uniform_dt(traj.times)
    velocities = _differentiate(traj.positions, dt)
    accelerations = _differentiate(velocities, dt)
    return KinematicTrajectory(dt, traj.positions.copy(), velocities, accelerations)


def smooth(traj: Trajectory, window: int) -> Trajectory:
    """Centered moving average; the window is clipped at the boundaries.

    window must be odd, >= 1 and <= the sample count; window=1 is the identity.
    """
    n = traj.sample_count
    if window % 2 == 0 or window < 1 or window > n:
        raise ParameterError(f"window must be odd and within [1, {n}], got {window}")
    if window == 1:
        return traj
    half = window // 2
    csum = np.vstack([np.zeros((1, traj.channel_count)), np.cumsum(traj.positions, axis=0)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    positions = (csum[hi] - csum[lo]) / (hi - lo)[:, None]
    return Trajectory(traj.times.copy(), positions)


def rmse(a: Trajectory, b: Trajectory) -> np.ndarray:
    """Per-channel root-mean-square difference; grids must match exactly."""
    if a.channel_count != b.channel_count:
        raise InputFormatError("channel counts differ")
    if a.sample_count != b.sample_count or not np.array_equal(a.times, b.times):
        raise InputFormatError("timestamp grids differ")
    return np.sqrt(np.mean((a.positions - b.positions) ** 2, axis=0))
