"""Goal-attractor movement primitives learned from a single demonstration.

The motion model is a critically dampable spring-damper per channel,

    tau^2 * ydd = alpha_z * (beta_z * (g - y) - tau * yd) + f(x),

driven by an exponentially decaying phase tau * xd = -alpha_x * x with
x(0) = 1.  The forcing term f is a normalized Gaussian-basis mix gated by
the phase and (optionally) scaled by the goal amplitude, so it vanishes as
x -> 0 and the attractor always settles on the goal.  Weights are fitted
per basis by locally weighted regression against the demonstration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import FormatError, InputFormatError, NumericError, ParameterError
from .trajectory import (
    KinematicTrajectory,
    Trajectory,
    derive_kinematics,
    resample_uniform,
    rmse,
)

MODEL_SCHEMA = "lfd_dmp_model/1"

DEFAULT_ALPHA_Z = 25.0
DEFAULT_ALPHA_X = 1.0
DEFAULT_N_BASIS = 50
BASIS_OVERLAP = 0.5

# Below this, the per-basis regression denominator counts as degenerate
# and the weight is zeroed instead of divided.
_DEGENERATE_DENOM = 1e-12
# |goal - start| below this fraction of the channel range disables
# amplitude scaling (mirrored/blown-up forcing on near-loop demos).
_AMPLITUDE_EPS = 1e-6


@dataclass(frozen=True)
class DmpParams:
    """Gains and discretization of one movement primitive.

    ``tau`` and ``dt`` may be left as None and are then resolved at training
    time (tau = demonstration duration, dt = tau/1000).
    """

    alpha_z: float = DEFAULT_ALPHA_Z
    beta_z: float | None = None
    alpha_x: float = DEFAULT_ALPHA_X
    tau: float | None = None
    n_basis: int = DEFAULT_N_BASIS
    dt: float | None = None

    def __post_init__(self):
        if self.beta_z is None:
            object.__setattr__(self, "beta_z", self.alpha_z / 4.0)
        if not (self.alpha_z > 0 and self.beta_z > 0 and self.alpha_x > 0):
            raise ParameterError("gains alpha_z, beta_z, alpha_x must be positive")
        if int(self.n_basis) != self.n_basis or self.n_basis < 2:
            raise ParameterError(f"n_basis must be an integer >= 2, got {self.n_basis}")
        object.__setattr__(self, "n_basis", int(self.n_basis))
        if self.tau is not None and not self.tau > 0:
            raise ParameterError("tau must be positive")
        if self.dt is not None:
            if not self.dt > 0:
                raise ParameterError("dt must be positive")
            if self.tau is not None and self.dt > self.tau / 100 * (1 + 1e-9):
                raise ParameterError(f"dt={self.dt} exceeds tau/100={self.tau / 100}")

    def resolved(self, duration: float | None = None) -> "DmpParams":
        """Fill in tau (from ``duration``) and dt (tau/1000) where unset."""
        tau = self.tau if self.tau is not None else duration
        if tau is None or not tau > 0:
            raise ParameterError("tau is unset and no duration was supplied")
        dt = self.dt if self.dt is not None else tau / 1000.0
        return replace(self, tau=float(tau), dt=float(dt))

    def _require_timing(self) -> None:
        if self.tau is None or self.dt is None:
            raise ParameterError("params need concrete tau and dt (call resolved())")


@dataclass(frozen=True)
class BasisSet:
    """Gaussian kernels over the phase: centers in (0, 1] decreasing, positive widths."""

    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.float64)
        widths = np.asarray(self.widths, dtype=np.float64)
        if centers.shape != widths.shape or centers.ndim != 1:
            raise ParameterError("centers and widths must be 1-D and equally long")
        if np.any(np.diff(centers) >= 0):
            raise ParameterError("centers must be strictly decreasing")
        if centers[0] > 1 or centers[-1] <= 0:
            raise ParameterError("centers must lie in (0, 1]")
        if np.any(widths <= 0):
            raise ParameterError("widths must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)

    @property
    def size(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class ForcingModel:
    """Fitted basis weights per channel plus the demo amplitudes they were scaled by."""

    weights: np.ndarray        # (n_channels, n_basis)
    demo_amplitude: np.ndarray  # (n_channels,)
    scaled: np.ndarray          # (n_channels,) bool

    def __post_init__(self):
        weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        if not np.isfinite(weights).all():
            raise ParameterError("forcing weights must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "demo_amplitude", np.asarray(self.demo_amplitude, dtype=np.float64))
        object.__setattr__(self, "scaled", np.asarray(self.scaled, dtype=bool))


@dataclass(frozen=True)
class DmpState:
    """Instantaneous rollout state: position, velocity, phase."""

    y: np.ndarray
    yd: np.ndarray
    x: float

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        object.__setattr__(self, "yd", np.asarray(self.yd, dtype=np.float64))
        if not (0 < self.x <= 1):
            raise ParameterError(f"phase must be in (0, 1], got {self.x}")
        if not (np.isfinite(self.y).all() and np.isfinite(self.yd).all()):
            raise NumericError("non-finite state")


@dataclass(frozen=True)
class DmpModel:
    """A trained movement primitive: parameters, basis layout, forcing, demo metadata."""

    params: DmpParams
    basis: BasisSet
    forcing: ForcingModel
    n_channels: int
    demo_start: np.ndarray
    demo_goal: np.ndarray
    demo_duration: float

    def __post_init__(self):
        if self.n_channels < 1:
            raise ParameterError("need at least one channel")
        if self.demo_duration <= 0:
            raise ParameterError("demo_duration must be positive")
        if self.basis.size != self.params.n_basis:
            raise ParameterError("basis size disagrees with params.n_basis")
        if self.forcing.weights.shape != (self.n_channels, self.params.n_basis):
            raise ParameterError("weights shape disagrees with channels x basis")
        self.params._require_timing()
        object.__setattr__(self, "demo_start", np.asarray(self.demo_start, dtype=np.float64))
        object.__setattr__(self, "demo_goal", np.asarray(self.demo_goal, dtype=np.float64))


def canonical_phase(params: DmpParams, t):
    """Phase x(t) = exp(-alpha_x * t / tau); accepts scalar or array t >= 0."""
    if params.tau is None:
        raise ParameterError("params need a concrete tau")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ParameterError("t must be non-negative")
    x = np.exp(-params.alpha_x * t / params.tau)
    return float(x) if x.ndim == 0 else x


def place_basis(params: DmpParams) -> BasisSet:
    """Lay kernels equally spaced in time over [0, tau] (log-spaced in phase).

    Widths come from neighbor spacing, h_i = overlap / (c_{i+1} - c_i)^2 with
    the last width repeated.
    """
    n = params.n_basis
    if n < 2:
        raise ParameterError("n_basis must be >= 2")
    centers = np.exp(-params.alpha_x * np.arange(n) / (n - 1))
    widths = BASIS_OVERLAP / np.diff(centers) ** 2
    widths = np.append(widths, widths[-1])
    return BasisSet(centers, widths)


def basis_activation(basis: BasisSet, x) -> np.ndarray:
    """Kernel activations psi_i(x) = exp(-h_i (x - c_i)^2), for scalar or array x in (0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0) or np.any(x > 1):
        raise ParameterError("phase x must lie in (0, 1]")
    return np.exp(-basis.widths * (x[..., None] - basis.centers) ** 2)


def forcing_term(model: DmpModel, x: float, channel: int, amplitude: float) -> float:
    """Normalized basis mix gated by phase: f = (sum psi w / sum psi) * x * A.

    A is the given amplitude when the channel was trained with scaling,
    otherwise 1.
    """
    if not 0 <= channel < model.n_channels:
        raise ParameterError(f"channel {channel} out of range")
    psi = basis_activation(model.basis, x)
    total = psi.sum()
    if total == 0.0:   # all kernels underflowed, far past the last center
        return 0.0
    a = amplitude if model.forcing.scaled[channel] else 1.0
    return float(psi @ model.forcing.weights[channel] / total * x * a)


def compute_forcing_target(kin: KinematicTrajectory, params: DmpParams, channel: int) -> np.ndarray:
    """Rearrange the motion law to the forcing the demo must have exerted:

        f_target = tau^2 * ydd - alpha_z * (beta_z * (g - y) - tau * yd)

    with g the final demo position of the channel.
    """
    params._require_timing()
    if not 0 <= channel < kin.channel_count:
        raise ParameterError(f"channel {channel} out of range")
    y = kin.positions[:, channel]
    yd = kin.velocities[:, channel]
    ydd = kin.accelerations[:, channel]
    g = y[-1]
    tau = params.tau
    return tau**2 * ydd - params.alpha_z * (params.beta_z * (g - y) - tau * yd)


def fit_lwr(
    f_target: np.ndarray, phases: np.ndarray, amplitude: float, basis: BasisSet
) -> np.ndarray:
    """Per-basis weighted least squares in closed form.

    Each weight minimizes sum_t psi_i(x_t) (f_t - w * s_t)^2 with s_t = x_t * A:
    w_i = sum(psi_i s f) / sum(psi_i s^2).  Degenerate denominators (< 1e-12)
    yield w_i = 0.
    """
    f_target = np.asarray(f_target, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    if f_target.shape != phases.shape or f_target.ndim != 1:
        raise InputFormatError("f_target and phases must be equally long 1-D arrays")
    if f_target.shape[0] < basis.size:
        raise InputFormatError(
            f"need at least {basis.size} samples to fit {basis.size} bases"
        )
    psi = basis_activation(basis, phases)          # (T, B)
    s = phases * amplitude
    num = psi.T @ (s * f_target)
    den = psi.T @ (s * s)
    weights = np.zeros_like(den)
    usable = den >= _DEGENERATE_DENOM
    weights[usable] = num[usable] / den[usable]
    return weights


def train(demo: Trajectory, params: DmpParams | None = None) -> DmpModel:
    """Fit one weight row per channel from a demonstration.

    The demo is resampled to a uniform grid (dt snapped to an exact divisor
    of the duration), kinematics estimated by finite differences, and tau
    set to the demonstration duration unless the params carry an explicit
    override.  Channels whose net displacement is negligible against their
    range are trained without amplitude scaling.
    """
    if params is None:
        params = DmpParams()
    if demo.sample_count < 3:
        raise InputFormatError("training needs at least 3 samples")
    duration = demo.duration
    p = params.resolved(duration)
    n_steps = max(2, round(duration / p.dt))
    p = replace(p, dt=duration / n_steps)
    uniform = resample_uniform(demo, p.dt)
    kin = derive_kinematics(uniform)
    basis = place_basis(p)
    times = np.arange(uniform.sample_count) * p.dt
    phases = canonical_phase(p, times)

    n_channels = demo.channel_count
    weights = np.zeros((n_channels, p.n_basis))
    amplitudes = np.zeros(n_channels)
    scaled = np.zeros(n_channels, dtype=bool)
    for c in range(n_channels):
        y = uniform.positions[:, c]
        amp = y[-1] - y[0]
        span = y.max() - y.min()
        scaled[c] = not abs(amp) < _AMPLITUDE_EPS * span
        amplitudes[c] = amp
        f_target = compute_forcing_target(kin, p, c)
        weights[c] = fit_lwr(f_target, phases, amp if scaled[c] else 1.0, basis)
    return DmpModel(
        params=p,
        basis=basis,
        forcing=ForcingModel(weights, amplitudes, scaled),
        n_channels=n_channels,
        demo_start=uniform.positions[0],
        demo_goal=uniform.positions[-1],
        demo_duration=duration,
    )


def _forcing_vector(model: DmpModel, x: float, amplitude: np.ndarray) -> np.ndarray:
    psi = basis_activation(model.basis, x)
    total = psi.sum()
    if total == 0.0:
        return np.zeros(model.n_channels)
    a = np.where(model.forcing.scaled, amplitude, 1.0)
    return model.forcing.weights @ psi / total * x * a


def step(
    model: DmpModel,
    state: DmpState,
    goal: np.ndarray,
    start: np.ndarray,
    tau: float | None = None,
    dt: float | None = None,
) -> DmpState:
    """Advance (y, yd, x) by one fixed RK4 step of the coupled system.

    The forcing amplitude per channel is goal - start.  tau and dt default
    to the model's trained values.
    """
    goal = np.asarray(goal, dtype=np.float64)
    start = np.asarray(start, dtype=np.float64)
    if goal.shape != (model.n_channels,) or start.shape != (model.n_channels,):
        raise ParameterError("goal/start dimension must equal the channel count")
    tau = model.params.tau if tau is None else tau
    dt = model.params.dt if dt is None else dt
    amplitude = goal - start
    alpha_z, beta_z, alpha_x = model.params.alpha_z, model.params.beta_z, model.params.alpha_x

    def deriv(y, yd, x):
        f = _forcing_vector(model, x, amplitude)
        ydd = (alpha_z * (beta_z * (goal - y) - tau * yd) + f) / tau**2
        xd = -alpha_x * x / tau
        return yd, ydd, xd

    y, yd, x = state.y, state.yd, state.x
    with np.errstate(over="ignore", invalid="ignore"):   # non-finite is caught below
        k1 = deriv(y, yd, x)
        k2 = deriv(y + dt / 2 * k1[0], yd + dt / 2 * k1[1], x + dt / 2 * k1[2])
        k3 = deriv(y + dt / 2 * k2[0], yd + dt / 2 * k2[1], x + dt / 2 * k2[2])
        k4 = deriv(y + dt * k3[0], yd + dt * k3[1], x + dt * k3[2])
        y_next = y + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        yd_next = yd + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x_next = x + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    if not (np.isfinite(y_next).all() and np.isfinite(yd_next).all() and math.isfinite(x_next)):
        raise NumericError("integration produced non-finite values")
    return DmpState(y_next, yd_next, x_next)


def rollout(
    model: DmpModel,
    start: np.ndarray,
    goal: np.ndarray,
    tau: float | None = None,
    duration: float | None = None,
) -> Trajectory:
    """Integrate from rest at ``start`` toward ``goal`` for ``duration`` seconds.

    tau defaults to the trained value and duration to 1.5 * tau (time for the
    spring to settle after the forcing has decayed).  The integration step
    scales with tau so rollouts at different speeds sample the same phases.
    """
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    tau = model.params.tau if tau is None else float(tau)
    if tau <= 0:
        raise ParameterError("tau must be positive")
    duration = 1.5 * tau if duration is None else float(duration)
    if duration < tau * (1 - 1e-12):
        raise ParameterError(f"duration {duration} must be at least tau {tau}")
    dt = model.params.dt * tau / model.params.tau
    n_steps = max(1, round(duration / dt))
    state = DmpState(start.copy(), np.zeros_like(start), 1.0)
    times = np.arange(n_steps + 1) * dt
    positions = np.empty((n_steps + 1, model.n_channels))
    positions[0] = state.y
    for i in range(n_steps):
        try:
            state = step(model, state, goal, start, tau=tau, dt=dt)
        except NumericError as exc:
            raise NumericError(f"{exc} at step {i + 1}") from None
        positions[i + 1] = state.y
    return Trajectory(times, positions)


def reproduction_rmse(model: DmpModel, demo: Trajectory) -> np.ndarray:
    """Per-channel RMSE between the demo and its own rollout over the demo span."""
    track = rollout(model, model.demo_start, model.demo_goal, duration=1.5 * model.params.tau)
    span = track.times <= demo.duration * (1 + 1e-12)
    replay = Trajectory(track.times[span], track.positions[span])
    reference = resample_uniform(
        Trajectory(demo.times - demo.times[0], demo.positions), model.params.dt
    )
    n = min(replay.sample_count, reference.sample_count)
    a = Trajectory(replay.times[:n], replay.positions[:n])
    b = Trajectory(replay.times[:n], reference.positions[:n])
    return rmse(a, b)


def model_to_dict(model: DmpModel) -> dict:
    p = model.params
    return {
        "schema": MODEL_SCHEMA,
        "params": {
            "alpha_z": p.alpha_z,
            "beta_z": p.beta_z,
            "alpha_x": p.alpha_x,
            "tau": p.tau,
            "n_basis": p.n_basis,
            "dt": p.dt,
        },
        "n_channels": model.n_channels,
        "basis": {
            "centers": model.basis.centers.tolist(),
            "widths": model.basis.widths.tolist(),
        },
        "forcing": {
            "weights": model.forcing.weights.tolist(),
            "demo_amplitude": model.forcing.demo_amplitude.tolist(),
            "scaled": model.forcing.scaled.tolist(),
        },
        "demo": {
            "start": model.demo_start.tolist(),
            "goal": model.demo_goal.tolist(),
            "duration": model.demo_duration,
        },
    }


def model_from_dict(doc: dict) -> DmpModel:
    if not isinstance(doc, dict) or doc.get("schema") != MODEL_SCHEMA:
        raise FormatError(
            f"unsupported model schema {doc.get('schema') if isinstance(doc, dict) else doc!r}"
        )
    try:
        params = DmpParams(**doc["params"])
        model = DmpModel(
            params=params,
            basis=BasisSet(np.array(doc["basis"]["centers"]), np.array(doc["basis"]["widths"])),
            forcing=ForcingModel(
                np.array(doc["forcing"]["weights"]),
                np.array(doc["forcing"]["demo_amplitude"]),
                np.array(doc["forcing"]["scaled"]),
            ),
            n_channels=int(doc["n_channels"]),
            demo_start=np.array(doc["demo"]["start"]),
            demo_goal=np.array(doc["demo"]["goal"]),
            demo_duration=float(doc["demo"]["duration"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"model document missing or mistyped field: {exc}") from None
    return model


def model_to_json(model: DmpModel) -> str:
    return json.dumps(model_to_dict(model))


def model_from_json(text: str) -> DmpModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return model_from_dict(doc)
