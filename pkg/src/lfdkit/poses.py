"""Rigid poses, object symmetry handling, grasp extraction, viewpoint sampling.

Conventions
-----------
- Quaternions are (w, x, y, z), kept unit-norm and sign-canonicalized
  (w >= 0; if w == 0 the first nonzero of x, y, z is positive), so equal
  rotations compare equal component-wise.
- Frames are right-handed.  Cameras look along their -z axis with +y up.
- compose(a, b) applies b first, then a.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ParameterError, ValidationError

_UNIT_TOL = 1e-9
TWO_PI = 2.0 * math.pi


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def _quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _quat_canonical(q: np.ndarray) -> np.ndarray:
    q = q / np.linalg.norm(q)
    for component in q:
        if component > 0:
            return q
        if component < 0:
            return -q
    return q


def _quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    qv = np.array([0.0, *v])
    return _quat_mul(_quat_mul(q, qv), _quat_conj(q))[1:]


def _axis_angle_quat(axis: np.ndarray, angle: float) -> np.ndarray:
    half = angle / 2.0
    return np.concatenate(([math.cos(half)], math.sin(half) * axis))


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(m: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion, branching on the largest diagonal term."""
    m = np.asarray(m, dtype=np.float64)
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0:
        s = math.sqrt(trace + 1.0) * 2
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    return _quat_canonical(q)


@dataclass(frozen=True)
class RigidPose:
    """Unit quaternion (w, x, y, z) plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64)
        translation = np.asarray(self.translation, dtype=np.float64)
        if rotation.shape != (4,) or translation.shape != (3,):
            raise ValidationError("rotation must be a 4-vector and translation a 3-vector")
        if not (np.isfinite(rotation).all() and np.isfinite(translation).all()):
            raise ValidationError("pose contains non-finite values")
        norm = np.linalg.norm(rotation)
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValidationError(f"quaternion norm {norm} is not 1 within {_UNIT_TOL}")
        object.__setattr__(self, "rotation", _quat_canonical(rotation))
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidPose":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))

    @classmethod
    def from_axis_angle(cls, axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "RigidPose":
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        return cls(_axis_angle_quat(axis, angle), np.asarray(translation, dtype=np.float64))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidPose":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise ValidationError("expected a 4x4 homogeneous matrix")
        return cls(matrix_to_quat(matrix[:3, :3]), matrix[:3, 3].copy())

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation_matrix()
        out[:3, 3] = self.translation
        return out

    def apply(self, point: np.ndarray) -> np.ndarray:
        return _quat_rotate(self.rotation, np.asarray(point, dtype=np.float64)) + self.translation


def compose(a: RigidPose, b: RigidPose) -> RigidPose:
    """a . b: apply b first, then a."""
    return RigidPose(
        _quat_mul(a.rotation, b.rotation),
        _quat_rotate(a.rotation, b.translation) + a.translation,
    )


def invert(p: RigidPose) -> RigidPose:
    conj = _quat_conj(p.rotation)
    return RigidPose(conj, -_quat_rotate(conj, p.translation))


@dataclass(frozen=True)
class SymmetrySpec:
    """Rotational symmetry of an object about a body-frame axis.

    kind is "cyclic" (order n >= 2 discrete turns) or "revolution"
    (continuous, like a turned brass part).
    """

    axis: np.ndarray
    kind: str
    order: int | None = None

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64)
        if axis.shape != (3,) or not np.isfinite(axis).all():
            raise ValidationError("axis must be a finite 3-vector")
        norm = np.linalg.norm(axis)
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValidationError(f"axis norm {norm} is not 1 within {_UNIT_TOL}")
        object.__setattr__(self, "axis", axis / norm)
        if self.kind == "cyclic":
            if self.order is None or int(self.order) != self.order or self.order < 2:
                raise ValidationError("cyclic symmetry needs an integer order >= 2")
            object.__setattr__(self, "order", int(self.order))
        elif self.kind == "revolution":
            if self.order is not None:
                raise ValidationError("revolution symmetry takes no order")
        else:
            raise ValidationError(f"unknown symmetry kind {self.kind!r}")

    @classmethod
    def cyclic(cls, axis, order: int) -> "SymmetrySpec":
        return cls(np.asarray(axis, dtype=np.float64), "cyclic", order)

    @classmethod
    def revolution(cls, axis) -> "SymmetrySpec":
        return cls(np.asarray(axis, dtype=np.float64), "revolution")

    @property
    def sector(self) -> float:
        """Width of the fundamental azimuth domain: 2*pi/n, or 0 for revolution."""
        return TWO_PI / self.order if self.kind == "cyclic" else 0.0

    def element(self, k_or_angle) -> np.ndarray:
        """Group rotation as a quaternion: k-th turn for cyclic, angle for revolution."""
        angle = self.sector * k_or_angle if self.kind == "cyclic" else k_or_angle
        return _axis_angle_quat(self.axis, angle)

    def elements(self) -> list[np.ndarray]:
        if self.kind != "cyclic":
            raise ParameterError("only cyclic symmetry has a finite element list")
        return [self.element(k) for k in range(self.order)]


def twist_angle(q: np.ndarray, axis: np.ndarray) -> float:
    """Rotation angle of q about ``axis`` (swing-twist split), in [0, 2*pi)."""
    projection = float(np.dot(q[1:], axis))
    if abs(q[0]) < 1e-300 and abs(projection) < 1e-300:
        return 0.0
    angle = 2.0 * math.atan2(projection, q[0])
    return angle % TWO_PI


def canonicalize_pose(p: RigidPose, sym: SymmetrySpec) -> RigidPose:
    """Multiply by the symmetry element that moves the about-axis angle into
    the fundamental domain: [0, 2*pi/n) for cyclic, exactly zero for revolution.

    Translation is unchanged; the map is idempotent.
    """
    theta = twist_angle(p.rotation, sym.axis)
    if sym.kind == "revolution":
        correction = -theta
    else:
        k = math.floor(theta / sym.sector + 1e-12)
        correction = -k * sym.sector
        if correction == 0.0:
            return p
    rotation = _quat_mul(p.rotation, _axis_angle_quat(sym.axis, correction))
    return RigidPose(rotation, p.translation.copy())


def symmetry_distance(
    a: RigidPose, b: RigidPose, sym: SymmetrySpec
) -> tuple[float, float]:
    """(rotation angle, translation distance) between poses up to symmetry.

    The rotation term is the geodesic angle minimized over the symmetry
    group; for revolution symmetry the minimum over the continuous group is
    taken analytically.  Translation distance is plain Euclidean.
    """
    translation = float(np.linalg.norm(a.translation - b.translation))
    if sym.kind == "cyclic":
        best = 0.0
        for element in sym.elements():
            dot = abs(float(np.dot(_quat_mul(a.rotation, element), b.rotation)))
            best = max(best, dot)
    else:
        m = _quat_mul(_quat_conj(a.rotation), b.rotation)
        best = math.hypot(m[0], float(np.dot(m[1:], sym.axis)))
    angle = 2.0 * math.acos(min(1.0, best))
    return angle, translation


@dataclass(frozen=True)
class GraspOffset:
    """Gripper pose expressed in the object frame."""

    pose: RigidPose


def grasp_from_pose(object_pose: RigidPose, offset: GraspOffset) -> RigidPose:
    """World grasp pose for an estimated object pose and a per-object offset."""
    return compose(object_pose, offset.pose)


@dataclass(frozen=True)
class ViewpointSet:
    """Cameras on a sphere of ``radius`` around the origin, all looking at it."""

    poses: tuple[RigidPose, ...]
    radius: float
    elevation: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        for pose in self.poses:
            distance = np.linalg.norm(pose.translation)
            if abs(distance - self.radius) > 1e-9:
                raise ValidationError(f"camera at distance {distance}, expected {self.radius}")
            view_axis = -pose.rotation_matrix()[:, 2]
            toward_origin = -pose.translation / distance
            if np.linalg.norm(view_axis - toward_origin) > 1e-9:
                raise ValidationError("camera view axis does not pass through the origin")

    def __len__(self) -> int:
        return len(self.poses)


def _look_at_origin(position: np.ndarray) -> np.ndarray:
    """World-from-camera rotation with -z toward the origin and +y up."""
    z_cam = position / np.linalg.norm(position)
    up = np.array([0.0, 0.0, 1.0])
    x_cam = np.cross(up, z_cam)
    if np.linalg.norm(x_cam) < 1e-12:   # camera at the zenith
        x_cam = np.cross(np.array([1.0, 0.0, 0.0]), z_cam)
    x_cam = x_cam / np.linalg.norm(x_cam)
    y_cam = np.cross(z_cam, x_cam)
    return np.column_stack([x_cam, y_cam, z_cam])


def sample_viewpoints(
    n: int,
    radius: float,
    elevation: tuple[float, float],
    sym: SymmetrySpec,
    seed: int,
    roll: bool = False,
) -> ViewpointSet:
    """Seeded stratified camera poses restricted to the symmetry's azimuth domain.

    Elevation is stratified over [min, max] (one jittered sample per stratum).
    Azimuth spans [0, 2*pi/n) for cyclic symmetry, Latin-hypercube paired
    with the elevation strata; for revolution symmetry azimuth is fixed at 0
    and ``roll`` optionally adds a seeded in-plane camera roll.  Identical
    arguments produce bitwise-identical pose lists.
    """
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    if radius <= 0:
        raise ParameterError("radius must be positive")
    lo, hi = float(elevation[0]), float(elevation[1])
    if not (0 < lo < hi <= math.pi / 2):
        raise ParameterError("elevation range must satisfy 0 < min < max <= pi/2")
    rng = np.random.default_rng(seed)
    n = int(n)
    elevations = lo + (np.arange(n) + rng.random(n)) * (hi - lo) / n
    if sym.kind == "cyclic":
        strata = rng.permutation(n)
        azimuths = (strata + rng.random(n)) * sym.sector / n
        rolls = np.zeros(n)
    else:
        azimuths = np.zeros(n)
        rolls = rng.uniform(0.0, TWO_PI, n) if roll else np.zeros(n)

    poses = []
    for az, el, gamma in zip(azimuths, elevations, rolls):
        position = radius * np.array(
            [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
        )
        rotation = _look_at_origin(position)
        if gamma != 0.0:
            c, s = math.cos(gamma), math.sin(gamma)
            rotation = rotation @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        poses.append(RigidPose(matrix_to_quat(rotation), position))
    return ViewpointSet(tuple(poses), float(radius), (lo, hi))


def pose_to_dict(p: RigidPose) -> dict:
    return {"rotation": p.rotation.tolist(), "translation": p.translation.tolist()}


def pose_from_dict(doc: dict) -> RigidPose:
    try:
        return RigidPose(np.array(doc["rotation"]), np.array(doc["translation"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"pose document missing field: {exc}") from None


def load_symmetry_config(text: str) -> tuple[SymmetrySpec, GraspOffset | None]:
    """Parse the object config JSON: axis, kind, order (cyclic only), and an
    optional grasp_offset {rotation wxyz, translation xyz}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("symmetry config must be a JSON object")
    try:
        axis = np.asarray(doc["axis"], dtype=np.float64)
        kind = doc["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"symmetry config missing or mistyped field: {exc}") from None
    order = doc.get("order")
    try:
        sym = SymmetrySpec(axis, kind, order)
    except ValidationError as exc:
        raise FormatError(str(exc)) from None
    offset = None
    if "grasp_offset" in doc:
        offset = GraspOffset(pose_from_dict(doc["grasp_offset"]))
    return sym, offset
