"""Synthetic-dataset scaffold: rigid pose files plus the directory template.

A dataset rooted at some directory holds ``pose/pose{i}.npy`` (written here)
and placeholder names ``rgb/{i}.jpg`` / ``mask/{i}.png`` that an external
renderer is expected to fill in; ``manifest.json`` lists all three per index.
Pose files are NPY v1.0, shape (4, 4) little-endian float64, written
byte-for-byte reproducibly (64-byte header block + 128 data bytes).
"""

from __future__ import annotations

import ast
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError, ValidationError
from .poses import RigidPose

MANIFEST_NAME = "manifest.json"

_NPY_MAGIC = b"\x93NUMPY"
_NPY_ALIGN = 64
_RIGID_TOL = 1e-9


@dataclass(frozen=True)
class PoseRecord:
    """4x4 homogeneous rigid transform, row-major float64, translation in meters."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise ValidationError(f"pose matrix must be 4x4, got {matrix.shape}")
        if not np.isfinite(matrix).all():
            raise ValidationError("pose matrix contains non-finite values")
        if not np.array_equal(matrix[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValidationError("bottom row must be exactly (0, 0, 0, 1)")
        r = matrix[:3, :3]
        if np.abs(r.T @ r - np.eye(3)).max() > _RIGID_TOL:
            raise ValidationError("rotation block is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > _RIGID_TOL:
            raise ValidationError("rotation block determinant is not +1")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_pose(cls, pose: RigidPose) -> "PoseRecord":
        return cls(pose.matrix())

    def to_pose(self) -> RigidPose:
        return RigidPose.from_matrix(self.matrix)


def write_pose_file(record: PoseRecord) -> bytes:
    """Serialize to NPY v1.0 with the data section starting at byte 64."""
    header = "{'descr':'<f8','fortran_order':False,'shape':(4,4)}"
    padding = _NPY_ALIGN - len(_NPY_MAGIC) - 2 - 2 - len(header) - 1
    header_bytes = header.encode("latin1") + b" " * padding + b"\n"
    return (
        _NPY_MAGIC
        + bytes([1, 0])
        + struct.pack("<H", len(header_bytes))
        + header_bytes
        + record.matrix.astype("<f8").tobytes(order="C")
    )


def read_pose_file(data: bytes) -> PoseRecord:
    """Parse NPY v1.0 bytes; format problems raise FormatError, a well-formed
    file holding a non-rigid matrix raises ValidationError."""
    if len(data) < 10 or data[:6] != _NPY_MAGIC:
        raise FormatError("bad NPY magic")
    if data[6:8] != bytes([1, 0]):
        raise FormatError(f"unsupported NPY version {data[6]}.{data[7]}")
    (header_len,) = struct.unpack("<H", data[8:10])
    if len(data) < 10 + header_len:
        raise FormatError("truncated NPY header")
    try:
        header = ast.literal_eval(data[10 : 10 + header_len].decode("latin1"))
    except (ValueError, SyntaxError):
        raise FormatError("unparseable NPY header") from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError("NPY header must declare descr, fortran_order, shape")
    if header["descr"] != "<f8":
        raise FormatError(f"expected little-endian float64, got {header['descr']!r}")
    if header["fortran_order"] is not False:
        raise FormatError("expected C-order data")
    if header["shape"] != (4, 4):
        raise FormatError(f"expected shape (4, 4), got {header['shape']!r}")
    payload = data[10 + header_len :]
    if len(payload) != 128:
        raise FormatError(f"expected 128 data bytes, got {len(payload)}")
    matrix = np.frombuffer(payload, dtype="<f8").reshape(4, 4)
    return PoseRecord(matrix)


def pose_file_name(index: int) -> str:
    return f"pose/pose{index}.npy"


def rgb_file_name(index: int) -> str:
    return f"rgb/{index}.jpg"


def mask_file_name(index: int) -> str:
    return f"mask/{index}.png"


@dataclass(frozen=True)
class DatasetLayout:
    """Resolved file names of one dataset instance."""

    root: Path
    count: int
    pose_files: tuple[str, ...] = field(repr=False)
    rgb_files: tuple[str, ...] = field(repr=False)
    mask_files: tuple[str, ...] = field(repr=False)


def _manifest_dict(count: int) -> dict:
    return {
        "count": count,
        "entries": [
            {
                "index": i,
                "pose": pose_file_name(i),
                "rgb": rgb_file_name(i),
                "mask": mask_file_name(i),
            }
            for i in range(count)
        ],
    }


def build_dataset_layout(root, poses: list[PoseRecord]) -> DatasetLayout:
    """Write pose files and the manifest under ``root``; rgb/ and mask/ are
    created empty for the external renderer.  Deterministic and idempotent."""
    if len(poses) < 1:
        raise ParameterError("need at least one pose")
    root = Path(root)
    for sub in ("pose", "rgb", "mask"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for i, record in enumerate(poses):
        (root / pose_file_name(i)).write_bytes(write_pose_file(record))
    manifest = json.dumps(_manifest_dict(len(poses)), indent=2) + "\n"
    (root / MANIFEST_NAME).write_text(manifest, encoding="utf-8", newline="\n")
    n = len(poses)
    return DatasetLayout(
        root=root,
        count=n,
        pose_files=tuple(pose_file_name(i) for i in range(n)),
        rgb_files=tuple(rgb_file_name(i) for i in range(n)),
        mask_files=tuple(mask_file_name(i) for i in range(n)),
    )


@dataclass
class ValidationReport:
    """Every naming/format/invariant violation found in a dataset directory."""

    root: Path
    count: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_dataset(root, require_images: bool = False) -> ValidationReport:
    """Check the directory template: contiguous indices from 0, exact names,
    parseable rigid pose files, and (optionally) non-empty rgb/mask images.
    Violations are reported, never raised."""
    root = Path(root)
    violations: list[str] = []
    if not root.is_dir():
        return ValidationReport(root, 0, [f"root {root} does not exist"])

    count = None
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        violations.append(f"{MANIFEST_NAME} missing")
    else:
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            count = int(manifest["count"])
            if manifest != _manifest_dict(count):
                violations.append(f"{MANIFEST_NAME} does not match the naming template")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            violations.append(f"{MANIFEST_NAME} unreadable")
    if count is None:
        # fall back to the files present
        indices = []
        if (root / "pose").is_dir():
            for path in (root / "pose").iterdir():
                stem = path.name
                if stem.startswith("pose") and stem.endswith(".npy"):
                    try:
                        indices.append(int(stem[4:-4]))
                    except ValueError:
                        pass
        count = max(indices) + 1 if indices else 0

    for sub in ("pose", "rgb", "mask"):
        if not (root / sub).is_dir():
            violations.append(f"{sub}/ directory missing")

    expected = set()
    for i in range(count):
        expected.add(pose_file_name(i))
        path = root / pose_file_name(i)
        if not path.is_file():
            violations.append(f"missing index {i}: {pose_file_name(i)} not found")
            continue
        try:
            read_pose_file(path.read_bytes())
        except FormatError as exc:
            violations.append(f"{pose_file_name(i)}: bad format: {exc}")
        except ValidationError as exc:
            violations.append(f"{pose_file_name(i)}: invalid pose: {exc}")
        if require_images:
            for name in (rgb_file_name(i), mask_file_name(i)):
                image = root / name
                if not image.is_file():
                    violations.append(f"missing image {name}")
                elif image.stat().st_size == 0:
                    violations.append(f"empty image {name}")

    if (root / "pose").is_dir():
        for path in sorted((root / "pose").iterdir()):
            if f"pose/{path.name}" not in expected:
                violations.append(f"unexpected file pose/{path.name}")

    return ValidationReport(root, count, violations)
