import io
import json

import numpy as np
import pytest

from lfdkit.dataset import (
    MANIFEST_NAME,
    PoseRecord,
    build_dataset_layout,
    read_pose_file,
    validate_dataset,
    write_pose_file,
)
from lfdkit.errors import FormatError, ParameterError, ValidationError
from lfdkit.poses import RigidPose

from oracles import random_quat


def random_record(rng):
    return PoseRecord.from_pose(RigidPose(random_quat(rng), rng.uniform(-1, 1, 3)))


class TestPoseRecord:
    def test_accepts_identity(self):
        PoseRecord(np.eye(4))

    def test_rejects_bad_bottom_row(self):
        m = np.eye(4)
        m[3, 0] = 1e-12
        with pytest.raises(ValidationError):
            PoseRecord(m)

    def test_rejects_reflection(self):
        m = np.eye(4)
        m[0, 0] = -1.0
        with pytest.raises(ValidationError):
            PoseRecord(m)

    def test_rejects_non_orthonormal(self):
        m = np.eye(4)
        m[0, 0] = 1.1
        with pytest.raises(ValidationError):
            PoseRecord(m)

    def test_pose_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p = RigidPose(random_quat(rng), rng.uniform(-1, 1, 3))
            back = PoseRecord.from_pose(p).to_pose()
            assert np.allclose(back.translation, p.translation, atol=1e-12)


class TestNpyFormat:
    def test_identity_file_is_192_bytes(self):
        data = write_pose_file(PoseRecord(np.eye(4)))
        assert len(data) == 192

    def test_magic_bytes(self):
        data = write_pose_file(PoseRecord(np.eye(4)))
        assert data[:6] == b"\x93NUMPY"
        assert data[6:8] == bytes([1, 0])

    def test_data_section_starts_at_64(self):
        record = random_record(np.random.default_rng(1))
        data = write_pose_file(record)
        assert np.frombuffer(data[64:], dtype="<f8").reshape(4, 4).tolist() == (
            record.matrix.tolist()
        )

    def test_round_trip_bitwise(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            record = random_record(rng)
            back = read_pose_file(write_pose_file(record))
            assert np.array_equal(back.matrix, record.matrix)

    def test_numpy_loads_our_bytes(self):
        record = random_record(np.random.default_rng(3))
        arr = np.load(io.BytesIO(write_pose_file(record)))
        assert np.array_equal(arr, record.matrix)

    def test_we_load_numpy_bytes(self):
        record = random_record(np.random.default_rng(4))
        buf = io.BytesIO()
        np.save(buf, record.matrix)
        back = read_pose_file(buf.getvalue())
        assert np.array_equal(back.matrix, record.matrix)

    def test_bad_magic_rejected(self):
        data = bytearray(write_pose_file(PoseRecord(np.eye(4))))
        data[0] = 0x92
        with pytest.raises(FormatError):
            read_pose_file(bytes(data))

    def test_bad_version_rejected(self):
        data = bytearray(write_pose_file(PoseRecord(np.eye(4))))
        data[6] = 2
        with pytest.raises(FormatError):
            read_pose_file(bytes(data))

    def test_truncated_rejected(self):
        data = write_pose_file(PoseRecord(np.eye(4)))
        for cut in (0, 5, 9, 63, 191):
            with pytest.raises(FormatError):
                read_pose_file(data[:cut])

    def test_trailing_garbage_rejected(self):
        data = write_pose_file(PoseRecord(np.eye(4)))
        with pytest.raises(FormatError):
            read_pose_file(data + b"\x00")

    def test_wrong_shape_rejected(self):
        buf = io.BytesIO()
        np.save(buf, np.eye(3))
        with pytest.raises(FormatError):
            read_pose_file(buf.getvalue())

    def test_wrong_dtype_rejected(self):
        buf = io.BytesIO()
        np.save(buf, np.eye(4, dtype=np.float32))
        with pytest.raises(FormatError):
            read_pose_file(buf.getvalue())

    def test_reflection_matrix_is_validation_error(self):
        m = np.eye(4)
        m[0, 0] = -1.0
        buf = io.BytesIO()
        np.save(buf, m)
        with pytest.raises(ValidationError):
            read_pose_file(buf.getvalue())


class TestLayout:
    def test_single_entry_layout(self, tmp_path):
        layout = build_dataset_layout(tmp_path, [PoseRecord(np.eye(4))])
        assert (tmp_path / "pose" / "pose0.npy").is_file()
        assert layout.pose_files == ("pose/pose0.npy",)
        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
        assert manifest["count"] == 1
        assert manifest["entries"][0] == {
            "index": 0,
            "pose": "pose/pose0.npy",
            "rgb": "rgb/0.jpg",
            "mask": "mask/0.png",
        }

    def test_names_follow_template(self, tmp_path):
        rng = np.random.default_rng(5)
        for n in (1, 2, 10):
            root = tmp_path / f"d{n}"
            layout = build_dataset_layout(root, [random_record(rng) for _ in range(n)])
            assert layout.count == n
            for i in range(n):
                assert (root / f"pose/pose{i}.npy").is_file()
                assert layout.rgb_files[i] == f"rgb/{i}.jpg"
                assert layout.mask_files[i] == f"mask/{i}.png"

    def test_rerun_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(6)
        records = [random_record(rng) for _ in range(5)]
        build_dataset_layout(tmp_path, records)
        first = {
            p.relative_to(tmp_path): p.read_bytes()
            for p in tmp_path.rglob("*") if p.is_file()
        }
        build_dataset_layout(tmp_path, records)
        second = {
            p.relative_to(tmp_path): p.read_bytes()
            for p in tmp_path.rglob("*") if p.is_file()
        }
        assert first == second

    def test_empty_pose_list_rejected(self, tmp_path):
        with pytest.raises(ParameterError):
            build_dataset_layout(tmp_path, [])


class TestValidate:
    def build(self, root, n=5, seed=7):
        rng = np.random.default_rng(seed)
        return build_dataset_layout(root, [random_record(rng) for _ in range(n)])

    def test_fresh_layout_clean(self, tmp_path):
        self.build(tmp_path)
        report = validate_dataset(tmp_path)
        assert report.ok
        assert report.count == 5

    def test_missing_pose_reported(self, tmp_path):
        self.build(tmp_path)
        (tmp_path / "pose" / "pose3.npy").unlink()
        report = validate_dataset(tmp_path)
        assert len(report.violations) == 1
        assert "missing index 3" in report.violations[0]

    def test_corrupt_header_reported(self, tmp_path):
        self.build(tmp_path)
        path = tmp_path / "pose" / "pose2.npy"
        data = bytearray(path.read_bytes())
        data[7] ^= 0xFF
        path.write_bytes(bytes(data))
        report = validate_dataset(tmp_path)
        assert len(report.violations) == 1
        assert "pose2.npy" in report.violations[0]

    def test_unexpected_file_reported(self, tmp_path):
        self.build(tmp_path)
        (tmp_path / "pose" / "pose_extra.npy").write_bytes(b"junk")
        report = validate_dataset(tmp_path)
        assert any("unexpected" in v for v in report.violations)

    def test_require_images(self, tmp_path):
        self.build(tmp_path, n=2)
        report = validate_dataset(tmp_path, require_images=True)
        assert len(report.violations) == 4   # 2 rgb + 2 mask missing
        for i in range(2):
            (tmp_path / f"rgb/{i}.jpg").write_bytes(b"\xff\xd8fake")
            (tmp_path / f"mask/{i}.png").write_bytes(b"\x89PNGfake")
        assert validate_dataset(tmp_path, require_images=True).ok

    def test_empty_image_reported(self, tmp_path):
        self.build(tmp_path, n=1)
        (tmp_path / "rgb/0.jpg").write_bytes(b"")
        (tmp_path / "mask/0.png").write_bytes(b"x")
        report = validate_dataset(tmp_path, require_images=True)
        assert any("empty image rgb/0.jpg" in v for v in report.violations)

    def test_missing_root(self, tmp_path):
        report = validate_dataset(tmp_path / "nope")
        assert not report.ok

    def test_missing_manifest_reported(self, tmp_path):
        self.build(tmp_path)
        (tmp_path / MANIFEST_NAME).unlink()
        report = validate_dataset(tmp_path)
        assert any(MANIFEST_NAME in v for v in report.violations)
        assert report.count == 5   # inferred from the files
