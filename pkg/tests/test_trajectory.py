import numpy as np
import pytest

from lfdkit.errors import InputFormatError, ParameterError
from lfdkit.trajectory import (
    Trajectory,
    derive_kinematics,
    parse_trajectory,
    resample_uniform,
    rmse,
    smooth,
    write_trajectory,
)


def random_trajectory(rng, n=None, channels=None):
    n = n or rng.integers(3, 40)
    channels = channels or rng.integers(1, 4)
    times = np.cumsum(rng.uniform(0.01, 0.5, n))
    scale = 10.0 ** rng.integers(-3, 4)
    return Trajectory(times, rng.normal(size=(n, int(channels))) * scale)


class TestTrajectoryType:
    def test_basic_properties(self):
        traj = Trajectory(np.array([0.0, 0.5, 1.0]), np.array([[0.0], [1.0], [2.0]]))
        assert traj.sample_count == 3
        assert traj.channel_count == 1
        assert traj.duration == 1.0

    def test_rejects_non_increasing_time(self):
        with pytest.raises(InputFormatError):
            Trajectory(np.array([0.0, 0.5, 0.5]), np.zeros((3, 1)))

    def test_rejects_single_sample(self):
        with pytest.raises(InputFormatError):
            Trajectory(np.array([0.0]), np.zeros((1, 1)))

    def test_rejects_empty_channels(self):
        with pytest.raises(InputFormatError):
            Trajectory(np.array([0.0, 1.0]), np.zeros((2, 0)))

    def test_rejects_non_finite(self):
        with pytest.raises(InputFormatError):
            Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [np.nan]]))


class TestCsv:
    def test_parse_simple(self):
        traj = parse_trajectory("t,q0\n0,0\n0.5,1\n1,2")
        assert traj.sample_count == 3
        assert traj.channel_count == 1
        assert traj.positions[2, 0] == 2.0

    def test_parse_repeated_time_names_line(self):
        text = "t,q0\n0,0\n0.5,1\n0.5,2\n1,3"
        with pytest.raises(InputFormatError, match="non-increasing timestamp at line 4"):
            parse_trajectory(text)

    def test_parse_malformed_number_names_line(self):
        with pytest.raises(InputFormatError, match="line 3"):
            parse_trajectory("t,q0\n0,0\n0.5,oops\n1,2")

    def test_parse_column_mismatch_names_line(self):
        with pytest.raises(InputFormatError, match="line 2"):
            parse_trajectory("t,q0,q1\n0,0\n")

    def test_parse_bad_header(self):
        with pytest.raises(InputFormatError, match="line 1"):
            parse_trajectory("time,j0\n0,0\n1,1")

    def test_write_format(self):
        traj = Trajectory(np.array([0.0, 1.0, 2.0]), np.arange(6.0).reshape(3, 2))
        text = write_trajectory(traj)
        lines = text.split("\n")
        assert lines[0] == "t,q0,q1"
        assert len(lines) == 5 and lines[-1] == ""
        assert not text.endswith(",")

    def test_round_trip_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            traj = random_trajectory(rng)
            back = parse_trajectory(write_trajectory(traj))
            assert np.array_equal(back.times, traj.times)
            assert np.array_equal(back.positions, traj.positions)

    def test_write_injective(self):
        rng = np.random.default_rng(8)
        seen = set()
        for _ in range(50):
            seen.add(write_trajectory(random_trajectory(rng)))
        assert len(seen) == 50


class TestResample:
    def test_identity_on_matching_grid(self):
        times = np.arange(11) * 0.1
        traj = Trajectory(times, np.sin(times)[:, None])
        out = resample_uniform(traj, 0.1)
        assert np.array_equal(out.times, traj.times)
        assert np.array_equal(out.positions, traj.positions)

    def test_linear_interpolation(self):
        traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [2.0]]))
        out = resample_uniform(traj, 0.5)
        assert np.allclose(out.times, [0.0, 0.5, 1.0])
        assert np.allclose(out.positions[:, 0], [0.0, 1.0, 2.0])

    def test_endpoint_clamped(self):
        traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [2.0]]))
        out = resample_uniform(traj, 0.4)
        assert out.times[-1] == 1.0
        assert out.positions[-1, 0] == 2.0

    def test_endpoints_preserved_random(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            traj = random_trajectory(rng)
            out = resample_uniform(traj, traj.duration / rng.integers(5, 50))
            assert np.array_equal(out.positions[0], traj.positions[0])
            assert np.array_equal(out.positions[-1], traj.positions[-1])
            assert out.times[0] == traj.times[0]
            assert out.times[-1] == traj.times[-1]

    def test_dt_too_large(self):
        traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [2.0]]))
        with pytest.raises(ParameterError):
            resample_uniform(traj, 1.0)
        with pytest.raises(ParameterError):
            resample_uniform(traj, -0.1)


class TestKinematics:
    def test_linear_ramp_exact(self):
        t = np.arange(21) * 0.05
        kin = derive_kinematics(Trajectory(t, (2.0 * t)[:, None]))
        assert np.allclose(kin.velocities, 2.0, atol=1e-12)
        assert np.allclose(kin.accelerations, 0.0, atol=1e-10)

    def test_quadratic_exact(self):
        t = np.arange(11) * 0.1
        kin = derive_kinematics(Trajectory(t, (t**2)[:, None]))
        assert np.allclose(kin.velocities[:, 0], 2.0 * t, atol=1e-12)
        assert np.allclose(kin.accelerations[:, 0], 2.0, atol=1e-10)

    def test_constant_exact(self):
        t = np.arange(5) * 0.2
        kin = derive_kinematics(Trajectory(t, np.full((5, 2), 3.3)))
        assert np.allclose(kin.velocities, 0.0, atol=1e-14)
        assert np.allclose(kin.accelerations, 0.0, atol=1e-13)

    def test_rejects_non_uniform(self):
        traj = Trajectory(np.array([0.0, 0.1, 0.3]), np.zeros((3, 1)))
        with pytest.raises(InputFormatError):
            derive_kinematics(traj)

    def test_rejects_short(self):
        traj = Trajectory(np.array([0.0, 0.1]), np.zeros((2, 1)))
        with pytest.raises(InputFormatError):
            derive_kinematics(traj)


class TestSmooth:
    def test_window_one_is_identity(self):
        rng = np.random.default_rng(3)
        traj = random_trajectory(rng)
        out = smooth(traj, 1)
        assert np.array_equal(out.positions, traj.positions)

    def test_constant_unchanged(self):
        t = np.arange(10) * 0.1
        traj = Trajectory(t, np.full((10, 1), 4.2))
        assert np.allclose(smooth(traj, 5).positions, 4.2)

    def test_boundary_shrink(self):
        traj = Trajectory(np.arange(5.0), np.array([1.0, 2, 3, 4, 5])[:, None])
        out = smooth(traj, 3)
        assert np.allclose(out.positions[:, 0], [1.5, 2.0, 3.0, 4.0, 4.5])

    def test_never_extends_range(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            traj = random_trajectory(rng, n=31)
            out = smooth(traj, 2 * int(rng.integers(0, 15)) + 1)
            for c in range(traj.channel_count):
                assert out.positions[:, c].min() >= traj.positions[:, c].min() - 1e-12
                assert out.positions[:, c].max() <= traj.positions[:, c].max() + 1e-12

    def test_rejects_bad_window(self):
        traj = Trajectory(np.arange(5.0), np.zeros((5, 1)))
        with pytest.raises(ParameterError):
            smooth(traj, 2)
        with pytest.raises(ParameterError):
            smooth(traj, 7)


class TestRmse:
    def test_zero_on_identical(self):
        rng = np.random.default_rng(5)
        traj = random_trajectory(rng)
        assert np.all(rmse(traj, traj) == 0.0)

    def test_constant_offset(self):
        t = np.arange(10) * 0.1
        a = Trajectory(t, np.zeros((10, 2)))
        b = Trajectory(t, np.full((10, 2), [1.5, -0.25]))
        assert np.allclose(rmse(a, b), [1.5, 0.25])

    def test_symmetric(self):
        rng = np.random.default_rng(6)
        a = random_trajectory(rng, n=20, channels=2)
        b = Trajectory(a.times, a.positions + rng.normal(size=a.positions.shape))
        assert np.allclose(rmse(a, b), rmse(b, a))

    def test_rejects_mismatched_grids(self):
        a = Trajectory(np.array([0.0, 1.0]), np.zeros((2, 1)))
        b = Trajectory(np.array([0.0, 2.0]), np.zeros((2, 1)))
        with pytest.raises(InputFormatError):
            rmse(a, b)
