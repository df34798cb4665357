"""Palm basis, quaternion and throttle math.

Hand-computed fixtures pin the geometry; scipy's rotation module serves
as an independent oracle for the quaternion conversions.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation as ScipyRotation

from gesturepilot.errors import BadCalibration, DegenerateHand, NonUnitQuaternion
from gesturepilot.handpose import (
    DEFAULT_TRIANGLE,
    HandFrame,
    PoseCalibration,
    compute_basis,
    depth_for_throttle,
    estimate_pose,
    euler_to_quaternion,
    mirror_landmarks,
    quaternion_multiply,
    quaternion_to_euler,
    quaternion_to_rotation,
    rotation_to_quaternion,
    throttle_from_depth,
)

SQ2 = math.sqrt(2.0) / 2.0


def frame_from_triangle(a, b, c):
    """A 21-landmark frame whose palm triangle is exactly (a, b, c)."""
    pts = np.tile(np.asarray(a, dtype=float), (21, 1))
    pts += 0.01 * np.arange(21)[:, None] * np.array([1.0, 0.5, 0.25])
    pts[DEFAULT_TRIANGLE[0]] = a
    pts[DEFAULT_TRIANGLE[1]] = b
    pts[DEFAULT_TRIANGLE[2]] = c
    return HandFrame(timestamp=0.0, landmarks=pts)


def random_unit_quaternion(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return q if q[0] > 0 else -q


class TestBasis:
    def test_flat_palm_axes(self):
        # Wrist at origin, knuckle line along +y: x up the palm, z into
        # the screen (palm faces the camera).
        frame = frame_from_triangle([0, 0, 0], [1, 2, 0], [-1, 2, 0])
        basis = compute_basis(frame)
        np.testing.assert_allclose(basis.x_axis, [0, 1, 0], atol=1e-12)
        np.testing.assert_allclose(basis.y_axis, [1, 0, 0], atol=1e-12)
        np.testing.assert_allclose(basis.z_axis, [0, 0, -1], atol=1e-12)
        np.testing.assert_allclose(basis.m_point, [0, 4 / 3, 0], atol=1e-12)

    def test_basis_is_right_handed_rotation(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pts = rng.normal(size=(21, 3))
            try:
                basis = compute_basis(pts)
            except DegenerateHand:
                continue
            r = basis.rotation
            np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_collinear_triangle_rejected(self):
        frame = frame_from_triangle([0, 0, 0], [1, 0, 0], [2, 0, 0])
        with pytest.raises(DegenerateHand):
            compute_basis(frame)

    def test_all_coincident_rejected(self):
        with pytest.raises(DegenerateHand):
            compute_basis(np.zeros((21, 3)))

    def test_basis_ignores_translation_and_scale(self):
        frame = frame_from_triangle([0, 0, 0], [1, 2, 0], [-1, 2, 0])
        basis = compute_basis(frame)
        moved = compute_basis(frame.landmarks * 3.0 + np.array([5.0, -2.0, 1.0]))
        np.testing.assert_allclose(moved.rotation, basis.rotation, atol=1e-12)


class TestQuaternions:
    def test_flat_palm_quaternion_and_euler(self):
        frame = frame_from_triangle([0, 0, 0], [1, 2, 0], [-1, 2, 0])
        q = rotation_to_quaternion(compute_basis(frame).rotation)
        np.testing.assert_allclose(q, [0.0, SQ2, SQ2, 0.0], atol=1e-12)
        roll, pitch, yaw = quaternion_to_euler(q)
        assert roll == pytest.approx(math.pi, abs=1e-12)
        assert pitch == pytest.approx(0.0, abs=1e-12)
        assert yaw == pytest.approx(math.pi / 2, abs=1e-12)

    def test_identity_rotation(self):
        np.testing.assert_allclose(rotation_to_quaternion(np.eye(3)),
                                   [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_quarter_turn_about_z(self):
        r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(rotation_to_quaternion(r),
                                   [SQ2, 0.0, 0.0, SQ2], atol=1e-12)

    @pytest.mark.parametrize("axis", [0, 1, 2])
    def test_half_turns_use_stable_branches(self, axis):
        # Half turns have trace -1; each axis exercises a different
        # largest-diagonal branch of the conversion.
        vec = np.zeros(3)
        vec[axis] = math.pi
        r = ScipyRotation.from_rotvec(vec).as_matrix()
        q = rotation_to_quaternion(r)
        expected = np.zeros(4)
        expected[axis + 1] = 1.0
        np.testing.assert_allclose(q, expected, atol=1e-12)

    def test_matches_scipy_on_random_rotations(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            r = ScipyRotation.random(random_state=rng).as_matrix()
            q = rotation_to_quaternion(r)
            qs = ScipyRotation.from_matrix(r).as_quat()  # (x, y, z, w)
            qs = np.array([qs[3], qs[0], qs[1], qs[2]])
            assert abs(abs(np.dot(q, qs)) - 1.0) < 1e-12

    def test_round_trip_is_exact_to_tolerance(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            q = random_unit_quaternion(rng)
            q2 = rotation_to_quaternion(quaternion_to_rotation(q))
            np.testing.assert_allclose(q2, q, atol=1e-9)

    def test_w_is_never_negative(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            r = ScipyRotation.random(random_state=rng).as_matrix()
            assert rotation_to_quaternion(r)[0] >= 0.0

    def test_multiply_matches_matrix_product(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            qa = random_unit_quaternion(rng)
            qb = random_unit_quaternion(rng)
            left = quaternion_to_rotation(quaternion_multiply(qa, qb))
            right = quaternion_to_rotation(qa) @ quaternion_to_rotation(qb)
            np.testing.assert_allclose(left, right, atol=1e-12)


class TestEuler:
    def test_simple_angles(self):
        q = euler_to_quaternion(math.pi / 2, 0.0, 0.0)
        np.testing.assert_allclose(q, [SQ2, SQ2, 0.0, 0.0], atol=1e-12)
        assert quaternion_to_euler(q) == pytest.approx((math.pi / 2, 0.0, 0.0))

    def test_matches_scipy_euler(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            q = random_unit_quaternion(rng)
            roll, pitch, yaw = quaternion_to_euler(q)
            expected = ScipyRotation.from_quat(
                [q[1], q[2], q[3], q[0]]).as_euler("ZYX")
            # Skip scipy's own gimbal fallback; ours is tested separately.
            if abs(abs(pitch) - math.pi / 2) < 1e-6:
                continue
            assert yaw == pytest.approx(expected[0], abs=1e-9)
            assert pitch == pytest.approx(expected[1], abs=1e-9)
            assert roll == pytest.approx(expected[2], abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(roll=st.floats(-3.1, 3.1), pitch=st.floats(-1.5, 1.5),
           yaw=st.floats(-3.1, 3.1))
    def test_euler_round_trip_preserves_rotation(self, roll, pitch, yaw):
        q = euler_to_quaternion(roll, pitch, yaw)
        q2 = euler_to_quaternion(*quaternion_to_euler(q))
        np.testing.assert_allclose(quaternion_to_rotation(q2),
                                   quaternion_to_rotation(q), atol=1e-9)

    @pytest.mark.parametrize("pitch,expected_yaw", [
        (math.pi / 2, 0.4),    # straight up: only yaw - roll observable
        (-math.pi / 2, 1.0),   # straight down: only yaw + roll observable
    ])
    def test_gimbal_lock_pins_roll_to_zero(self, pitch, expected_yaw):
        q = euler_to_quaternion(0.3, pitch, 0.7)
        roll, p, yaw = quaternion_to_euler(q)
        assert roll == 0.0
        assert p == pytest.approx(pitch, abs=1e-9)
        assert yaw == pytest.approx(expected_yaw, abs=1e-9)
        np.testing.assert_allclose(
            quaternion_to_rotation(euler_to_quaternion(roll, p, yaw)),
            quaternion_to_rotation(q), atol=1e-9)

    def test_non_unit_quaternion_rejected(self):
        with pytest.raises(NonUnitQuaternion):
            quaternion_to_euler(np.array([1.0, 1.0, 0.0, 0.0]))


class TestThrottle:
    def test_linear_range_endpoints(self):
        assert throttle_from_depth(0.3) == 1.0
        assert throttle_from_depth(0.8) == 0.0
        assert throttle_from_depth(0.2) == 1.0   # nearer than near: clamp
        assert throttle_from_depth(0.9) == 0.0   # farther than far: clamp

    def test_deadband_snaps_to_hover(self):
        # Raw value 0.48 sits inside the +-0.05 band around 0.5.
        assert throttle_from_depth(0.56) == 0.5
        assert throttle_from_depth(0.55) == pytest.approx(0.5)
        # Just outside the band the linear value passes through.
        assert throttle_from_depth(0.52) == pytest.approx(0.56)
        assert throttle_from_depth(0.425) == pytest.approx(0.75)

    def test_depth_inverse(self):
        calib = PoseCalibration()
        for throttle in (0.0, 0.25, 0.75, 1.0):
            depth = depth_for_throttle(throttle, calib)
            assert throttle_from_depth(depth, calib) == pytest.approx(throttle)

    def test_bad_calibration_rejected(self):
        bad = PoseCalibration(d_near=0.8, d_far=0.3)
        with pytest.raises(BadCalibration):
            throttle_from_depth(0.5, bad)
        with pytest.raises(BadCalibration):
            depth_for_throttle(0.5, bad)


class TestEstimatePose:
    def test_reference_rotation_reports_relative_pose(self):
        frame = frame_from_triangle([0, 0, 0.5], [0.1, 0.2, 0.5], [-0.1, 0.2, 0.5])
        absolute = estimate_pose(frame)
        calib = PoseCalibration(
            reference_rotation=quaternion_to_rotation(absolute.quaternion))
        relative = estimate_pose(frame, calib)
        np.testing.assert_allclose(relative.quaternion, [1, 0, 0, 0], atol=1e-9)
        assert relative.euler == pytest.approx((0.0, 0.0, 0.0), abs=1e-9)

    def test_rotation_equivariance(self):
        # Rotating the landmarks rotates the reported pose by the same
        # amount when the unrotated basis is the calibration reference.
        rng = np.random.default_rng(31)
        base = frame_from_triangle([0, 0, 0.5], [0.1, 0.2, 0.5], [-0.1, 0.2, 0.5])
        ref = compute_basis(base.landmarks).rotation
        calib = PoseCalibration(reference_rotation=ref)
        for _ in range(100):
            r_cmd = ScipyRotation.random(random_state=rng).as_matrix()
            rotated = HandFrame(0.0, base.landmarks @ r_cmd.T)
            pose = estimate_pose(rotated, calib)
            np.testing.assert_allclose(
                quaternion_to_rotation(pose.quaternion), r_cmd, atol=1e-6)

    def test_left_hand_mirrors_to_right(self):
        right = frame_from_triangle([0, 0, 0.5], [0.1, 0.2, 0.5], [-0.1, 0.2, 0.5])
        left = HandFrame(0.0, mirror_landmarks(right.landmarks), handedness="left")
        pose_r = estimate_pose(right)
        pose_l = estimate_pose(left)
        np.testing.assert_allclose(pose_l.quaternion, pose_r.quaternion, atol=1e-12)
        assert pose_l.throttle == pose_r.throttle

    def test_throttle_follows_palm_depth(self):
        frame = frame_from_triangle([0, 0, 0.3], [0.1, 0.2, 0.3], [-0.1, 0.2, 0.3])
        assert estimate_pose(frame).throttle == 1.0

    def test_frame_validation(self):
        with pytest.raises(ValueError):
            HandFrame(0.0, np.zeros((20, 3)))
        with pytest.raises(ValueError):
            HandFrame(0.0, np.full((21, 3), np.nan))
        with pytest.raises(ValueError):
            HandFrame(0.0, np.zeros((21, 3)), handedness="both")
