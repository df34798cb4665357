"""6-DoF hand pose from 21 landmarks.

A hand observation is 21 points in camera coordinates (x right, y down,
z away from the camera, metres).  Three palm points span a rigid triangle:

    A = wrist (landmark 0), B = index MCP (5), C = pinky MCP (17)

From these we build a right-handed orthonormal basis:

    Z = normalize(AC x AB)        palm-plane normal
    M = (A + B + C) / 3           palm centroid
    X = normalize(AM)             wrist-to-centroid direction
    Y = normalize(Z x X)
    Z = X x Y                     re-orthogonalized, det = +1

The basis becomes a unit quaternion, the quaternion becomes ZYX Euler
angles (roll, pitch, yaw), and the depth of M becomes a throttle value in
[0, 1] through a linear near/far calibration with a hover deadband.

All functions are pure; nothing here holds state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadCalibration, DegenerateHand, NonUnitQuaternion

# Landmark indices of the palm triangle (standard 21-point hand topology).
WRIST = 0
INDEX_MCP = 5
PINKY_MCP = 17
DEFAULT_TRIANGLE = (WRIST, INDEX_MCP, PINKY_MCP)

LANDMARK_COUNT = 21

# |v| below this is treated as degenerate geometry.
_DEGENERATE_EPS = 1e-9
# Entering the gimbal-lock branch of the Euler conversion.
_GIMBAL_EPS = 1e-6


@dataclass(frozen=True)
class HandFrame:
    """One timestamped observation of a single hand.

    landmarks is a (21, 3) float array in camera coordinates (metres).
    """

    timestamp: float
    landmarks: np.ndarray
    handedness: str = "right"

    def __post_init__(self):
        pts = np.asarray(self.landmarks, dtype=float)
        if pts.shape != (LANDMARK_COUNT, 3):
            raise ValueError(f"expected ({LANDMARK_COUNT}, 3) landmarks, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmarks must be finite")
        if self.handedness not in ("left", "right"):
            raise ValueError(f"handedness must be 'left' or 'right', got {self.handedness!r}")
        object.__setattr__(self, "landmarks", pts)


@dataclass(frozen=True)
class HandBasis:
    """Right-handed orthonormal palm basis plus the centroid M."""

    x_axis: np.ndarray
    y_axis: np.ndarray
    z_axis: np.ndarray
    m_point: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        """3x3 rotation matrix with the axes as columns."""
        return np.column_stack([self.x_axis, self.y_axis, self.z_axis])


@dataclass(frozen=True)
class HandPose:
    """Orientation (quaternion + Euler) and throttle derived from one frame."""

    quaternion: np.ndarray  # (w, x, y, z), unit norm, w >= 0
    euler: tuple[float, float, float]  # roll, pitch, yaw in radians
    throttle: float

    @property
    def roll(self) -> float:
        return self.euler[0]

    @property
    def pitch(self) -> float:
        return self.euler[1]

    @property
    def yaw(self) -> float:
        return self.euler[2]


@dataclass(frozen=True)
class PoseCalibration:
    """Tunables for the frame -> pose mapping.

    d_near / d_far bound the throttle depth range: a hand at d_near metres
    commands full throttle, at d_far zero.  Raw throttle within
    throttle_deadband of 0.5 snaps to exactly 0.5 so a resting hand hovers.
    reference_rotation, when set, is the basis of the operator's neutral
    hand; measured rotations are reported relative to it.
    """

    d_near: float = 0.3
    d_far: float = 0.8
    throttle_deadband: float = 0.05
    triangle: tuple[int, int, int] = DEFAULT_TRIANGLE
    reference_rotation: np.ndarray | None = field(default=None, repr=False)


def compute_basis(frame: HandFrame | np.ndarray,
                  triangle: tuple[int, int, int] = DEFAULT_TRIANGLE) -> HandBasis:
    """Build the palm basis from a frame (or a raw (21, 3) landmark array).

    Raises DegenerateHand when the triangle points are collinear or the
    wrist coincides with the centroid.
    """
    pts = frame.landmarks if isinstance(frame, HandFrame) else np.asarray(frame, dtype=float)
    a, b, c = pts[triangle[0]], pts[triangle[1]], pts[triangle[2]]

    z = np.cross(c - a, b - a)
    nz = np.linalg.norm(z)
    if nz < _DEGENERATE_EPS:
        raise DegenerateHand("palm triangle is collinear or collapsed")
    z = z / nz

    m = (a + b + c) / 3.0
    x = m - a
    nx = np.linalg.norm(x)
    if nx < _DEGENERATE_EPS:
        raise DegenerateHand("wrist coincides with palm centroid")
    x = x / nx

    y = np.cross(z, x)
    y = y / np.linalg.norm(y)
    # x lies in the triangle plane and z is its normal, so y is already a
    # unit vector; the final cross makes the triad exactly right-handed.
    z = np.cross(x, y)
    return HandBasis(x_axis=x, y_axis=y, z_axis=z, m_point=m)


def rotation_to_quaternion(rotation: np.ndarray) -> np.ndarray:
    """Extract a unit quaternion (w, x, y, z) from a rotation matrix.

    Uses the largest-diagonal (Shepperd) branch so the division is always
    well conditioned.  Sign convention: w >= 0; if w == 0 the first
    nonzero vector component is made positive.
    """
    r = np.asarray(rotation, dtype=float)
    t = r[0, 0] + r[1, 1] + r[2, 2]
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array([
            0.25 * s,
            (r[2, 1] - r[1, 2]) / s,
            (r[0, 2] - r[2, 0]) / s,
            (r[1, 0] - r[0, 1]) / s,
        ])
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([
            (r[2, 1] - r[1, 2]) / s,
            0.25 * s,
            (r[0, 1] + r[1, 0]) / s,
            (r[0, 2] + r[2, 0]) / s,
        ])
    elif r[1, 1] >= r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([
            (r[0, 2] - r[2, 0]) / s,
            (r[0, 1] + r[1, 0]) / s,
            0.25 * s,
            (r[1, 2] + r[2, 1]) / s,
        ])
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([
            (r[1, 0] - r[0, 1]) / s,
            (r[0, 2] + r[2, 0]) / s,
            (r[1, 2] + r[2, 1]) / s,
            0.25 * s,
        ])
    q = q / np.linalg.norm(q)
    return _canonical_sign(q)


def _canonical_sign(q: np.ndarray) -> np.ndarray:
    if q[0] < 0.0:
        return -q
    if q[0] == 0.0:
        for component in q[1:]:
            if component != 0.0:
                return q if component > 0.0 else -q
    return q


def basis_to_quaternion(basis: HandBasis) -> np.ndarray:
    """Quaternion whose rotation matrix has the basis axes as columns."""
    return rotation_to_quaternion(basis.rotation)


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def euler_to_quaternion(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Quaternion of Rz(yaw) @ Ry(pitch) @ Rx(roll), w >= 0."""
    qx = np.array([math.cos(roll / 2), math.sin(roll / 2), 0.0, 0.0])
    qy = np.array([math.cos(pitch / 2), 0.0, math.sin(pitch / 2), 0.0])
    qz = np.array([math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2)])
    return _canonical_sign(quaternion_multiply(qz, quaternion_multiply(qy, qx)))


def _wrap_half_open(angle: float) -> float:
    """Map an atan2 result into (-pi, pi]."""
    if angle <= -math.pi:
        return angle + 2.0 * math.pi
    return angle


def quaternion_to_euler(q: np.ndarray, tol: float = 1e-6) -> tuple[float, float, float]:
    """ZYX Euler angles (roll, pitch, yaw) of a unit quaternion.

    roll and yaw lie in (-pi, pi], pitch in [-pi/2, pi/2].  The pitch
    channel uses the two-argument arctangent form of arcsin, which stays
    accurate near the +-pi/2 singularity.  Within 1e-6 of gimbal lock the
    degenerate axis is resolved by the roll := 0 convention.

    Raises NonUnitQuaternion when |q| deviates from 1 by more than tol.
    """
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q)
    if abs(norm - 1.0) > tol:
        raise NonUnitQuaternion(f"|q| = {norm:.9f}")
    w, x, y, z = q / norm

    sin_pitch_half = w * y - x * z  # = sin(pitch) / 2
    if abs(sin_pitch_half) > 0.5 - _GIMBAL_EPS:
        sp = min(max(sin_pitch_half, -0.5), 0.5)
        pitch = -math.pi / 2 + 2.0 * math.atan2(math.sqrt(1 + 2 * sp), math.sqrt(1 - 2 * sp))
        roll = 0.0
        # At lock only yaw -+ roll is observable; with roll pinned to zero
        # the remaining angle comes straight off the quaternion.
        if sin_pitch_half > 0:
            yaw = -2.0 * math.atan2(x, w)
        else:
            yaw = 2.0 * math.atan2(x, w)
        yaw = _wrap_half_open(math.atan2(math.sin(yaw), math.cos(yaw)))
    else:
        roll = math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
        pitch = -math.pi / 2 + 2.0 * math.atan2(
            math.sqrt(1 + 2 * sin_pitch_half), math.sqrt(1 - 2 * sin_pitch_half))
        yaw = math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
        roll = _wrap_half_open(roll)
        yaw = _wrap_half_open(yaw)
    return roll, pitch, yaw


def throttle_from_depth(m_depth: float, calib: PoseCalibration = PoseCalibration()) -> float:
    """Map the palm centroid depth to throttle in [0, 1].

    Nearer hand means more throttle.  Raw values within the deadband of
    0.5 snap to exactly 0.5 so the neutral hand commands a clean hover.
    """
    if calib.d_near >= calib.d_far:
        raise BadCalibration(f"d_near {calib.d_near} must be < d_far {calib.d_far}")
    raw = (calib.d_far - m_depth) / (calib.d_far - calib.d_near)
    raw = min(max(raw, 0.0), 1.0)
    if abs(raw - 0.5) <= calib.throttle_deadband:
        return 0.5
    return raw


def depth_for_throttle(throttle: float, calib: PoseCalibration = PoseCalibration()) -> float:
    """Inverse of throttle_from_depth (ignoring the deadband snap)."""
    if calib.d_near >= calib.d_far:
        raise BadCalibration(f"d_near {calib.d_near} must be < d_far {calib.d_far}")
    return calib.d_far - throttle * (calib.d_far - calib.d_near)


def mirror_landmarks(landmarks: np.ndarray) -> np.ndarray:
    """Flip x so a left hand is processed with the right-hand convention."""
    out = np.array(landmarks, dtype=float, copy=True)
    out[:, 0] = -out[:, 0]
    return out


def estimate_pose(frame: HandFrame, calib: PoseCalibration = PoseCalibration()) -> HandPose:
    """Full frame -> HandPose pipeline.

    Composes the basis construction, quaternion extraction, Euler
    conversion and depth-to-throttle mapping.  Left hands are mirrored
    first so one convention serves both.  When the calibration carries a
    reference rotation R_ref, the reported rotation is R @ R_ref^T, i.e.
    the rotation the operator applied to their neutral hand.
    """
    pts = frame.landmarks
    if frame.handedness == "left":
        pts = mirror_landmarks(pts)
    basis = compute_basis(pts, calib.triangle)
    q = basis_to_quaternion(basis)
    if calib.reference_rotation is not None:
        q = rotation_to_quaternion(quaternion_to_rotation(q) @ calib.reference_rotation.T)
    euler = quaternion_to_euler(q)
    throttle = throttle_from_depth(float(basis.m_point[2]), calib)
    return HandPose(quaternion=q, euler=euler, throttle=throttle)
