"""Position-hold flight dynamics for a point-mass quadrotor.

The model mirrors how a position-hold autopilot feels from the outside
rather than how a real airframe works inside: lean angles command
horizontal acceleration g*tan(angle) scaled by the speed coefficient,
linear drag brakes the drone when the sticks go neutral, and throttle
offsets from 0.5 command a climb rate tracked by a first-order loop.
Yaw integrates the commanded rate; attitude is rebuilt kinematically
from the commanded lean and the integrated yaw.

Each step integrates the linear ODE v' = a - c*v in closed form over the
timestep (exact for a held setpoint), so trajectories converge under dt
refinement far below the step size instead of drifting linearly with it.
The ground is a hard clamp at z = 0 that swallows downward velocity;
there is no crash model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..command_fsm import ControlSetpoint
from ..errors import NotArmed
from ..handpose import euler_to_quaternion

GRAVITY = 9.81            # m/s^2
DRAG_COEFF = 0.5          # 1/s, linear drag on horizontal velocity
CLIMB_RATE_LIMIT = 2.0    # m/s, throttle authority in either direction
CLIMB_GAIN = 3.0          # 1/s, vertical velocity-loop bandwidth
THROTTLE_TO_CLIMB = 4.0   # m/s per unit throttle offset from 0.5
PHYSICS_DT = 0.01         # s, nominal integration step
_MAX_DT = 0.02


def _frozen_vector(values, name: str, size: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(size)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DroneState:
    """World-frame snapshot (ENU: x east, y north, z up)."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    yaw: float = 0.0
    armed: bool = False
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen_vector(self.position, "position", 3))
        object.__setattr__(self, "velocity", _frozen_vector(self.velocity, "velocity", 3))
        object.__setattr__(self, "attitude", _frozen_vector(self.attitude, "attitude", 4))
        if self.position[2] < 0.0:
            raise ValueError("position.z must be >= 0")
        if abs(np.linalg.norm(self.attitude) - 1.0) > 1e-6:
            raise ValueError("attitude must be a unit quaternion")


def arm(state: DroneState) -> DroneState:
    return replace(state, armed=True)


def disarm(state: DroneState) -> DroneState:
    return replace(state, armed=False)


def _is_idle(setpoint: ControlSetpoint) -> bool:
    return (setpoint.roll == 0.0 and setpoint.pitch == 0.0
            and setpoint.yaw_rate == 0.0 and setpoint.throttle == 0.0)


def step_dynamics(state: DroneState, setpoint: ControlSetpoint, dt: float = PHYSICS_DT) -> DroneState:
    """Advance one timestep under a held setpoint.

    Raises NotArmed if a disarmed drone is given anything but the idle
    (all-zero) setpoint.  A disarmed drone that is still airborne sinks
    at the climb-rate limit through the same velocity loop; motors-off
    ballistics are deliberately out of scope.
    """
    if not 0.0 < dt <= _MAX_DT:
        raise ValueError(f"dt must be in (0, {_MAX_DT}], got {dt}")
    if not state.armed and not _is_idle(setpoint):
        raise NotArmed("cannot command a disarmed drone")

    if state.armed:
        roll_cmd = setpoint.roll
        pitch_cmd = setpoint.pitch
        yaw_rate = setpoint.yaw_rate
        climb_sp = THROTTLE_TO_CLIMB * (setpoint.throttle - 0.5)
        authority = setpoint.speed_coefficient
    else:
        roll_cmd = pitch_cmd = yaw_rate = 0.0
        climb_sp = -CLIMB_RATE_LIMIT
        authority = 0.0
    climb_sp = min(max(climb_sp, -CLIMB_RATE_LIMIT), CLIMB_RATE_LIMIT)

    yaw_new = state.yaw + yaw_rate * dt
    yaw_mid = state.yaw + 0.5 * yaw_rate * dt

    # Commanded lean maps to horizontal acceleration in the body frame
    # (pitch forward, roll right), rotated to world by the mid-step yaw.
    a_fwd = GRAVITY * math.tan(pitch_cmd) * authority
    a_side = GRAVITY * math.tan(roll_cmd) * authority
    cy, sy = math.cos(yaw_mid), math.sin(yaw_mid)
    ax = a_fwd * cy + a_side * sy
    ay = a_fwd * sy - a_side * cy

    # Horizontal: v' = a - c v integrated exactly over dt.
    c = DRAG_COEFF
    alpha = math.exp(-c * dt)
    vx, vy, vz = state.velocity
    px, py, pz = state.position
    vx_new = vx * alpha + (ax / c) * (1.0 - alpha)
    vy_new = vy * alpha + (ay / c) * (1.0 - alpha)
    px_new = px + vx * (1.0 - alpha) / c + (ax / c) * (dt - (1.0 - alpha) / c)
    py_new = py + vy * (1.0 - alpha) / c + (ay / c) * (dt - (1.0 - alpha) / c)

    # Vertical: first-order loop toward the climb setpoint, same closed form.
    k = CLIMB_GAIN
    beta = math.exp(-k * dt)
    vz_new = climb_sp + (vz - climb_sp) * beta
    pz_new = pz + climb_sp * dt + (vz - climb_sp) * (1.0 - beta) / k

    if pz_new <= 0.0:
        pz_new = 0.0
        vz_new = max(vz_new, 0.0)

    attitude = euler_to_quaternion(roll_cmd, pitch_cmd, yaw_new)
    attitude = attitude / np.linalg.norm(attitude)

    return DroneState(
        position=np.array([px_new, py_new, pz_new]),
        velocity=np.array([vx_new, vy_new, vz_new]),
        attitude=attitude,
        yaw=yaw_new,
        armed=state.armed,
        time=state.time + dt,
    )
