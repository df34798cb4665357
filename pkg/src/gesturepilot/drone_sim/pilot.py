"""Deterministic scripted pilot: flies a gate track without a human.

Plain proportional guidance — aim slightly past the pending gate so the
crossing actually happens, command a velocity toward that point, and
convert the required acceleration back through the same lean-angle map
the dynamics uses.  No randomness anywhere, so two runs of ``fly_track``
produce identical trajectories down to the last bit.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..clock import step_for_tick
from ..command_fsm import ControlSetpoint
from .dynamics import (
    DRAG_COEFF,
    GRAVITY,
    PHYSICS_DT,
    THROTTLE_TO_CLIMB,
    DroneState,
    step_dynamics,
)
from .race import RaceTracker, RunRecord, TrajectorySample, check_gate_pass
from .track import Gate, default_track, track_hash

log = logging.getLogger(__name__)


def _wrap_angle(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


class ScriptedPilot:
    """Emit setpoints steering through the track's gates in order.

    ``setpoint_for`` watches the drone state, advances its own notion of
    the pending gate when it sees the disc crossed, and returns None once
    every gate is behind — the caller's cue to land.  Lean and yaw-rate
    caps default well below the flight envelope so the same commands
    survive the round trip through a synthesized hand pose.
    """

    def __init__(self, track: tuple[Gate, ...], *,
                 cruise_speed: float = 1.5,
                 push_through: float = 0.5,
                 accel_gain: float = 1.2,
                 yaw_gain: float = 1.5,
                 climb_gain: float = 2.0,
                 max_lean: float = 0.3,
                 max_yaw_rate: float = 0.6,
                 max_climb_rate: float = 1.5,
                 speed_coefficient: float = 1.0):
        self.track = tuple(track)
        self.cruise_speed = cruise_speed
        self.push_through = push_through
        self.accel_gain = accel_gain
        self.yaw_gain = yaw_gain
        self.climb_gain = climb_gain
        self.max_lean = max_lean
        self.max_yaw_rate = max_yaw_rate
        self.max_climb_rate = max_climb_rate
        self.speed_coefficient = speed_coefficient
        self._next = 0
        self._prev: np.ndarray | None = None

    @property
    def gates_passed(self) -> int:
        return self._next

    @property
    def done(self) -> bool:
        return self._next >= len(self.track)

    def setpoint_for(self, state: DroneState) -> ControlSetpoint | None:
        position = np.asarray(state.position, dtype=np.float64)
        if self._prev is not None and not self.done:
            if check_gate_pass(self._prev, position, self.track[self._next]) is not None:
                self._next += 1
                log.debug("pilot passed gate %d at t=%.2f", self._next, state.time)
        self._prev = position.copy()
        if self.done:
            return None

        gate = self.track[self._next]
        target = gate.center_array + self.push_through * gate.normal_array
        to_target = target - position
        horiz = to_target[:2]
        horiz_dist = float(np.linalg.norm(horiz))
        dist = float(np.linalg.norm(to_target))
        if dist < 1e-9:
            return ControlSetpoint.hover(self.speed_coefficient)

        v_des = self.cruise_speed * to_target / dist
        a_des = self.accel_gain * (v_des[:2] - state.velocity[:2]) + DRAG_COEFF * v_des[:2]

        # Same lean map the dynamics applies, inverted about the current yaw.
        cy, sy = math.cos(state.yaw), math.sin(state.yaw)
        a_fwd = a_des[0] * cy + a_des[1] * sy
        a_side = a_des[0] * sy - a_des[1] * cy
        scale = GRAVITY * self.speed_coefficient
        pitch = _clamp(math.atan(a_fwd / scale), self.max_lean)
        roll = _clamp(math.atan(a_side / scale), self.max_lean)

        if horiz_dist > 0.3:
            bearing = math.atan2(horiz[1], horiz[0])
            yaw_rate = _clamp(self.yaw_gain * _wrap_angle(bearing - state.yaw),
                              self.max_yaw_rate)
        else:
            yaw_rate = 0.0

        climb = _clamp(self.climb_gain * float(to_target[2]), self.max_climb_rate)
        throttle = 0.5 + climb / THROTTLE_TO_CLIMB

        return ControlSetpoint(roll=roll, pitch=pitch, yaw_rate=yaw_rate,
                               throttle=throttle,
                               speed_coefficient=self.speed_coefficient)


def _clamp(value: float, limit: float) -> float:
    return min(max(value, -limit), limit)


def start_position_for(track: tuple[Gate, ...], run_up: float = 3.0) -> np.ndarray:
    """Ground point a short run-up behind the first gate's plane."""
    if not track:
        return np.zeros(3)
    gate = track[0]
    start = gate.center_array - run_up * gate.normal_array
    start[2] = 0.0
    return start


def fly_track(track: tuple[Gate, ...] | None = None, *,
              start_position=None,
              max_time: float = 120.0,
              dt: float = PHYSICS_DT,
              input_hz: int = 30,
              config: dict | None = None,
              **pilot_kwargs) -> RunRecord:
    """Run the scripted pilot over a track and score the flight.

    Physics steps at 1/dt Hz; the pilot only sees the state (and the
    recorder only samples it) on the 30 Hz input schedule, matching how
    a live session drives the simulator.  Stops at the final gate
    crossing or after ``max_time`` of simulated flight, whichever is
    first; an overrun simply yields an unfinished record.
    """
    if track is None:
        track = default_track()
    if start_position is None:
        start_position = start_position_for(track)
    physics_hz = round(1.0 / dt)

    state = DroneState(position=start_position, armed=True)
    pilot = ScriptedPilot(track, **pilot_kwargs)
    tracker = RaceTracker(track)
    samples: list[TrajectorySample] = []
    setpoint = ControlSetpoint.hover(pilot.speed_coefficient)

    tick = 0
    next_tick_step = 0
    total_steps = int(round(max_time / dt))
    for step in range(total_steps + 1):
        if step == next_tick_step:
            sample = TrajectorySample(
                time=state.time,
                position=tuple(float(v) for v in state.position),
                attitude=tuple(float(v) for v in state.attitude))
            samples.append(sample)
            tracker.feed(sample)
            command = pilot.setpoint_for(state)
            if command is None:
                break
            setpoint = command
            tick += 1
            next_tick_step = step_for_tick(tick, physics_hz, input_hz)
        state = step_dynamics(state, setpoint, dt)

    merged = {"physics_hz": physics_hz, "input_hz": input_hz, "source": "scripted"}
    merged.update(config or {})
    return tracker.record(samples, track_sha256=track_hash(track), config=merged)
