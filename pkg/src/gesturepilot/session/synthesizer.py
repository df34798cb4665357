"""Synthetic landmark frames: an ideal operator rendered as geometry.

``LandmarkSynthesizer`` turns a gesture template into a 21-point 3D hand
at a chosen rotation and depth, which is everything the ingest side of a
session expects from a camera.  ``SyntheticOperator`` strings frames
into a full flight script: arm, take off, pick a speed, steer the race
with a rotated open hand, land, disarm.  Both are deterministic, so a
session driven by them can be recorded, replayed and compared
byte for byte.
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace

import numpy as np

from ..command_fsm import FsmConfig, Mode, PilotState
from ..drone_sim import DroneState, Gate, ScriptedPilot
from ..gesture_net import GestureLabel, gesture_template
from ..handpose import (
    PoseCalibration,
    compute_basis,
    depth_for_throttle,
    euler_to_quaternion,
    quaternion_to_rotation,
)
from .messages import IngestMessage

log = logging.getLogger(__name__)


class LandmarkSynthesizer:
    """Render gesture templates as camera-space landmark frames.

    Templates are flat; a frame is the template scaled to hand size,
    rotated about the wrist, and pushed to the depth that encodes the
    requested throttle.  ``calibration`` carries the neutral reference
    rotation of the open hand, so poses estimated from these frames
    read as the rotation applied here.
    """

    def __init__(self, base_calibration: PoseCalibration | None = None, *,
                 hand_scale: float = 0.15, handedness: str = "right",
                 reference_label: GestureLabel = GestureLabel.FIVE):
        base = base_calibration if base_calibration is not None else PoseCalibration()
        self.hand_scale = hand_scale
        self.handedness = handedness
        self._points = {}
        for label in GestureLabel:
            flat = gesture_template(label) * hand_scale
            self._points[label] = np.column_stack([flat, np.zeros(21)])
        neutral = compute_basis(self._points[reference_label], base.triangle).rotation
        self.neutral_rotation = neutral
        self.calibration = replace(base, reference_rotation=neutral)

    def frame(self, label: GestureLabel, *, time: float,
              roll: float = 0.0, pitch: float = 0.0, yaw: float = 0.0,
              throttle: float = 0.5, frame_id: int | None = None) -> IngestMessage:
        """One landmark frame: ``label``'s shape, rotated and placed in depth.

        The mirror convention is honoured for left hands: the stored
        templates are right-handed, so a left-handed synthesizer flips x
        (the ingest pipeline flips it back).
        """
        pts = self._points[label]
        if roll != 0.0 or pitch != 0.0 or yaw != 0.0:
            rot = quaternion_to_rotation(euler_to_quaternion(roll, pitch, yaw))
            pts = pts @ rot.T
        tri = self.calibration.triangle
        centroid = pts[list(tri)].mean(axis=0)
        depth = depth_for_throttle(throttle, self.calibration)
        pts = pts + (np.array([0.0, 0.0, depth]) - centroid)
        if self.handedness == "left":
            pts = pts.copy()
            pts[:, 0] = -pts[:, 0]
        return IngestMessage(time=time, handedness=self.handedness,
                             landmarks=pts, frame_id=frame_id)


def _invert_shaped(value: float, gain: float, deadband: float) -> float:
    """Hand angle that makes the setpoint shaping reproduce ``value``.

    The shaping zeroes angles inside the deadband, so requests smaller
    than the deadband floor are pushed just past it; the 30 Hz loop
    dithers them against zero and the average tracks the request.
    """
    if value == 0.0:
        return 0.0
    angle = value / gain
    floor = deadband + 1e-6
    if abs(angle) < floor:
        return math.copysign(floor, angle)
    return angle


class SyntheticOperator:
    """Scripted hand choreography for a complete flight.

    Watches the session's pilot mode and drone state the way a human
    watches the drone, and answers every tick with the landmark frame a
    camera would have seen.  Returns None once the script is over.
    """

    PHASES = ("arm", "takeoff", "set_speed", "enter_race", "race",
              "land", "descend", "disarm", "done")

    def __init__(self, track: tuple[Gate, ...],
                 synthesizer: LandmarkSynthesizer | None = None, *,
                 fsm: FsmConfig | None = None,
                 input_hz: int = 30,
                 takeoff_altitude: float = 1.5,
                 race_speed: float = 1.5,
                 **pilot_kwargs):
        self.synthesizer = synthesizer if synthesizer is not None else LandmarkSynthesizer()
        self.fsm = fsm if fsm is not None else FsmConfig()
        self.input_hz = input_hz
        self.takeoff_altitude = takeoff_altitude
        self.race_speed = race_speed
        self.pilot = ScriptedPilot(track, speed_coefficient=race_speed, **pilot_kwargs)
        self.phase = "arm"
        self._speed_gesture = {0.5: GestureLabel.ONE, 1.0: GestureLabel.TWO,
                               1.5: GestureLabel.THREE}[race_speed]

    @property
    def calibration(self) -> PoseCalibration:
        return self.synthesizer.calibration

    def _advance_phase(self, drone: DroneState, state: PilotState) -> None:
        mode = state.mode
        if self.phase == "arm" and mode is not Mode.DISARMED:
            self.phase = "takeoff"
        if self.phase == "takeoff" and mode is Mode.HOVERING \
                and drone.position[2] >= self.takeoff_altitude - 0.1:
            self.phase = "set_speed"
        if self.phase == "set_speed" and state.speed_coefficient == self.race_speed:
            self.phase = "enter_race"
        if self.phase == "enter_race" and mode is Mode.ORIENTATION_CONTROL:
            self.phase = "race"
        if self.phase == "race" and self.pilot.done:
            self.phase = "land"
        if self.phase == "land" and mode is Mode.LANDING:
            self.phase = "descend"
        if self.phase == "descend" and mode is Mode.ARMED:
            self.phase = "disarm"
        if self.phase == "disarm" and mode is Mode.DISARMED:
            self.phase = "done"
            log.debug("operator script complete")

    def frame(self, tick: int, drone: DroneState,
              state: PilotState) -> IngestMessage | None:
        self._advance_phase(drone, state)
        time = tick / self.input_hz
        phase = self.phase
        if phase == "done":
            return None
        if phase == "race":
            setpoint = self.pilot.setpoint_for(drone)
            if setpoint is None:
                self.phase = "land"
            else:
                coeff = state.speed_coefficient
                deadband = self.fsm.angle_deadband
                return self.synthesizer.frame(
                    GestureLabel.FIVE, time=time, frame_id=tick,
                    roll=_invert_shaped(setpoint.roll,
                                        self.fsm.attitude_gain * coeff, deadband),
                    pitch=_invert_shaped(setpoint.pitch,
                                         self.fsm.attitude_gain * coeff, deadband),
                    yaw=_invert_shaped(setpoint.yaw_rate,
                                       self.fsm.yaw_gain * coeff, deadband),
                    throttle=setpoint.throttle)
        label = {
            "arm": GestureLabel.THUMBS_UP,
            "takeoff": GestureLabel.ROCK,
            "set_speed": self._speed_gesture,
            "enter_race": GestureLabel.FIVE,
            "land": GestureLabel.OKAY,
            "descend": GestureLabel.OKAY,
            "disarm": GestureLabel.THUMBS_UP,
        }[self.phase]
        return self.synthesizer.frame(label, time=time, frame_id=tick)
