"""Per-tick session orchestration: landmarks in, telemetry and records out.

One tick is the unit of work everywhere: consume at most one landmark
frame, classify and debounce it, run the command machine, derive the
setpoint for the coming interval, advance the physics to the next tick
boundary, and publish one telemetry snapshot.  The same ``tick`` method
drives the synchronous replay loop and the live socket server, which is
what makes a replayed log reproduce a live session exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Protocol

import numpy as np

from ..clock import step_for_tick
from ..command_fsm import (
    CommandKind,
    ControlSetpoint,
    FsmConfig,
    Mode,
    PilotState,
    debounce,
    landed,
    make_setpoint,
    step_fsm,
)
from ..drone_sim import (
    DroneState,
    Gate,
    RaceTracker,
    RunRecord,
    TrajectorySample,
    arm,
    disarm,
    step_dynamics,
    track_hash,
)
from ..errors import DegenerateHand, DegenerateSample, IngestClosed
from ..gesture_net import GestureLabel, MlpModel, features_from_landmarks, predict
from ..gesture_net.data import normalize_features
from ..handpose import HandFrame, PoseCalibration, estimate_pose
from .messages import IngestMessage, TelemetryMessage, encode_ingest, iter_replay
from .synthesizer import SyntheticOperator

log = logging.getLogger(__name__)

TAKEOFF_CLIMB_THROTTLE = 0.875   # 1.5 m/s up through the climb loop
LANDING_DESCENT_THROTTLE = 0.25  # 1.0 m/s down


@dataclass
class SessionConfig:
    """Everything a session needs beyond its frame source."""

    model: MlpModel
    track: tuple[Gate, ...] = ()
    calibration: PoseCalibration = field(default_factory=PoseCalibration)
    fsm: FsmConfig = field(default_factory=FsmConfig)
    physics_hz: int = 100
    input_hz: int = 30
    takeoff_altitude: float = 1.5
    start_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    max_time: float = 300.0
    record_path: str | None = None

    def header(self) -> dict:
        """Run-record header fields; deterministic for a given config."""
        return {
            "physics_hz": self.physics_hz,
            "input_hz": self.input_hz,
            "takeoff_altitude": self.takeoff_altitude,
            "start": [float(v) for v in self.start_position],
            "d_near": self.calibration.d_near,
            "d_far": self.calibration.d_far,
        }


class SessionPipeline:
    """The tick engine.  Owns every piece of mutable session state."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self.state = PilotState()
        self.drone = DroneState(position=np.array(config.start_position, dtype=float))
        self.tracker = RaceTracker(config.track)
        self.samples: list[TrajectorySample] = []
        self.setpoint = ControlSetpoint.zero()
        self.tick_index = 0
        self.flew = False
        self._dt = 1.0 / config.physics_hz
        self._step = 0
        self._takeoff_active = False
        self._last_frame: IngestMessage | None = None
        self._last_frame_tick = -10
        self._last_prediction: GestureLabel | None = None
        self._last_confidence = 0.0

    # -- end conditions ----------------------------------------------------

    @property
    def race_finished(self) -> bool:
        return bool(self.config.track) and self.tracker.finished

    @property
    def done_disarmed(self) -> bool:
        return self.flew and self.state.mode is Mode.DISARMED

    @property
    def finished(self) -> bool:
        return self.race_finished or self.done_disarmed

    # -- the tick ----------------------------------------------------------

    def tick(self, frame: IngestMessage | None) -> TelemetryMessage:
        snapshot = self.drone
        sample = TrajectorySample(
            time=snapshot.time,
            position=tuple(float(v) for v in snapshot.position),
            attitude=tuple(float(v) for v in snapshot.attitude))
        self.samples.append(sample)
        event = self.tracker.feed(sample)
        new_events = (event,) if event is not None else ()

        working = self._resolve_frame(frame)
        pose = None
        stable = self.state.stable_gesture
        if working is not None:
            pose, stable = self._classify(working)
        self.state, commands = step_fsm(self.state, stable, pose, self.config.fsm)
        for command in commands:
            self._apply_command(command)
        if self.state.mode in (Mode.HOVERING, Mode.ORIENTATION_CONTROL, Mode.LANDING):
            self.flew = True

        self.setpoint = self._setpoint_for_mode(pose)
        self._advance_physics()
        if self.state.mode is Mode.LANDING and self.drone.position[2] <= 0.0:
            self.state = landed(self.state)
            log.info("touchdown at t=%.2f", self.drone.time)

        telemetry = TelemetryMessage(
            time=snapshot.time,
            position=sample.position,
            velocity=tuple(float(v) for v in snapshot.velocity),
            attitude=sample.attitude,
            armed=snapshot.armed,
            mode=self.state.mode.value,
            stable_gesture=self.state.stable_gesture.key
            if self.state.stable_gesture is not None else None,
            last_gesture=self._last_prediction.key
            if self._last_prediction is not None else None,
            confidence=self._last_confidence,
            roll=self.setpoint.roll,
            pitch=self.setpoint.pitch,
            yaw_rate=self.setpoint.yaw_rate,
            throttle=self.setpoint.throttle,
            speed_coefficient=self.setpoint.speed_coefficient,
            gates_passed=len(self.tracker.events),
            gates_total=len(self.config.track),
            new_events=new_events,
            race_finished=self.race_finished,
        )
        self.tick_index += 1
        return telemetry

    # -- helpers -----------------------------------------------------------

    def _resolve_frame(self, frame: IngestMessage | None) -> IngestMessage | None:
        """Newest frame, or the previous one if it is at most one tick old."""
        if frame is not None:
            self._last_frame = frame
            self._last_frame_tick = self.tick_index
            return frame
        if self._last_frame is not None \
                and self.tick_index - self._last_frame_tick <= 1:
            return self._last_frame
        return None

    def _classify(self, frame: IngestMessage):
        """Pose and debounced gesture for one frame.

        Geometry too degenerate to process is treated exactly like a
        missing hand: the safety path owns that case.
        """
        try:
            hand = HandFrame(timestamp=frame.time, landmarks=frame.landmarks,
                             handedness=frame.handedness)
            pose = estimate_pose(hand, self.config.calibration)
            features = normalize_features(
                features_from_landmarks(frame.landmarks, frame.handedness))
        except (DegenerateHand, DegenerateSample) as exc:
            log.warning("frame at t=%.3f unusable: %s", frame.time, exc)
            return None, self.state.stable_gesture
        index, confidence = predict(self.config.model, features)
        prediction = GestureLabel(index)
        self._last_prediction = prediction
        self._last_confidence = confidence
        self.state, stable = debounce(prediction, confidence, self.state,
                                      self.config.fsm)
        return pose, stable

    def _apply_command(self, command) -> None:
        kind = command.kind
        if kind is CommandKind.ARM:
            self.drone = arm(self.drone)
        elif kind is CommandKind.DISARM:
            self.drone = disarm(self.drone)
            self._takeoff_active = False
        elif kind is CommandKind.TAKEOFF:
            self._takeoff_active = True
        log.info("command %s at tick %d (mode %s)", kind.value, self.tick_index,
                 self.state.mode.value)

    def _setpoint_for_mode(self, pose) -> ControlSetpoint:
        mode = self.state.mode
        speed = self.state.speed_coefficient
        if mode is Mode.DISARMED or mode is Mode.ARMED:
            return ControlSetpoint.zero()
        if mode is Mode.LANDING:
            return ControlSetpoint(0.0, 0.0, 0.0, LANDING_DESCENT_THROTTLE, speed)
        if mode is Mode.HOVERING:
            if self._takeoff_active:
                if self.drone.position[2] < self.config.takeoff_altitude:
                    return ControlSetpoint(0.0, 0.0, 0.0, TAKEOFF_CLIMB_THROTTLE, speed)
                self._takeoff_active = False
            return ControlSetpoint.hover(speed)
        # Orientation control; the safety rule guarantees pose is present.
        if pose is None:
            return ControlSetpoint.hover(speed)
        return make_setpoint(pose, self.state, self.config.fsm)

    def _advance_physics(self) -> None:
        until = step_for_tick(self.tick_index + 1, self.config.physics_hz,
                              self.config.input_hz)
        while self._step < until:
            self.drone = step_dynamics(self.drone, self.setpoint, self._dt)
            self._step += 1

    def finish_record(self) -> RunRecord:
        return self.tracker.record(
            self.samples,
            track_sha256=track_hash(self.config.track) if self.config.track else "",
            config=self.config.header())


# ---------------------------------------------------------------------------
# Frame sources.
# ---------------------------------------------------------------------------

class FrameSource(Protocol):
    def poll(self, tick: int, tick_time: float) -> IngestMessage | None:
        """Frame due for this tick, or None.  Raises IngestClosed when done."""


class ReplaySource:
    """Frames from a recorded log, released on the recorded timeline.

    A frame becomes due at the first tick whose time reaches its
    timestamp; if several are due at once only the newest survives, the
    same rule the live slot applies.  An exhausted log yields one final
    None (so the safety tick still happens) and then raises IngestClosed.
    An empty log raises immediately.
    """

    def __init__(self, frames: Iterator[IngestMessage] | str):
        if isinstance(frames, (str, bytes)) or hasattr(frames, "__fspath__"):
            frames = iter_replay(frames)
        self._frames = iter(frames)
        self._pending: IngestMessage | None = None
        self._drained = False
        self._closing = False
        self._produced = 0

    def poll(self, tick: int, tick_time: float) -> IngestMessage | None:
        due = None
        while True:
            if self._pending is None and not self._drained:
                try:
                    self._pending = next(self._frames)
                except StopIteration:
                    self._drained = True
            if self._pending is None:
                break
            if self._pending.time <= tick_time + 1e-9:
                due = self._pending
                self._pending = None
            else:
                break
        if due is not None:
            self._produced += 1
            return due
        if self._drained:
            if self._closing or self._produced == 0:
                raise IngestClosed("replay exhausted")
            self._closing = True
            return None
        return None

    @property
    def exhausted(self) -> bool:
        return self._drained and self._pending is None


class SyntheticOperatorSource:
    """Adapter: a SyntheticOperator observing a live pipeline."""

    def __init__(self, operator: SyntheticOperator, pipeline: SessionPipeline):
        self.operator = operator
        self.pipeline = pipeline
        self._closing = False

    def poll(self, tick: int, tick_time: float) -> IngestMessage | None:
        frame = self.operator.frame(tick, self.pipeline.drone, self.pipeline.state)
        if frame is None:
            if self._closing:
                raise IngestClosed("operator script complete")
            self._closing = True
        return frame


# ---------------------------------------------------------------------------
# Session loops.
# ---------------------------------------------------------------------------

def run_session(config: SessionConfig,
                source: FrameSource | Callable[[SessionPipeline], FrameSource]) -> RunRecord:
    """Free-running synchronous session (replay and synthetic sources).

    Ticks in pure simulation time until the race finishes, the operator
    lands and disarms, the source closes, or the configured time budget
    runs out.  When the config names a record path every consumed frame
    is appended there, ready to be replayed.
    """
    pipeline = SessionPipeline(config)
    if callable(source) and not hasattr(source, "poll"):
        source = source(pipeline)

    recorder = open(config.record_path, "w", encoding="ascii") \
        if config.record_path else None
    max_ticks = int(config.max_time * config.input_hz)
    frames_seen = 0
    try:
        for tick in range(max_ticks):
            tick_time = tick / config.input_hz
            try:
                frame = source.poll(tick, tick_time)
            except IngestClosed:
                log.info("ingest closed after %d frames", frames_seen)
                break
            if frame is not None:
                frames_seen += 1
                if recorder is not None:
                    recorder.write(encode_ingest(frame) + "\n")
            pipeline.tick(frame)
            if pipeline.finished:
                log.info("session finished at tick %d (%s)", tick,
                         "race complete" if pipeline.race_finished else "disarmed")
                break
        else:
            log.warning("session hit its %.0f s time budget", config.max_time)
    finally:
        if recorder is not None:
            recorder.close()
    return pipeline.finish_record()


def record_stream(source: FrameSource, path, *, input_hz: int = 30,
                  max_ticks: int = 1_000_000) -> int:
    """Drain a frame source into a replay log; returns the frame count."""
    count = 0
    with open(path, "w", encoding="ascii") as fh:
        for tick in range(max_ticks):
            try:
                frame = source.poll(tick, tick / input_hz)
            except IngestClosed:
                break
            if frame is not None:
                fh.write(encode_ingest(frame) + "\n")
                count += 1
    return count
