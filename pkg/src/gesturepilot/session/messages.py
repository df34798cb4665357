"""Wire and replay-file schemas for the landmark/telemetry protocol.

Both directions speak line-oriented JSON with an explicit ``"v": 1``.
Encoding is canonical (sorted keys, no whitespace): the replay file is
just the ingest stream written line by line, and canonical bytes are
what make replay comparisons and record/replay equivalence exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..drone_sim import GatePass
from ..errors import FormatError, ReplayFormatError
from ..handpose import LANDMARK_COUNT

WIRE_VERSION = 1
_HANDEDNESS = ("left", "right")


@dataclass(frozen=True)
class IngestMessage:
    """One camera frame's worth of hand landmarks."""

    time: float
    handedness: str
    landmarks: np.ndarray            # (21, 3) float64
    frame_id: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.landmarks, dtype=np.float64)
        if arr.shape != (LANDMARK_COUNT, 3):
            raise ValueError(f"landmarks must have shape ({LANDMARK_COUNT}, 3)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("landmarks must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "landmarks", arr)
        if self.handedness not in _HANDEDNESS:
            raise ValueError(f"handedness must be one of {_HANDEDNESS}")
        if not math.isfinite(self.time):
            raise ValueError("time must be finite")


@dataclass(frozen=True)
class TelemetryMessage:
    """Per-tick session snapshot published to clients."""

    time: float
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    attitude: tuple[float, float, float, float]
    armed: bool
    mode: str
    stable_gesture: str | None
    last_gesture: str | None
    confidence: float
    roll: float
    pitch: float
    yaw_rate: float
    throttle: float
    speed_coefficient: float
    gates_passed: int
    gates_total: int
    new_events: tuple[GatePass, ...] = ()
    race_finished: bool = False


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode_ingest(message: IngestMessage) -> str:
    body = {
        "v": WIRE_VERSION,
        "t": float(message.time),
        "hand": message.handedness,
        "landmarks": [[float(v) for v in row] for row in message.landmarks],
    }
    if message.frame_id is not None:
        body["frame"] = int(message.frame_id)
    return _dumps(body)


def decode_ingest(text: str) -> IngestMessage:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad ingest JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise FormatError("ingest message must be a JSON object")
    version = obj.get("v")
    if version != WIRE_VERSION:
        raise FormatError(f"unsupported ingest version {version!r}")
    try:
        message = IngestMessage(
            time=float(obj["t"]),
            handedness=obj["hand"],
            landmarks=np.array(obj["landmarks"], dtype=np.float64),
            frame_id=int(obj["frame"]) if "frame" in obj else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad ingest message: {exc}") from None
    return message


def encode_telemetry(message: TelemetryMessage) -> str:
    return _dumps({
        "v": WIRE_VERSION,
        "t": float(message.time),
        "drone": {
            "p": [float(v) for v in message.position],
            "vel": [float(v) for v in message.velocity],
            "q": [float(v) for v in message.attitude],
            "armed": bool(message.armed),
        },
        "mode": message.mode,
        "gesture": {
            "stable": message.stable_gesture,
            "last": message.last_gesture,
            "confidence": float(message.confidence),
        },
        "setpoint": {
            "roll": float(message.roll),
            "pitch": float(message.pitch),
            "yaw_rate": float(message.yaw_rate),
            "throttle": float(message.throttle),
            "speed": float(message.speed_coefficient),
        },
        "gates": {
            "passed": int(message.gates_passed),
            "total": int(message.gates_total),
            "events": [{"index": e.gate_index, "t": float(e.time)}
                       for e in message.new_events],
        },
        "finished": bool(message.race_finished),
    })


def decode_telemetry(text: str) -> TelemetryMessage:
    try:
        obj = json.loads(text)
        if obj.get("v") != WIRE_VERSION:
            raise ValueError(f"unsupported telemetry version {obj.get('v')!r}")
        drone = obj["drone"]
        gesture = obj["gesture"]
        setpoint = obj["setpoint"]
        gates = obj["gates"]
        return TelemetryMessage(
            time=float(obj["t"]),
            position=tuple(float(v) for v in drone["p"]),
            velocity=tuple(float(v) for v in drone["vel"]),
            attitude=tuple(float(v) for v in drone["q"]),
            armed=bool(drone["armed"]),
            mode=obj["mode"],
            stable_gesture=gesture["stable"],
            last_gesture=gesture["last"],
            confidence=float(gesture["confidence"]),
            roll=float(setpoint["roll"]),
            pitch=float(setpoint["pitch"]),
            yaw_rate=float(setpoint["yaw_rate"]),
            throttle=float(setpoint["throttle"]),
            speed_coefficient=float(setpoint["speed"]),
            gates_passed=int(gates["passed"]),
            gates_total=int(gates["total"]),
            new_events=tuple(GatePass(gate_index=int(e["index"]), time=float(e["t"]))
                             for e in gates["events"]),
            race_finished=bool(obj["finished"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad telemetry message: {exc}") from None


# ---------------------------------------------------------------------------
# Replay files: one encoded IngestMessage per line.
# ---------------------------------------------------------------------------

def iter_replay(path):
    """Yield IngestMessages from a replay log.

    Raises ReplayFormatError naming the 1-based line number on the first
    corrupt line; blank lines are allowed and skipped.
    """
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield decode_ingest(line)
            except FormatError as exc:
                raise ReplayFormatError(lineno, str(exc)) from None


def load_replay(path) -> list[IngestMessage]:
    return list(iter_replay(path))
