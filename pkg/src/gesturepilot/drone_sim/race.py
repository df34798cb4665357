"""Gate-crossing detection, in-order race scoring and run records.

Scoring consumes a sampled trajectory as a polyline.  A gate pass is a
segment that crosses the gate disc in the direction of its normal;
out-of-order passes are ignored, so flying through gate 2 first earns
nothing until gate 1 is behind you.  Metrics follow the flown-path
definition: path length accumulates along the polyline up to the final
crossing point (the last segment counts only up to the disc), and
average velocity is path length over completion time by construction.

Run records serialize as line-delimited JSON with a header carrying the
track fingerprint, which makes byte-level replay comparison meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError
from .track import Gate

RECORD_VERSION = 1


def check_gate_pass(p0, p1, gate: Gate) -> float | None:
    """Test one trajectory segment against one gate.

    Returns the crossing fraction t in [0, 1] (p0 + t*(p1-p0) lies on
    the gate plane) when the segment crosses the disc along the normal,
    else None.  The crossing condition is s0 < 0 <= s1 on the signed
    plane distances, so a sample sitting exactly on the plane is counted
    with the segment that reaches it, never twice.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    normal = gate.normal_array
    center = gate.center_array
    s0 = float(np.dot(p0 - center, normal))
    s1 = float(np.dot(p1 - center, normal))
    if not (s0 < 0.0 <= s1):
        return None
    t = s0 / (s0 - s1)
    hit = p0 + t * (p1 - p0)
    if float(np.linalg.norm(hit - center)) > gate.radius:
        return None
    return t


@dataclass(frozen=True)
class GatePass:
    gate_index: int
    time: float


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    position: tuple[float, float, float]
    attitude: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RaceMetrics:
    finished: bool
    completion_time: float
    path_length: float
    average_velocity: float


@dataclass(frozen=True)
class RunRecord:
    samples: tuple[TrajectorySample, ...]
    gate_events: tuple[GatePass, ...]
    metrics: RaceMetrics
    track_sha256: str = ""
    config: dict = field(default_factory=dict)


class RaceTracker:
    """Incremental scorer: feed samples as they happen.

    Tracks only the next expected gate, accumulates polyline length, and
    freezes both clocks at the final crossing.  ``feed`` returns the
    pass event when the pending gate was crossed (at most one per
    sample), which the live session forwards to telemetry.
    """

    def __init__(self, track: tuple[Gate, ...]):
        self.track = tuple(track)
        self.events: list[GatePass] = []
        self._next = 0                # index into track
        self._prev: TrajectorySample | None = None
        self._start_time: float | None = None
        self._length = 0.0
        self._finish: tuple[float, float] | None = None   # (time, length) at last gate

    @property
    def finished(self) -> bool:
        return self._next >= len(self.track)

    def feed(self, sample: TrajectorySample) -> GatePass | None:
        if self._start_time is None:
            self._start_time = sample.time
        prev = self._prev
        self._prev = sample
        if prev is None:
            if not self.track:
                self._finish = (sample.time, 0.0)
            return None
        p0 = np.array(prev.position)
        p1 = np.array(sample.position)
        seg = float(np.linalg.norm(p1 - p0))
        event = None
        if not self.finished:
            gate = self.track[self._next]
            t = check_gate_pass(p0, p1, gate)
            if t is not None:
                event_time = prev.time + t * (sample.time - prev.time)
                event = GatePass(gate_index=gate.index, time=event_time)
                self.events.append(event)
                self._next += 1
                if self.finished:
                    self._finish = (event_time, self._length + t * seg)
        if self._finish is None:
            self._length += seg
        return event

    def metrics(self) -> RaceMetrics:
        start = self._start_time if self._start_time is not None else 0.0
        if self._finish is not None:
            end_time, length = self._finish
            finished = True
        else:
            end_time = self._prev.time if self._prev is not None else start
            length = self._length
            finished = self.finished       # only true here for an empty track, pre-feed
        elapsed = end_time - start
        velocity = length / elapsed if elapsed > 0.0 else 0.0
        return RaceMetrics(finished=finished, completion_time=elapsed,
                           path_length=length, average_velocity=velocity)

    def record(self, samples, track_sha256: str = "", config: dict | None = None) -> RunRecord:
        return RunRecord(samples=tuple(samples), gate_events=tuple(self.events),
                         metrics=self.metrics(), track_sha256=track_sha256,
                         config=dict(config or {}))


def score_run(samples, track: tuple[Gate, ...],
              track_sha256: str = "", config: dict | None = None) -> RunRecord:
    """Score a complete trajectory in one call (batch twin of RaceTracker)."""
    samples = tuple(samples)
    if len(samples) < 2 and track:
        raise ValueError("trajectory needs at least 2 samples")
    tracker = RaceTracker(track)
    for sample in samples:
        tracker.feed(sample)
    return tracker.record(samples, track_sha256=track_sha256, config=config)


# ---------------------------------------------------------------------------
# Line-delimited record files.  One JSON object per line; keys sorted and
# separators fixed so identical runs serialize to identical bytes.
# ---------------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run_record_lines(record: RunRecord) -> list[str]:
    lines = [_dumps({"type": "header", "v": RECORD_VERSION,
                     "track_sha256": record.track_sha256,
                     "config": record.config})]
    for s in record.samples:
        lines.append(_dumps({"type": "sample", "t": float(s.time),
                             "p": [float(v) for v in s.position],
                             "q": [float(v) for v in s.attitude]}))
    for e in record.gate_events:
        lines.append(_dumps({"type": "gate", "index": e.gate_index, "t": float(e.time)}))
    m = record.metrics
    lines.append(_dumps({"type": "metrics", "finished": m.finished,
                         "completion_time": float(m.completion_time),
                         "path_length": float(m.path_length),
                         "average_velocity": float(m.average_velocity)}))
    return lines


def write_run_record(record: RunRecord, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for line in run_record_lines(record):
            fh.write(line + "\n")


def read_run_record(path) -> RunRecord:
    samples: list[TrajectorySample] = []
    events: list[GatePass] = []
    metrics: RaceMetrics | None = None
    track_sha256 = ""
    config: dict = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                kind = obj["type"]
                if kind == "header":
                    if obj["v"] != RECORD_VERSION:
                        raise ValueError(f"unsupported record version {obj['v']}")
                    track_sha256 = obj["track_sha256"]
                    config = obj["config"]
                elif kind == "sample":
                    samples.append(TrajectorySample(
                        time=float(obj["t"]),
                        position=tuple(float(v) for v in obj["p"]),
                        attitude=tuple(float(v) for v in obj["q"])))
                elif kind == "gate":
                    events.append(GatePass(gate_index=int(obj["index"]),
                                           time=float(obj["t"])))
                elif kind == "metrics":
                    metrics = RaceMetrics(finished=bool(obj["finished"]),
                                          completion_time=float(obj["completion_time"]),
                                          path_length=float(obj["path_length"]),
                                          average_velocity=float(obj["average_velocity"]))
                else:
                    raise ValueError(f"unknown record type {kind!r}")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad record line: {exc}") from None
    if metrics is None:
        raise FormatError(f"{path}: missing metrics line")
    return RunRecord(samples=tuple(samples), gate_events=tuple(events), metrics=metrics,
                     track_sha256=track_sha256, config=config)
