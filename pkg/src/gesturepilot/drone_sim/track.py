"""Race-track description: ordered disc gates plus file I/O.

A gate is a disc the drone must cross along its normal.  Tracks are
plain text, one gate per line (index, center xyz, normal xyz, radius),
so a course can be edited by hand.  ``track_hash`` fingerprints the
canonical serialization; run records carry it so a replay can prove it
was scored against the same course.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrackLoadError

DEFAULT_GATE_RADIUS = 0.75   # m
_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Gate:
    index: int
    center: tuple[float, float, float]
    normal: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("gate index must be >= 1")
        if self.radius <= 0.0:
            raise ValueError("gate radius must be positive")
        norm = math.sqrt(sum(n * n for n in self.normal))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"gate normal must be unit length, got |n| = {norm}")

    @property
    def center_array(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def normal_array(self) -> np.ndarray:
        return np.array(self.normal)


def default_track(num_gates: int = 10, circuit_radius: float = 8.0,
                  gate_radius: float = DEFAULT_GATE_RADIUS) -> tuple[Gate, ...]:
    """Closed circular circuit flown counter-clockwise.

    Gates sit every 360/num_gates degrees on a circle, normals along the
    direction of travel (the tangent), altitude undulating between about
    1.2 and 2.4 m so the vertical channel gets exercised too.  The whole
    course fits a 20 x 20 x 4 m volume at the default radius.
    """
    gates = []
    for k in range(num_gates):
        theta = 2.0 * math.pi * k / num_gates
        altitude = 1.8 + 0.6 * math.sin(2.0 * theta)
        center = (circuit_radius * math.cos(theta),
                  circuit_radius * math.sin(theta),
                  altitude)
        normal = (-math.sin(theta), math.cos(theta), 0.0)
        gates.append(Gate(index=k + 1, center=center, normal=normal, radius=gate_radius))
    return tuple(gates)


def format_track(track: tuple[Gate, ...]) -> str:
    lines = ["# index cx cy cz nx ny nz radius"]
    for gate in track:
        fields = [str(gate.index)]
        fields += [repr(float(v)) for v in gate.center]
        fields += [repr(float(v)) for v in gate.normal]
        fields.append(repr(float(gate.radius)))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_track(text: str, source: str = "<string>") -> tuple[Gate, ...]:
    """Parse the one-gate-per-line format.

    Normals are renormalized after parsing so hand-written files do not
    need ten digits of precision.  Gates must appear as indices 1..N in
    order; anything else raises TrackLoadError naming the line.
    """
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 8:
            raise TrackLoadError(f"{source}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            index = int(parts[0])
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise TrackLoadError(f"{source}:{lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in values):
            raise TrackLoadError(f"{source}:{lineno}: non-finite field")
        normal = np.array(values[3:6])
        norm = float(np.linalg.norm(normal))
        if norm < 1e-12:
            raise TrackLoadError(f"{source}:{lineno}: zero-length normal")
        if abs(norm - 1.0) > _UNIT_TOL:  # renormalize hand-written normals only
            normal = normal / norm
        try:
            gate = Gate(index=index,
                        center=(values[0], values[1], values[2]),
                        normal=(float(normal[0]), float(normal[1]), float(normal[2])),
                        radius=values[6])
        except ValueError as exc:
            raise TrackLoadError(f"{source}:{lineno}: {exc}") from None
        if gate.index != len(gates) + 1:
            raise TrackLoadError(f"{source}:{lineno}: expected gate index {len(gates) + 1}, "
                                 f"got {gate.index}")
        gates.append(gate)
    return tuple(gates)


def load_track(path) -> tuple[Gate, ...]:
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise TrackLoadError(f"cannot read track file {path}: {exc}") from exc
    return parse_track(text, source=str(path))


def save_track(track: tuple[Gate, ...], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_track(track))


def track_hash(track: tuple[Gate, ...]) -> str:
    """SHA-256 hex digest of the canonical track serialization."""
    return hashlib.sha256(format_track(track).encode("ascii")).hexdigest()
