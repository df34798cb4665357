"""Point-mass quadrotor simulator, race track scoring and a scripted pilot."""

from .dynamics import (
    CLIMB_GAIN,
    CLIMB_RATE_LIMIT,
    DRAG_COEFF,
    GRAVITY,
    PHYSICS_DT,
    THROTTLE_TO_CLIMB,
    DroneState,
    arm,
    disarm,
    step_dynamics,
)
from .track import (
    DEFAULT_GATE_RADIUS,
    Gate,
    default_track,
    format_track,
    load_track,
    parse_track,
    save_track,
    track_hash,
)
from .race import (
    GatePass,
    RaceMetrics,
    RaceTracker,
    RunRecord,
    TrajectorySample,
    check_gate_pass,
    read_run_record,
    run_record_lines,
    score_run,
    write_run_record,
)
from .pilot import ScriptedPilot, fly_track, start_position_for

__all__ = [
    "CLIMB_GAIN",
    "CLIMB_RATE_LIMIT",
    "DRAG_COEFF",
    "GRAVITY",
    "PHYSICS_DT",
    "THROTTLE_TO_CLIMB",
    "DroneState",
    "arm",
    "disarm",
    "step_dynamics",
    "DEFAULT_GATE_RADIUS",
    "Gate",
    "default_track",
    "format_track",
    "load_track",
    "parse_track",
    "save_track",
    "track_hash",
    "GatePass",
    "RaceMetrics",
    "RaceTracker",
    "RunRecord",
    "TrajectorySample",
    "check_gate_pass",
    "read_run_record",
    "run_record_lines",
    "score_run",
    "write_run_record",
    "ScriptedPilot",
    "fly_track",
    "start_position_for",
]
