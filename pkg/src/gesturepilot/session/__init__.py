"""Session orchestration: ingest, pipeline, record/replay, live server."""

from .messages import (
    WIRE_VERSION,
    IngestMessage,
    TelemetryMessage,
    decode_ingest,
    decode_telemetry,
    encode_ingest,
    encode_telemetry,
    iter_replay,
    load_replay,
)
from .slot import LatestSlot
from .synthesizer import LandmarkSynthesizer, SyntheticOperator
from .pipeline import (
    ReplaySource,
    SessionConfig,
    SessionPipeline,
    SyntheticOperatorSource,
    record_stream,
    run_session,
)
from .server import serve_session

__all__ = [
    "WIRE_VERSION",
    "IngestMessage",
    "TelemetryMessage",
    "decode_ingest",
    "decode_telemetry",
    "encode_ingest",
    "encode_telemetry",
    "iter_replay",
    "load_replay",
    "LatestSlot",
    "LandmarkSynthesizer",
    "SyntheticOperator",
    "ReplaySource",
    "SessionConfig",
    "SessionPipeline",
    "SyntheticOperatorSource",
    "record_stream",
    "run_session",
    "serve_session",
]
