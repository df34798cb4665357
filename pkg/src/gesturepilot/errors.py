"""Exception types shared across the package.

Plain I/O failures (missing files, permissions) surface as the builtin
OSError; everything domain-specific derives from GesturePilotError so
callers can catch the whole family at the CLI boundary.
"""


class GesturePilotError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateHand(GesturePilotError):
    """Palm triangle landmarks are collinear or coincident."""


class NonUnitQuaternion(GesturePilotError):
    """Quaternion norm deviates too far from 1 to treat as a rotation."""


class BadCalibration(GesturePilotError):
    """Depth calibration is inconsistent (d_near >= d_far)."""


class DegenerateSample(GesturePilotError):
    """All landmarks of a feature vector coincide; cannot normalize."""


class EmptyDataset(GesturePilotError):
    """Training or evaluation was asked to run on zero samples."""


class DivergedTraining(GesturePilotError):
    """Loss became non-finite during training."""


class FormatError(GesturePilotError):
    """A model or dataset file is malformed (bad magic, sizes, checksum)."""


class WrongMode(GesturePilotError):
    """An operation was invoked in a pilot mode that does not allow it."""


class NotArmed(GesturePilotError):
    """The simulator was stepped with an active setpoint while disarmed."""


class IngestClosed(GesturePilotError):
    """The landmark stream ended; the session should shut down cleanly."""


class ReplayFormatError(GesturePilotError):
    """A replay log line could not be parsed.

    Carries the 1-based line number in ``line_number``.
    """

    def __init__(self, line_number, reason):
        super().__init__(f"replay line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class ModelLoadError(GesturePilotError):
    """The session could not load its gesture model."""


class TrackLoadError(GesturePilotError):
    """A track file could not be parsed."""
