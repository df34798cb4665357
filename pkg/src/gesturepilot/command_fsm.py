"""Gesture debouncing, high-level commands and setpoint assembly.

The pilot loop feeds every classifier prediction through ``debounce``;
a gesture only counts once it has held for K consecutive confident
frames.  ``step_fsm`` reacts to *changes* of the stable gesture using a
configurable command table, with one hard-wired safety rule: leaving the
orientation gesture ("five") while the drone is under orientation
control always emits Hover before anything else, and so does losing hand
tracking.  Out-of-mode gestures are ignored and logged, never an error;
the loop stays total.

State is a frozen value; every step returns the successor, which keeps
replays and the model-checking tests deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import WrongMode
from .gesture_net import GestureLabel
from .handpose import HandPose

log = logging.getLogger(__name__)

SPEED_COEFFICIENTS = (0.5, 1.0, 1.5)
MAX_RULE_SEQUENCE = 3


class Mode(Enum):
    DISARMED = "disarmed"
    ARMED = "armed"
    HOVERING = "hovering"
    ORIENTATION_CONTROL = "orientation_control"
    LANDING = "landing"


class CommandKind(Enum):
    ARM = "arm"
    DISARM = "disarm"
    TAKEOFF = "takeoff"
    LAND = "land"
    SET_SPEED = "set_speed"
    ENTER_ORIENTATION_CONTROL = "enter_orientation_control"
    HOVER = "hover"


@dataclass(frozen=True)
class PilotCommand:
    kind: CommandKind
    coefficient: float | None = None

    def __post_init__(self):
        if self.kind is CommandKind.SET_SPEED:
            if self.coefficient not in SPEED_COEFFICIENTS:
                raise ValueError(f"speed coefficient must be one of {SPEED_COEFFICIENTS}")
        elif self.coefficient is not None:
            raise ValueError(f"{self.kind.value} takes no coefficient")


HOVER = PilotCommand(CommandKind.HOVER)


@dataclass(frozen=True)
class ControlSetpoint:
    """Per-tick command handed to the simulator."""

    roll: float = 0.0
    pitch: float = 0.0
    yaw_rate: float = 0.0
    throttle: float = 0.5
    speed_coefficient: float = 1.0

    @classmethod
    def hover(cls, speed_coefficient: float = 1.0) -> "ControlSetpoint":
        return cls(0.0, 0.0, 0.0, 0.5, speed_coefficient)

    @classmethod
    def zero(cls) -> "ControlSetpoint":
        """Idle setpoint: attitude level, throttle fully off."""
        return cls(0.0, 0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class PilotState:
    mode: Mode = Mode.DISARMED
    speed_coefficient: float = 1.0
    stable_gesture: GestureLabel | None = None      # debounce latch
    candidate_gesture: GestureLabel | None = None   # debounce streak in progress
    stability_counter: int = 0
    last_stable: GestureLabel | None = None         # what step_fsm last acted on
    recent_gestures: tuple[GestureLabel, ...] = ()  # history for sequence rules


@dataclass(frozen=True)
class CommandRule:
    mode: Mode
    gestures: tuple[GestureLabel, ...]  # matched against the tail of recent stable gestures
    command: PilotCommand

    def __post_init__(self):
        if not 1 <= len(self.gestures) <= MAX_RULE_SEQUENCE:
            raise ValueError(f"rule sequences must have 1..{MAX_RULE_SEQUENCE} gestures")


def default_command_table() -> tuple[CommandRule, ...]:
    """The stock single-gesture table.

    thumbs-up arms (and disarms: it is the kill path from every flying
    mode), rock takes off, okay lands, one/two/three pick the speed
    coefficient, five enters orientation control, four hovers.
    Orientation-control rows are absent on purpose: any gesture change in
    that mode first falls back to Hovering (safety rule in step_fsm) and
    is then looked up against the Hovering rows.
    """
    g = GestureLabel
    rules = [
        CommandRule(Mode.DISARMED, (g.THUMBS_UP,), PilotCommand(CommandKind.ARM)),
        CommandRule(Mode.ARMED, (g.THUMBS_UP,), PilotCommand(CommandKind.DISARM)),
        CommandRule(Mode.ARMED, (g.ROCK,), PilotCommand(CommandKind.TAKEOFF)),
        CommandRule(Mode.ARMED, (g.FIVE,), PilotCommand(CommandKind.ENTER_ORIENTATION_CONTROL)),
        CommandRule(Mode.HOVERING, (g.THUMBS_UP,), PilotCommand(CommandKind.DISARM)),
        CommandRule(Mode.HOVERING, (g.OKAY,), PilotCommand(CommandKind.LAND)),
        CommandRule(Mode.HOVERING, (g.FIVE,), PilotCommand(CommandKind.ENTER_ORIENTATION_CONTROL)),
        CommandRule(Mode.HOVERING, (g.FOUR,), HOVER),
        CommandRule(Mode.LANDING, (g.THUMBS_UP,), PilotCommand(CommandKind.DISARM)),
    ]
    for mode in (Mode.ARMED, Mode.HOVERING):
        for gesture, coeff in ((g.ONE, 0.5), (g.TWO, 1.0), (g.THREE, 1.5)):
            rules.append(CommandRule(mode, (gesture,),
                                     PilotCommand(CommandKind.SET_SPEED, coeff)))
    return tuple(rules)


@dataclass(frozen=True)
class FsmConfig:
    stability_frames: int = 8       # consecutive confident frames to accept a gesture
    min_confidence: float = 0.8
    max_lean: float = 0.6           # rad, roll/pitch clamp
    max_yaw_rate: float = 1.5       # rad/s
    angle_deadband: float = 0.05    # rad, neutral-hand snap to zero
    attitude_gain: float = 1.0
    yaw_gain: float = 1.0
    rules: tuple[CommandRule, ...] = field(default_factory=default_command_table)


# ---------------------------------------------------------------------------
# Debounce.
# ---------------------------------------------------------------------------

def debounce(prediction: GestureLabel, confidence: float, state: PilotState,
             config: FsmConfig = FsmConfig()) -> tuple[PilotState, GestureLabel | None]:
    """Advance the stability counter with one classifier frame.

    Returns the successor state and the stable gesture (None until any
    gesture has held for K confident frames).  A low-confidence frame or
    a different prediction resets the candidate streak; an established
    stable gesture stays latched until another one earns stability, so a
    single noisy frame cannot toggle flight modes.
    """
    if confidence < config.min_confidence or prediction == state.stable_gesture:
        new = replace(state, candidate_gesture=None, stability_counter=0)
        return new, new.stable_gesture
    if prediction == state.candidate_gesture:
        count = state.stability_counter + 1
    else:
        count = 1
    if count >= config.stability_frames:
        new = replace(state, stable_gesture=prediction,
                      candidate_gesture=None, stability_counter=0)
    else:
        new = replace(state, candidate_gesture=prediction, stability_counter=count)
    return new, new.stable_gesture


# ---------------------------------------------------------------------------
# Transitions.
# ---------------------------------------------------------------------------

_MODE_AFTER_COMMAND = {
    CommandKind.ARM: Mode.ARMED,
    CommandKind.DISARM: Mode.DISARMED,
    CommandKind.TAKEOFF: Mode.HOVERING,
    CommandKind.LAND: Mode.LANDING,
    CommandKind.ENTER_ORIENTATION_CONTROL: Mode.ORIENTATION_CONTROL,
    CommandKind.HOVER: Mode.HOVERING,
}


def _match_rule(rules, mode: Mode, recent: tuple[GestureLabel, ...]) -> CommandRule | None:
    best = None
    for rule in rules:
        if rule.mode is not mode:
            continue
        if len(rule.gestures) > len(recent):
            continue
        if tuple(recent[-len(rule.gestures):]) == rule.gestures:
            if best is None or len(rule.gestures) > len(best.gestures):
                best = rule
    return best


def _apply_command(state: PilotState, command: PilotCommand) -> PilotState:
    if command.kind is CommandKind.SET_SPEED:
        return replace(state, speed_coefficient=command.coefficient)
    return replace(state, mode=_MODE_AFTER_COMMAND[command.kind])


def step_fsm(state: PilotState, stable_gesture: GestureLabel | None,
             pose: HandPose | None,
             config: FsmConfig = FsmConfig()) -> tuple[PilotState, list[PilotCommand]]:
    """One tick of the command machine.

    Emits a (possibly empty) command list.  Safety rules, applied before
    any table lookup while in orientation control:

    * pose None (tracking lost) -> Hover, and the stable gesture is
      cleared so flight resumes only after "five" re-stabilizes;
    * stable gesture moves off "five" -> Hover first, then the new
      gesture is looked up in the Hovering rows (so e.g. "two" yields
      [Hover, SetSpeed(1.0)]).

    Gestures with no matching rule in the current mode are logged and
    ignored; nothing here raises.
    """
    commands: list[PilotCommand] = []
    st = state

    if st.mode is Mode.ORIENTATION_CONTROL and pose is None:
        commands.append(HOVER)
        st = replace(st, mode=Mode.HOVERING, stable_gesture=None,
                     candidate_gesture=None, stability_counter=0,
                     last_stable=None)
        return st, commands

    changed = stable_gesture != st.last_stable
    if changed:
        hover_first = (st.mode is Mode.ORIENTATION_CONTROL
                       and stable_gesture is not GestureLabel.FIVE)
        if hover_first:
            commands.append(HOVER)
            st = replace(st, mode=Mode.HOVERING)
        if stable_gesture is not None:
            recent = (st.recent_gestures + (stable_gesture,))[-MAX_RULE_SEQUENCE:]
            st = replace(st, recent_gestures=recent)
            rule = _match_rule(config.rules, st.mode, recent)
            if rule is not None:
                if not (hover_first and rule.command.kind is CommandKind.HOVER):
                    commands.append(rule.command)
                    st = _apply_command(st, rule.command)
            else:
                log.debug("gesture %s ignored in mode %s", stable_gesture.key, st.mode.value)
    st = replace(st, stable_gesture=stable_gesture, last_stable=stable_gesture)
    return st, commands


def landed(state: PilotState) -> PilotState:
    """Touchdown notification from the simulator: Landing -> Armed."""
    if state.mode is Mode.LANDING:
        return replace(state, mode=Mode.ARMED)
    return state


def make_setpoint(pose: HandPose, state: PilotState,
                  config: FsmConfig = FsmConfig()) -> ControlSetpoint:
    """Map a hand pose to an attitude/throttle setpoint.

    Only legal in orientation control (WrongMode otherwise).  Angles
    inside the deadband snap to zero so a neutral hand commands the exact
    hover setpoint; outside it they scale with the gain and the selected
    speed coefficient and clamp at the lean/yaw-rate limits.
    """
    if state.mode is not Mode.ORIENTATION_CONTROL:
        raise WrongMode(f"setpoints require orientation control, mode is {state.mode.value}")

    def shaped(angle: float, gain: float, limit: float) -> float:
        if abs(angle) <= config.angle_deadband:
            return 0.0
        value = gain * state.speed_coefficient * angle
        return min(max(value, -limit), limit)

    return ControlSetpoint(
        roll=shaped(pose.roll, config.attitude_gain, config.max_lean),
        pitch=shaped(pose.pitch, config.attitude_gain, config.max_lean),
        yaw_rate=shaped(pose.yaw, config.yaw_gain, config.max_yaw_rate),
        throttle=pose.throttle,
        speed_coefficient=state.speed_coefficient,
    )


# ---------------------------------------------------------------------------
# Command-table files: one rule per line, "mode gesture[+gesture...] command
# [coefficient]", '#' starts a comment.
# ---------------------------------------------------------------------------

def parse_command_table(text: str) -> tuple[CommandRule, ...]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'mode gestures command [coefficient]'")
        try:
            mode = Mode(parts[0].lower())
            gestures = tuple(GestureLabel.from_key(g) for g in parts[1].split("+"))
            kind = CommandKind(parts[2].lower())
            coeff = float(parts[3]) if len(parts) == 4 else None
            rules.append(CommandRule(mode, gestures, PilotCommand(kind, coeff)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return tuple(rules)


def format_command_table(rules: tuple[CommandRule, ...]) -> str:
    lines = ["# mode gesture[+gesture...] command [coefficient]"]
    for rule in rules:
        gestures = "+".join(g.key for g in rule.gestures)
        line = f"{rule.mode.value} {gestures} {rule.command.kind.value}"
        if rule.command.coefficient is not None:
            line += f" {rule.command.coefficient}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def load_command_table(path) -> tuple[CommandRule, ...]:
    with open(path, "r", encoding="ascii") as fh:
        return parse_command_table(fh.read())


def save_command_table(rules: tuple[CommandRule, ...], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_command_table(rules))
