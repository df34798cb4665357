"""gesturepilot: fly a simulated drone race with one bare hand.

The pipeline runs landmarks -> 6-DoF hand pose -> gesture classifier ->
command machine -> flight dynamics, with record/replay determinism end
to end.  Subpackages:

    handpose     pose math: palm basis, quaternions, Euler, throttle
    gesture_net  procedural training data + from-scratch MLP classifier
    command_fsm  debounce, command table, safety rules, setpoints
    drone_sim    point-mass dynamics, gate scoring, scripted pilot
    session      tick loop, wire protocol, record/replay, live server
"""

from . import clock, command_fsm, drone_sim, errors, gesture_net, handpose, session
from .errors import GesturePilotError

__version__ = "0.1.0"

__all__ = [
    "clock",
    "command_fsm",
    "drone_sim",
    "errors",
    "gesture_net",
    "handpose",
    "session",
    "GesturePilotError",
    "__version__",
]
