"""Integer tick scheduling between the physics and input rates.

100 Hz physics against 30 Hz input means ticks land every 10/3 physics
steps; scheduling on integers (steps 0, 4, 7, 10, 14, ...) keeps the
pattern exact and reproducible instead of accumulating float drift.
Tick k is applied at the first physics step whose time is >= k / input_hz.
"""

from __future__ import annotations

DEFAULT_PHYSICS_HZ = 100
DEFAULT_INPUT_HZ = 30


def step_for_tick(tick: int, physics_hz: int = DEFAULT_PHYSICS_HZ,
                  input_hz: int = DEFAULT_INPUT_HZ) -> int:
    """Physics step index at which input tick ``tick`` takes effect."""
    if tick < 0:
        raise ValueError("tick must be >= 0")
    return -(-tick * physics_hz // input_hz)


def ticks_until(step: int, physics_hz: int = DEFAULT_PHYSICS_HZ,
                input_hz: int = DEFAULT_INPUT_HZ) -> int:
    """Number of whole input ticks scheduled at or before ``step``."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return step * input_hz // physics_hz + 1
