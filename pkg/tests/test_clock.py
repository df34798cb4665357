"""Integer scheduling of 30 Hz input ticks onto the 100 Hz physics grid."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gesturepilot.clock import step_for_tick, ticks_until


def test_first_ticks_follow_the_4_3_3_pattern():
    steps = [step_for_tick(k) for k in range(10)]
    assert steps == [0, 4, 7, 10, 14, 17, 20, 24, 27, 30]


def test_tick_lands_at_first_step_not_before_its_time():
    for tick in range(500):
        step = step_for_tick(tick)
        # Step times are step/100; tick times are tick/30.
        assert step * 30 >= tick * 100          # t_step >= t_tick
        assert (step - 1) * 30 < tick * 100     # the previous step was too early


def test_three_tick_window_is_exactly_ten_steps():
    # No drift: the pattern sums to the exact rate ratio every window.
    for k in range(0, 300, 3):
        assert step_for_tick(k + 3) - step_for_tick(k) == 10


def test_ticks_until_counts_applied_ticks():
    # Steps 0..3 have seen only tick 0; step 4 applies tick 1.
    assert [ticks_until(s) for s in range(8)] == [1, 1, 1, 1, 2, 2, 2, 3]


def test_ticks_until_inverts_step_for_tick():
    for tick in range(200):
        step = step_for_tick(tick)
        assert ticks_until(step) == tick + 1
        if step > 0:
            assert ticks_until(step - 1) == tick


def test_negative_arguments_rejected():
    with pytest.raises(ValueError):
        step_for_tick(-1)
    with pytest.raises(ValueError):
        ticks_until(-1)


@given(tick=st.integers(0, 10_000), physics=st.integers(1, 1000),
       inp=st.integers(1, 1000))
def test_schedule_is_monotone_for_any_rate_pair(tick, physics, inp):
    a = step_for_tick(tick, physics, inp)
    b = step_for_tick(tick + 1, physics, inp)
    assert b >= a
    assert a * inp >= tick * physics


def test_equal_rates_are_the_identity():
    for tick in range(50):
        assert step_for_tick(tick, 100, 100) == tick
