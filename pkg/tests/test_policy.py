"""QoS controller internals: classifier, dispatch table, overshoot
adaptation, the variable step formula, and the energy probe loop."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snucaqos.actions import Hold, MigrateAwayFromCenter, MigrateTowardCenter, Observation, SetFrequency
from snucaqos.policy import (
    PolicyState,
    QosController,
    TargetRange,
    adjust_parameters,
    classify_state,
    energy_optimize,
    reset_probe,
    select_action,
    variable_step_hz,
)
from snucaqos.power import default_frequency_table

TABLE = default_frequency_table()
GRID = TABLE.grid_step_hz  # 0.1 GHz


def oracle_classify(hr: float, t: TargetRange) -> str:
    """Independent re-encoding of the five-region boundary rules,
    walked from the top down with reversed comparisons."""
    if hr > t.soft_max * (1 + t.proximity_fraction):
        return "E"
    if hr > t.soft_max:
        return "D"
    if hr >= t.soft_min:
        return "C"
    if hr >= t.soft_min * (1 - t.proximity_fraction):
        return "B"
    return "A"


def make_ps(hard_min=1000.0, hard_max=3000.0, **overrides):
    return PolicyState(target=TargetRange.from_hard(hard_min, hard_max), **overrides)


# ---------------------------------------------------------------- ranges


def test_target_range_validation():
    with pytest.raises(ValueError, match="hard_min"):
        TargetRange(0, 100, 10, 90)
    with pytest.raises(ValueError, match="hard_min"):
        TargetRange(100, 50, 100, 50)
    with pytest.raises(ValueError, match="inside the hard range"):
        TargetRange(100, 200, 90, 150)
    with pytest.raises(ValueError, match="inside the hard range"):
        TargetRange(100, 200, 150, 250)
    with pytest.raises(ValueError, match="inside the hard range"):
        TargetRange(100, 200, 150, 150)
    with pytest.raises(ValueError, match="proximity_fraction"):
        TargetRange(100, 200, 100, 200, proximity_fraction=1.0)


def test_target_range_from_hard_and_widths():
    t = TargetRange.from_hard(100, 300)
    assert (t.soft_min, t.soft_max) == (100, 300)
    assert t.hard_width == 200
    assert t.soft_width == 200


def test_policy_state_validation():
    with pytest.raises(ValueError, match="micro_step"):
        make_ps(macro_step_hz=0.1e9, micro_step_hz=0.2e9)
    with pytest.raises(ValueError, match="positive"):
        make_ps(macro_step_hz=0.0, micro_step_hz=0.0)
    with pytest.raises(ValueError, match="non-negative"):
        make_ps(min_count=-1)


# ------------------------------------------------------------ classifier


def test_classifier_boundary_values():
    t = TargetRange.from_hard(1000.0, 3000.0)  # proximity 0.10
    assert classify_state(899.999, t) == "A"
    assert classify_state(900.0, t) == "B"  # exactly soft_min * 0.9
    assert classify_state(999.999, t) == "B"
    assert classify_state(1000.0, t) == "C"  # soft_min itself is in range
    assert classify_state(3000.0, t) == "C"  # soft_max itself is in range
    assert classify_state(3000.001, t) == "D"
    assert classify_state(3300.0, t) == "D"  # exactly soft_max * 1.1
    assert classify_state(3300.001, t) == "E"


def test_classifier_matches_oracle_over_10000_points():
    rng = random.Random(42)
    for _ in range(10000):
        hard_min = rng.uniform(1, 1000)
        hard_max = hard_min * rng.uniform(1.01, 10)
        t = TargetRange.from_hard(hard_min, hard_max)
        # bias a third of the draws onto the exact boundaries
        roll = rng.random()
        if roll < 1 / 3:
            hr = rng.choice(
                [t.soft_min * 0.9, t.soft_min, t.soft_max, t.soft_max * 1.1]
            )
        else:
            hr = rng.uniform(hard_min * 0.5, hard_max * 1.5)
        assert classify_state(hr, t) == oracle_classify(hr, t)


@given(
    hard_min=st.floats(min_value=1, max_value=1e6),
    ratio=st.floats(min_value=1.001, max_value=100),
    hr=st.floats(min_value=1e-3, max_value=1e9),
)
def test_classifier_is_total(hard_min, ratio, hr):
    t = TargetRange.from_hard(hard_min, hard_min * ratio)
    assert classify_state(hr, t) in ("A", "B", "C", "D", "E")
    assert classify_state(hr, t) == oracle_classify(hr, t)


# ---------------------------------------------------------- action table

# The hierarchical dispatch, encoded as data: for each state the ordered
# (guard, action) pairs; the first available guard wins, else hold.
DISPATCH = {
    "A": (("freq_up", "macro_increase"), ("mig_in", "migrate_in")),
    "B": (("mig_in", "migrate_in"), ("freq_up", "micro_increase")),
    "C": (),
    "D": (("mig_out", "migrate_out"), ("freq_down", "micro_decrease")),
    "E": (("freq_down", "macro_decrease"), ("mig_out", "migrate_out")),
}


def oracle_select(state, freq_at_max, freq_at_min, can_migrate_in, can_migrate_out):
    if state == "C":
        return "energy"
    available = {
        "freq_up": not freq_at_max,
        "freq_down": not freq_at_min,
        "mig_in": can_migrate_in,
        "mig_out": can_migrate_out,
    }
    for guard, action in DISPATCH[state]:
        if available[guard]:
            return action
    return "hold"


def test_dispatch_matches_truth_table_all_80_cases():
    for state in "ABCDE":
        for bits in range(16):
            flags = dict(
                freq_at_max=bool(bits & 1),
                freq_at_min=bool(bits & 2),
                can_migrate_in=bool(bits & 4),
                can_migrate_out=bool(bits & 8),
            )
            assert select_action(state, **flags) == oracle_select(state, **flags), (
                state,
                flags,
            )


def test_dispatch_rejects_unknown_state():
    with pytest.raises(ValueError, match="unknown state"):
        select_action("F", freq_at_max=False, freq_at_min=False,
                      can_migrate_in=False, can_migrate_out=False)


# ------------------------------------------------------------ adaptation


def test_cross_jump_halves_steps_and_floors_at_grid():
    ps = make_ps()
    assert adjust_parameters("A", "D", ps, GRID) is False
    assert ps.macro_step_hz == 0.25e9
    assert ps.micro_step_hz == GRID  # half of 0.1 GHz floors at one step
    adjust_parameters("D", "A", ps, GRID)
    assert ps.macro_step_hz == 0.125e9
    adjust_parameters("E", "B", ps, GRID)
    assert ps.macro_step_hz == GRID  # 0.0625 GHz floors
    adjust_parameters("B", "E", ps, GRID)
    assert ps.macro_step_hz == GRID  # stays at the floor


def test_overshoot_counter_fires_on_sixth_event():
    ps = make_ps(1000, 2000)
    for i in range(5):
        assert adjust_parameters("C", "A", ps, GRID) is False
        assert ps.min_count == i + 1
        assert ps.target.soft_min == 1000
    # sixth C -> low event exceeds the limit of 5
    assert adjust_parameters("C", "B", ps, GRID) is True
    assert ps.target.soft_min == pytest.approx(1050)  # + 5% of hard width
    assert ps.min_count == 0  # reset after firing
    assert ps.target.soft_max == 2000  # other bound untouched


def test_overshoot_counter_high_side():
    ps = make_ps(1000, 2000)
    for _ in range(5):
        assert adjust_parameters("C", "E", ps, GRID) is False
    assert adjust_parameters("C", "D", ps, GRID) is True
    assert ps.target.soft_max == pytest.approx(1950)
    assert ps.max_count == 0
    assert ps.target.soft_min == 1000


def test_soft_range_floor_at_20_percent_of_hard_width():
    ps = make_ps(1000, 2000)
    for _ in range(30 * 6):  # far more triggers than can ever fire
        adjust_parameters("C", "A", ps, GRID)
        t = ps.target
        assert 1000 <= t.soft_min < t.soft_max <= 2000
        assert t.soft_width >= 0.2 * t.hard_width - 1e-9
    assert ps.target.soft_min == pytest.approx(1800)  # soft_max - floor
    # once at the floor, further triggers change nothing
    for _ in range(6):
        assert adjust_parameters("C", "A", ps, GRID) is False
    assert ps.target.soft_min == pytest.approx(1800)


def test_low_to_low_and_none_prev_are_neutral():
    ps = make_ps()
    assert adjust_parameters(None, "A", ps, GRID) is False
    assert adjust_parameters("B", "A", ps, GRID) is False
    assert adjust_parameters("D", "E", ps, GRID) is False
    assert adjust_parameters("C", "C", ps, GRID) is False
    assert adjust_parameters("A", "C", ps, GRID) is False
    assert (ps.min_count, ps.max_count) == (0, 0)
    assert ps.macro_step_hz == 0.5e9
    assert (ps.target.soft_min, ps.target.soft_max) == (1000, 3000)


def test_counter_sides_are_independent():
    ps = make_ps()
    adjust_parameters("C", "A", ps, GRID)
    adjust_parameters("C", "D", ps, GRID)
    assert (ps.min_count, ps.max_count) == (1, 1)


@given(
    st.lists(
        st.tuples(st.sampled_from("ABCDE"), st.sampled_from("ABCDE")),
        max_size=200,
    )
)
@settings(max_examples=60)
def test_adaptation_safety_under_any_sequence(transitions):
    ps = make_ps(500, 4000)
    initial_macro, initial_micro = ps.macro_step_hz, ps.micro_step_hz
    for prev, curr in transitions:
        before_macro, before_micro = ps.macro_step_hz, ps.micro_step_hz
        adjust_parameters(prev, curr, ps, GRID)
        t = ps.target
        assert 500 <= t.soft_min < t.soft_max <= 4000
        assert t.soft_width >= 0.2 * t.hard_width - 1e-9
        assert GRID <= ps.macro_step_hz <= before_macro <= initial_macro
        assert GRID <= ps.micro_step_hz <= before_micro <= initial_micro
        assert ps.micro_step_hz <= ps.macro_step_hz


# ---------------------------------------------------------- variable step


def test_variable_step_exact_midpoint_value():
    ps = make_ps(90, 110, macro_step_hz=0.5e9)
    assert variable_step_hz(ps, 100.0, "up") == 0.25e9
    assert variable_step_hz(ps, 95.0, "down") == 0.125e9


def test_variable_step_boundary_floors_to_one_grid_step():
    ps = make_ps(90, 110, macro_step_hz=0.5e9)
    raw = variable_step_hz(ps, 110.0, "up")
    assert raw == 0.0
    assert TABLE.snap_step_hz(raw) == GRID
    assert TABLE.apply_step(2.0e9, raw, up=True) == 2.0e9 + GRID


def test_variable_step_grows_away_from_boundary():
    ps = make_ps(1000, 3000)
    near = variable_step_hz(ps, 2900.0, "up")
    far = variable_step_hz(ps, 1100.0, "up")
    assert near < far
    with pytest.raises(ValueError, match="direction"):
        variable_step_hz(ps, 2000.0, "sideways")


# ------------------------------------------------------------ probe loop


def test_probe_phase1_records_baseline_and_steps_up():
    ps = make_ps()
    action, note, r_hr, r_p = energy_optimize(ps, 2000.0, 10.0, 2.5e9, TABLE)
    # variable step 0.5 GHz * 1000/2000 = 0.25 GHz, snapped up to 0.3 GHz
    assert action == SetFrequency(2.8e9)
    assert note == "probe_up"
    assert (r_hr, r_p) == (None, None)
    assert ps.probe.pending
    assert ps.probe.hr_prev == 2000.0
    assert ps.probe.power_prev == 10.0
    assert ps.probe.from_hz == 2.5e9


def test_probe_phase2_equal_ratios_latch_hold():
    ps = make_ps()
    energy_optimize(ps, 2000.0, 10.0, 2.5e9, TABLE)
    action, note, r_hr, r_p = energy_optimize(ps, 2040.0, 10.2, 2.8e9, TABLE)
    assert action == Hold("optimum")
    assert note == "optimum"
    assert r_hr == pytest.approx(1.02)
    assert r_p == pytest.approx(1.02)
    assert ps.energy_direction == "hold"
    # latched: every further call holds without touching the probe
    for _ in range(3):
        action, note, _, _ = energy_optimize(ps, 2100.0, 11.0, 2.8e9, TABLE)
        assert action == Hold("latched")
        assert note == "latched"


def test_probe_phase2_beneficial_reprobes_from_new_baseline():
    ps = make_ps()
    energy_optimize(ps, 2000.0, 10.0, 2.5e9, TABLE)
    action, note, r_hr, r_p = energy_optimize(ps, 2300.0, 10.5, 2.8e9, TABLE)
    assert note == "probe_up"
    assert r_hr == pytest.approx(1.15)
    assert r_p == pytest.approx(1.05)
    # new baseline is the probed point, next step from 2.8 GHz
    assert ps.probe.from_hz == 2.8e9
    assert ps.probe.hr_prev == 2300.0
    # variable step 0.5 * (3000-2300)/2000 = 0.175 GHz -> snapped 0.2 GHz
    assert action == SetFrequency(3.0e9)


def test_probe_phase2_harmful_undoes_and_undershoots():
    ps = make_ps()
    energy_optimize(ps, 2000.0, 10.0, 2.5e9, TABLE)
    action, note, r_hr, r_p = energy_optimize(ps, 2020.0, 11.0, 2.8e9, TABLE)
    assert note == "undo_undershoot"
    assert r_hr == pytest.approx(1.01)
    assert r_p == pytest.approx(1.10)
    # down step from the pre-probe 2.5 GHz: 0.5 * (2020-1000)/2000 =
    # 0.255 GHz, snapped 0.3 GHz -> 2.2 GHz
    assert action == SetFrequency(2.2e9)
    assert ps.energy_direction == "down"
    assert not ps.probe.pending


def test_probe_guard_blocks_step_beyond_soft_max():
    ps = make_ps()
    action, note, _, _ = energy_optimize(ps, 2950.0, 10.0, 2.5e9, TABLE)
    # one grid step to 2.6 GHz predicts 2950 * 2.6/2.5 = 3068 > 3000
    assert action == Hold("guard")
    assert note == "guard_hold"
    assert not ps.probe.pending
    assert ps.energy_direction == "up"  # not latched, probing may resume


def test_probe_guard_blocks_no_op_step_at_table_max():
    ps = make_ps()
    action, note, _, _ = energy_optimize(ps, 1500.0, 10.0, TABLE.max_hz, TABLE)
    assert action == Hold("guard")
    assert note == "guard_hold"


def test_probe_undo_guard_at_table_min():
    ps = make_ps()
    ps.probe.pending = True
    ps.probe.hr_prev = 2000.0
    ps.probe.power_prev = 10.0
    ps.probe.from_hz = TABLE.min_hz
    action, note, _, _ = energy_optimize(ps, 2020.0, 11.0, TABLE.min_hz, TABLE)
    assert action == Hold("guard")
    assert note == "guard_hold"
    assert ps.energy_direction == "down"


def test_probe_undo_guard_blocks_predicted_exit_below_soft_min():
    ps = make_ps()
    ps.probe.pending = True
    ps.probe.hr_prev = 2000.0
    ps.probe.power_prev = 10.0
    ps.probe.from_hz = 2.5e9
    # r_hr = 0.505 < r_p = 1.0; 1010 * 2.4/2.8 = 865.7 < soft_min 1000
    action, note, _, _ = energy_optimize(ps, 1010.0, 10.0, 2.8e9, TABLE)
    assert action == Hold("guard")
    assert note == "guard_hold"


def test_probe_division_guard_restarts_on_zero_baseline():
    ps = make_ps()
    ps.probe.pending = True
    ps.probe.hr_prev = 0.0
    ps.probe.power_prev = 10.0
    action, note, r_hr, r_p = energy_optimize(ps, 2000.0, 10.0, 2.5e9, TABLE)
    assert note == "probe_up"  # restarted cleanly instead of dividing
    assert (r_hr, r_p) == (None, None)
    assert ps.probe.hr_prev == 2000.0


def test_reset_probe_clears_pending_and_unlatches():
    ps = make_ps()
    ps.probe.pending = True
    ps.energy_direction = "hold"
    reset_probe(ps)
    assert not ps.probe.pending
    assert ps.energy_direction == "up"
    ps.energy_direction = "down"
    reset_probe(ps)
    assert ps.energy_direction == "down"  # only the latch is released


# ------------------------------------------------------------ controller


def make_obs(hr, freq_hz=2.5e9, **overrides):
    base = dict(
        app_id="a0", epoch=0, dt_s=1e-3, hr=hr, app_power_w=10.0,
        freq_hz=freq_hz, freq_at_max=freq_hz == TABLE.max_hz,
        freq_at_min=freq_hz == TABLE.min_hz,
        can_migrate_in=True, can_migrate_out=True,
    )
    base.update(overrides)
    return Observation(**base)


def test_controller_holds_without_measurement():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=None))
    assert decision.actions == [Hold("no_hr")]
    assert decision.note == "no_hr"
    assert decision.state == ""
    assert ctl.ps.prev_state is None  # insufficient data leaves history alone


def test_controller_state_a_macro_increase():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=500.0, can_migrate_in=True))
    assert decision.state == "A"
    assert decision.actions == [SetFrequency(3.0e9)]  # 2.5 + 0.5 GHz macro
    assert ctl.ps.prev_state == "A"


def test_controller_state_a_at_max_migrates_in():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=500.0, freq_hz=TABLE.max_hz))
    assert decision.actions == [MigrateTowardCenter()]
    assert decision.note == "migrate_in"


def test_controller_state_b_prefers_migration():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=950.0))
    assert decision.state == "B"
    assert decision.actions == [MigrateTowardCenter()]
    decision = ctl.decide(make_obs(hr=950.0, can_migrate_in=False))
    assert decision.actions == [SetFrequency(2.6e9)]  # micro step fallback


def test_controller_state_d_migrates_out():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=3100.0))
    assert decision.state == "D"
    assert decision.actions == [MigrateAwayFromCenter()]


def test_controller_state_e_macro_decrease():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=3500.0))
    assert decision.state == "E"
    assert decision.actions == [SetFrequency(2.0e9)]


def test_controller_audit_fields_reflect_current_knobs():
    ctl = QosController(make_ps(), TABLE)
    decision = ctl.decide(make_obs(hr=500.0))
    assert decision.macro_step_hz == 0.5e9
    assert decision.micro_step_hz == 0.1e9
    assert decision.soft_min == 1000
    assert decision.soft_max == 3000
    # a cross jump halves the steps, visible in the same epoch's audit
    decision = ctl.decide(make_obs(hr=3500.0))
    assert decision.macro_step_hz == 0.25e9


def test_controller_leaving_c_resets_probe():
    ctl = QosController(make_ps(), TABLE)
    first = ctl.decide(make_obs(hr=2000.0))
    assert first.note == "probe_up"
    assert ctl.ps.probe.pending
    ctl.decide(make_obs(hr=500.0))  # drops to A mid-probe
    assert not ctl.ps.probe.pending
    again = ctl.decide(make_obs(hr=2000.0))
    assert again.note == "probe_up"  # fresh phase 1, no stale ratios
    assert again.r_hr is None


def test_controller_steady_state_holds_forever_after_latch():
    ctl = QosController(make_ps(), TABLE)
    ctl.decide(make_obs(hr=2000.0, freq_hz=2.5e9))
    # HR and power moved by the same ratio: the probe found the knee
    latch = ctl.decide(make_obs(hr=2040.0, freq_hz=2.8e9, app_power_w=10.2))
    assert latch.note == "optimum"
    for _ in range(10):
        decision = ctl.decide(make_obs(hr=2040.0, freq_hz=2.8e9, app_power_w=10.2))
        assert decision.actions == [Hold("latched")]
