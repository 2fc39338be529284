import pytest

from v2i_advisory.signal_plan import PhasePlan, SignalPlan, controller_state, plan_from_dict, plan_to_dict
from v2i_advisory.spat_codec import Color


def uniform_plan(offset=0, green=300, yellow=40, cycle=900):
    return SignalPlan(cycle, {i: PhasePlan(offset, green, yellow) for i in range(1, 9)})


def test_controller_at_cycle_start():
    snap = controller_state(uniform_plan(), 0)
    ps = snap.phase(1)
    assert ps.color is Color.GREEN
    assert ps.remaining_ds == 300
    assert ps.next1_ds == 40  # yellow
    assert ps.next2_ds == 560  # red


def test_controller_modular_wraparound():
    snap = controller_state(uniform_plan(), 2990)
    ps = snap.phase(1)
    assert ps.color is Color.GREEN
    assert ps.remaining_ds == 10


def test_controller_yellow_and_red_windows():
    plan = uniform_plan()
    assert controller_state(plan, 300).phase(1).color is Color.YELLOW
    assert controller_state(plan, 300).phase(1).remaining_ds == 40
    assert controller_state(plan, 339).phase(1).remaining_ds == 1
    assert controller_state(plan, 340).phase(1).color is Color.RED
    assert controller_state(plan, 899).phase(1).remaining_ds == 1


def test_controller_offset_shifts_cycle():
    plan = SignalPlan(900, {i: PhasePlan(130, 300, 40) for i in range(1, 9)})
    assert controller_state(plan, 0).phase(1).color is Color.RED
    assert controller_state(plan, 130).phase(1).color is Color.GREEN
    assert controller_state(plan, 130).phase(1).remaining_ds == 300


def test_controller_full_cycle_sweep():
    plan = uniform_plan()
    prev = None
    for t in range(0, 1801):
        ps = controller_state(plan, t).phase(1)
        assert ps.remaining_ds >= 1
        # next1/next2 are always the full durations of the next two colors
        expected = {
            Color.GREEN: (40, 560),
            Color.YELLOW: (560, 300),
            Color.RED: (300, 40),
        }[ps.color]
        assert (ps.next1_ds, ps.next2_ds) == expected
        if prev is not None:
            if ps.color is prev.color:
                assert ps.remaining_ds == prev.remaining_ds - 1
            else:
                assert ps.color is prev.color.next
                assert prev.remaining_ds == 1
        prev = ps


def test_controller_carries_ids():
    snap = controller_state(uniform_plan(), 17, intersection_id=42, seq=17)
    assert snap.intersection_id == 42
    assert snap.seq == 17
    assert snap.controller_time_ds == 17


def test_plan_validation():
    assert uniform_plan().validate() == []
    assert any("red time" in issue for issue in uniform_plan(green=860).validate())
    assert any("offset" in issue for issue in uniform_plan(offset=900).validate())
    bad_cycle = SignalPlan(0, {i: PhasePlan(0, 1, 1) for i in range(1, 9)})
    assert any("cycle" in issue for issue in bad_cycle.validate())
    missing = SignalPlan(900, {i: PhasePlan(0, 300, 40) for i in range(1, 8)})
    assert any("cover" in issue for issue in missing.validate())


def test_plan_dict_round_trip():
    plan = uniform_plan()
    assert plan_from_dict(plan_to_dict(plan)) == plan
