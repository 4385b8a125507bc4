import math

import pytest

from semalloc.assoc import associate
from semalloc.netmodel import (Assignment, BaseStation, InfeasibleError, Link, ScheduleDecision,
                               compute_energy, compute_time, link_rate, transmit_energy, transmit_time,
                               validate_assignment)
from semalloc.scenario import GenConfig, generate

from conftest import BASE_PARAMS


@pytest.mark.parametrize("c, f, expected", [(5e6, 1e9, 5e-3), (0, 1e9, 0.0), (1e7, 1e9, 1e-2)])
def test_compute_time(c, f, expected):
    assert compute_time(c, f) == pytest.approx(expected, rel=1e-15)


def test_compute_time_needs_a_clock():
    with pytest.raises(InfeasibleError):
        compute_time(1e6, 0.0)


@pytest.mark.parametrize("c, gamma, f, expected", [(1e6, 1e-27, 1e9, 1e-3), (0, 1e-27, 2e9, 0.0),
                                                   (2e6, 1e-27, 1e9, 2e-3)])
def test_compute_energy(c, gamma, f, expected):
    assert compute_energy(c, gamma, f) == pytest.approx(expected, rel=1e-12)


def test_link_rate():
    # choose h so that p*h/(sigma^2 + I) is exactly the target SNR
    noise = BASE_PARAMS.noise_power_w + 1e-13
    assert link_rate(1, BASE_PARAMS, 1.0, noise, 1e-13) == pytest.approx(2e5)
    assert link_rate(2, BASE_PARAMS, 3.0, noise, 1e-13) == pytest.approx(8e5)
    assert link_rate(0, BASE_PARAMS, 0.2, 1e-9, 1e-13) == 0.0


def test_transmit_time_and_energy():
    assert transmit_time(8e3, 8e5) == pytest.approx(1e-2)
    assert transmit_time(0, 0) == 0.0
    assert transmit_time(1e5, 2e7) == pytest.approx(5e-3)
    with pytest.raises(InfeasibleError):
        transmit_time(1.0, 0.0)
    assert transmit_energy(0.2, 1e-2) == pytest.approx(2e-3)
    assert transmit_energy(0, 5.0) == 0.0
    assert transmit_energy(0.1, 5e-3) == pytest.approx(5e-4)


def test_link_rejects_gain_out_of_range():
    with pytest.raises(ValueError):
        Link(1.5, 0.0, BASE_PARAMS)


def test_bs_rejects_fractional_rbs():
    with pytest.raises(ValueError):
        BaseStation(0, (0, 0), 2.5, 0.0)


@pytest.fixture(scope="module")
def small():
    return generate(GenConfig(num_bs=2, num_wd=4, seed=3))


def test_empty_assignment_is_valid(small):
    a = Assignment.empty(small.num_wd)
    assert validate_assignment(a, small) == []
    assert a.total_utility == 0


def test_rb_overbooking_is_flagged(small):
    k = small.base_stations[0].rb_count
    a = Assignment.from_parts([0, 0, None, None], [k, 1, 0, 0], [ScheduleDecision.idle()] * 4)
    bad = validate_assignment(a, small)
    assert [v.constraint for v in bad] == ["rb_budget"]
    assert bad[0].magnitude == 1


def test_solver_output_is_valid(default_scenario):
    assert validate_assignment(associate(default_scenario), default_scenario) == []


def test_budget_violations_are_reported(small):
    wd = small.devices[0]
    too_hot = ScheduleDecision(1e6, wd.max_freq_hz * 1.1, 0.1, 1e3, 0.5)
    slow = ScheduleDecision(wd.max_freq_hz * small.params.max_delay_s * 2, wd.max_freq_hz, 0.1, 1e3, 0.5)
    idle = [ScheduleDecision.idle()] * 3
    for sched, name in ((too_hot, "freq"), (slow, "delay")):
        a = Assignment.from_parts([0, None, None, None], [1, 0, 0, 0], [sched, *idle])
        assert name in {v.constraint for v in validate_assignment(a, small)}


def test_unassociated_wd_must_be_idle(small):
    a = Assignment.from_parts([None] * 4, [0] * 4, [ScheduleDecision(0, 0, 0, 10.0, 0.3)] + [ScheduleDecision.idle()] * 3)
    assert {v.constraint for v in validate_assignment(a, small)} == {"unassociated_utility"}


def test_tampered_total_is_flagged(small):
    a = Assignment.empty(small.num_wd)
    a.total_utility = 1.0
    assert [v.constraint for v in validate_assignment(a, small)] == ["total_utility"]


def test_bs_utility_sums_members(default_scenario):
    a = associate(default_scenario)
    per_bs = [a.bs_utility(m) for m in range(default_scenario.num_bs)]
    assert math.fsum(per_bs) == pytest.approx(a.total_utility, rel=1e-12)
