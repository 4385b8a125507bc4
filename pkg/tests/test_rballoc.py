import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semalloc.rballoc import dp_alloc, dp_tables, greedy_alloc, marginal_gain, total_of
from semalloc.wdsched import UtilityTable


def brute_force(tables, k):
    best = -math.inf
    for zs in itertools.product(range(k + 1), repeat=len(tables)):
        if sum(zs) <= k:
            best = max(best, math.fsum(t[z] for t, z in zip(tables, zs)))
    return best


def concave_table(rng, k):
    gains = np.sort(rng.uniform(0, 1, k))[::-1]
    return np.concatenate([[0.0], np.cumsum(gains)])


def test_single_wd_takes_everything():
    t = [0.0, 0.2, 0.3, 0.35]
    assert greedy_alloc([t], 3).rb_counts == (3,)
    assert dp_alloc([t], 3).rb_counts == (3,)


def test_zero_tables_tie_break():
    zero = [np.zeros(5)] * 3
    assert greedy_alloc(zero, 4).rb_counts == (4, 0, 0)
    assert greedy_alloc(zero, 4).total_utility == 0.0
    assert dp_alloc(zero, 4).total_utility == 0.0


def test_dp_two_wd_example():
    res = dp_alloc([[0, 5, 5], [0, 4, 9]], 2)
    assert res.rb_counts == (0, 2)
    assert res.total_utility == 9


def test_no_rbs():
    res = dp_alloc([[0, 1], [0, 2]], 0)
    assert res.rb_counts == (0, 0) and res.total_utility == 0
    assert greedy_alloc([[0, 1], [0, 2]], 0).rb_counts == (0, 0)


def test_empty_member_list():
    assert dp_alloc([], 5).rb_counts == ()
    assert greedy_alloc([], 5).total_utility == 0.0


def test_marginal_gain():
    assert marginal_gain([0, 3, 5], 0) == 3
    assert marginal_gain(np.full(4, 2.0), 1) == 0
    with pytest.raises(IndexError):
        marginal_gain([0, 3, 5], 2)


def test_short_table_rejected():
    with pytest.raises(ValueError):
        dp_alloc([[0, 1]], 3)


def test_accepts_utility_tables():
    t = UtilityTable.from_values([0, 1, 1.5, 1.8])
    assert dp_alloc([t, t], 3).total_utility == pytest.approx(2.5)


def test_greedy_matches_dp_on_concave_three_wds():
    rng = np.random.default_rng(1)
    for _ in range(50):
        tables = [concave_table(rng, 6) for _ in range(3)]
        assert greedy_alloc(tables, 6).total_utility == pytest.approx(dp_alloc(tables, 6).total_utility, rel=1e-12)


def test_greedy_can_lose_on_convex_tables():
    # a step table hides its value behind flat marginal gains
    tables = [[0, 0, 0, 1.0], [0, 0.2, 0.3, 0.35]]
    assert dp_alloc(tables, 3).total_utility == 1.0
    assert greedy_alloc(tables, 3).total_utility < 1.0


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_dp_equals_enumeration(n, k, seed):
    rng = np.random.default_rng(seed)
    # arbitrary non-decreasing tables, not necessarily concave
    tables = [np.concatenate([[0.0], np.cumsum(rng.exponential(1.0, k))]) for _ in range(n)]
    res = dp_alloc(tables, k)
    assert sum(res.rb_counts) <= k
    assert res.total_utility == pytest.approx(brute_force(tables, k), rel=1e-12)
    assert res.total_utility == total_of(tables, res.rb_counts)


def test_dp_table_prefix_values():
    tables = [[0, 1, 1.5], [0, 0.8, 1.7]]
    dp = dp_tables(tables, 2)
    assert dp.value[2, 0] == 1.5
    assert dp.value[2, 1] == 1.8
    assert dp.choice[2, 1] == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_dp_tie_break_is_lexicographic(n, k, seed):
    rng = np.random.default_rng(seed)
    # small integer gains make exact ties common
    tables = [np.concatenate([[0], np.cumsum(rng.integers(0, 3, k))]).astype(float) for _ in range(n)]
    first, best = None, -1.0
    for zs in itertools.product(range(k + 1), repeat=n):
        v = sum(t[z] for t, z in zip(tables, zs))
        if sum(zs) <= k and v > best:
            first, best = zs, v
    assert dp_alloc(tables, k).rb_counts == first
