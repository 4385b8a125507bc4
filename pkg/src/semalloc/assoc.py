"""User association: start with every WD attached to every BS, then detach one WD per step.

Each step re-solves RB allocation at every BS, estimates for each pending WD
how much utility every BS would lose if the WD left it, and settles the WD
whose losses are most concentrated on one BS (largest kurtosis) at the BS
where it matters most.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .netmodel import Assignment, ScheduleDecision
from .rballoc import AllocationResult, dp_alloc, greedy_alloc
from .utilmodel import UtilityKind
from .wdsched import UtilityTable

__all__ = [
    "AssociationState",
    "DetachEstimate",
    "ALLOCATORS",
    "default_allocator",
    "scenario_tables",
    "estimate_delta",
    "kurtosis",
    "associate",
    "allocate_fixed",
]

ALLOCATORS: dict[str, Callable] = {"greedy": greedy_alloc, "dp": dp_alloc}

Tables = Sequence[Sequence[UtilityTable]]  # tables[n][m]


def default_allocator(kind) -> str:
    return "greedy" if UtilityKind.parse(kind) is UtilityKind.CONCAVE else "dp"


def scenario_tables(scenario, kind=UtilityKind.CONCAVE) -> list[list[UtilityTable]]:
    """Optimal-scheduling utility tables ``tables[n][m]`` for every WD/BS pair."""
    from .wdsched import solve_tables

    jobs = [(wd, scenario.link(n, m), bs.rb_count)
            for n, wd in enumerate(scenario.devices) for m, bs in enumerate(scenario.base_stations)]
    flat = solve_tables(jobs, kind)
    M = scenario.num_bs
    return [flat[n * M:(n + 1) * M] for n in range(scenario.num_wd)]


@dataclass
class AssociationState:
    pending: list[int]
    association: list[Optional[int]]
    members: list[list[int]]
    allocations: list[dict[int, int]] = field(default_factory=list)

    def holds(self, n: int, m: int) -> bool:
        return n in self.members[m]


@dataclass(frozen=True)
class DetachEstimate:
    deltas: tuple[float, ...]
    kurtosis: float


def _util(table, z: int) -> float:
    return float(table.utility[z] if hasattr(table, "utility") else table[z])


def estimate_delta(n: int, m: int, alloc: dict[int, int], tables: Tables) -> float:
    """Approximate utility BS ``m`` loses if WD ``n`` leaves; never negative.

    The RBs released by ``n`` are valued at the marginal gain of the remaining
    member holding the most RBs (lowest index on ties).
    """
    z_n = alloc[n]
    own = _util(tables[n][m], z_n)
    if z_n == 0:
        return max(own, 0.0)
    others = [o for o in alloc if o != n]
    if not others:
        return max(own, 0.0)
    ref = min(others, key=lambda o: (-alloc[o], o))
    t = tables[ref][m]
    delta_m = _util(t, alloc[ref] + 1) - _util(t, alloc[ref])
    return max(own - delta_m * z_n, 0.0)


def kurtosis(deltas: Sequence[float]) -> float:
    total = math.fsum(deltas)
    if not total > 0:
        return 1.0 / len(deltas)
    return max(deltas) / total


class _BsSolver:
    """Memoized per-BS allocation keyed by the member tuple."""

    def __init__(self, tables: Tables, rb_counts: Sequence[int], allocator: Callable):
        self.tables = tables
        self.rb_counts = rb_counts
        self.allocator = allocator
        self.cache: dict[tuple[int, tuple[int, ...]], tuple[dict[int, int], float]] = {}

    def __call__(self, m: int, members: Sequence[int]):
        key = (m, tuple(members))
        hit = self.cache.get(key)
        if hit is None:
            res: AllocationResult = self.allocator([self.tables[n][m] for n in members], self.rb_counts[m])
            hit = (dict(zip(members, res.rb_counts)), res.total_utility)
            self.cache[key] = hit
        return hit


def _build_assignment(association, allocs, tables, num_wd, upper_bound=None) -> Assignment:
    allocation = [0] * num_wd
    for per_bs in allocs:
        for n, z in per_bs.items():
            allocation[n] = z
    schedules = []
    for n in range(num_wd):
        m = association[n]
        if m is None:
            schedules.append(ScheduleDecision.idle())
        else:
            schedules.append(tables[n][m].decision(allocation[n]))
    return Assignment.from_parts(association, allocation, schedules, upper_bound)


def allocate_fixed(association: Sequence[Optional[int]], tables: Tables, rb_counts: Sequence[int],
                   allocator="greedy") -> Assignment:
    """Allocate RBs and schedule for a given association."""
    alloc_fn = ALLOCATORS[allocator] if isinstance(allocator, str) else allocator
    allocs = []
    for m, k in enumerate(rb_counts):
        members = [n for n, a in enumerate(association) if a == m]
        res = alloc_fn([tables[n][m] for n in members], k)
        allocs.append(dict(zip(members, res.rb_counts)))
    return _build_assignment(list(association), allocs, tables, len(association))


def associate(scenario, kind=UtilityKind.CONCAVE, allocator: Optional[str] = None,
              tables: Optional[Tables] = None, trace: Optional[list] = None) -> Assignment:
    """Run the detachment heuristic and return a full assignment.

    ``assignment.upper_bound`` holds the all-associated total of step 0. When
    ``trace`` is a list, the total utility before every step and after the
    last one is appended to it.
    """
    kind = UtilityKind.parse(kind)
    if tables is None:
        tables = scenario_tables(scenario, kind)
    allocator = allocator or default_allocator(kind)
    alloc_fn = ALLOCATORS[allocator] if isinstance(allocator, str) else allocator
    N, M = scenario.num_wd, scenario.num_bs
    rb_counts = [bs.rb_count for bs in scenario.base_stations]
    solve = _BsSolver(tables, rb_counts, alloc_fn)

    state = AssociationState(list(range(N)), [None] * N, [list(range(N)) for _ in range(M)])
    upper_bound = None
    for _ in range(N):
        results = [solve(m, state.members[m]) for m in range(M)]
        state.allocations = [r[0] for r in results]
        total = math.fsum(r[1] for r in results)
        if upper_bound is None:
            upper_bound = total
        if trace is not None:
            trace.append(total)

        chosen, chosen_est = None, None
        for n in state.pending:
            deltas = tuple(estimate_delta(n, m, state.allocations[m], tables) for m in range(M))
            est = DetachEstimate(deltas, kurtosis(deltas))
            if chosen is None or est.kurtosis > chosen_est.kurtosis:
                chosen, chosen_est = n, est
        target = max(range(M), key=lambda m: (chosen_est.deltas[m], -m))

        for m in range(M):
            if m != target:
                state.members[m].remove(chosen)
        state.association[chosen] = target
        state.pending.remove(chosen)

    results = [solve(m, state.members[m]) for m in range(M)]
    state.allocations = [r[0] for r in results]
    if trace is not None:
        trace.append(math.fsum(r[1] for r in results))
    return _build_assignment(state.association, state.allocations, tables, N, upper_bound)
