"""RB allocation at one BS: greedy marginal-gain allocation and the exact knapsack DP.

Both allocators take a sequence of per-WD utility tables (anything indexable
by ``z`` with length ``>= k + 1``) and return per-WD RB counts in table order.
Ties always go to the lowest position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["AllocationResult", "DpTables", "greedy_alloc", "dp_alloc", "dp_tables", "marginal_gain",
           "total_of"]


@dataclass(frozen=True)
class AllocationResult:
    rb_counts: tuple[int, ...]
    total_utility: float


@dataclass(frozen=True)
class DpTables:
    value: np.ndarray   # value[k, j-1] = best utility with k RBs over the first j WDs
    choice: np.ndarray  # choice[k, j-1] = RBs given to WD j in that optimum


def _as_arrays(tables, k):
    rows = [np.asarray(t.utility if hasattr(t, "utility") else t, dtype=float) for t in tables]
    for r in rows:
        if len(r) < k + 1:
            raise ValueError(f"utility table covers {len(r) - 1} RBs, need {k}")
    return [r[: k + 1] for r in rows]


def total_of(tables, counts) -> float:
    rows = [np.asarray(t.utility if hasattr(t, "utility") else t, dtype=float) for t in tables]
    return math.fsum(float(r[z]) for r, z in zip(rows, counts))


def marginal_gain(table, z: int) -> float:
    u = np.asarray(table.utility if hasattr(table, "utility") else table, dtype=float)
    if not 0 <= z < len(u) - 1:
        raise IndexError(f"no marginal gain at z={z} for a table of length {len(u)}")
    return float(u[z + 1] - u[z])


def greedy_alloc(tables, k: int) -> AllocationResult:
    """Hand out ``k`` RBs one at a time to the WD with the largest marginal gain."""
    rows = _as_arrays(tables, k)
    if not rows:
        return AllocationResult((), 0.0)
    z = np.zeros(len(rows), dtype=int)
    gain = np.array([r[1] - r[0] if k > 0 else -np.inf for r in rows])
    for _ in range(k):
        n = int(np.argmax(gain))
        z[n] += 1
        gain[n] = rows[n][z[n] + 1] - rows[n][z[n]] if z[n] < k else -np.inf
    return AllocationResult(tuple(int(v) for v in z), total_of(rows, z))


def dp_tables(tables, k: int) -> DpTables:
    rows = _as_arrays(tables, k)
    j_count = len(rows)
    value = np.zeros((k + 1, j_count))
    choice = np.zeros((k + 1, j_count), dtype=int)
    if not j_count:
        return DpTables(value, choice)
    ks = np.arange(k + 1)
    value[:, 0] = rows[0]
    choice[:, 0] = ks
    # cand[kk, zz] = value(kk - zz, j - 1) + u_j(zz) for zz <= kk
    diff = ks[:, None] - ks[None, :]
    valid = diff >= 0
    safe = np.where(valid, diff, 0)
    for j in range(1, j_count):
        cand = np.where(valid, value[safe, j - 1] + rows[j][None, :], -np.inf)
        best = np.argmax(cand, axis=1)
        choice[:, j] = best
        value[:, j] = cand[ks, best]
    return DpTables(value, choice)


def dp_alloc(tables, k: int) -> AllocationResult:
    """Exact optimum by dynamic programming over WDs, then a forward pass.

    The recursion runs over suffixes (tables built on the reversed WD order),
    so the forward pass can give each WD the fewest RBs that still reach the
    optimum. Among optimal allocations this returns the lexicographically
    smallest one.
    """
    rows = _as_arrays(tables, k)
    if not rows:
        return AllocationResult((), 0.0)
    n = len(rows)
    suffix = dp_tables(rows[::-1], k).value  # suffix[kk, n - 1 - j] = best over WDs j..n-1
    z = [0] * n
    left = k
    for j in range(n - 1):
        rest = suffix[left - np.arange(left + 1), n - 2 - j]
        z[j] = int(np.argmax(rows[j][: left + 1] + rest))
        left -= z[j]
    z[-1] = int(np.argmax(rows[-1][: left + 1]))
    return AllocationResult(tuple(z), total_of(rows, z))
