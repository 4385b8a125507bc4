"""Brute-force ground truth for toy instances.

Per-WD tables come from a joint (c, f) grid followed by a bounded-Brent polish
(deliberately a different search path from :mod:`semalloc.wdsched`); the
association and every RB composition are then enumerated exhaustively.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .assoc import associate
from .netmodel import Assignment, validate_assignment, Link, ScheduleDecision, WirelessDevice
from .rballoc import dp_alloc
from .scenario import GenConfig, generate
from .utilmodel import UtilityKind, utility
from .wdsched import UtilityTable

__all__ = ["OracleConfig", "OracleResult", "OracleCheck", "oracle_table", "exact_solve", "exact_delta",
           "tiny_config", "oracle_check"]


@dataclass(frozen=True)
class OracleConfig:
    c_grid_points: int = 64
    f_grid_points: int = 64
    max_bs: int = 3
    max_wd: int = 4
    max_rb: int = 6

    def __post_init__(self):
        assoc = (self.max_bs + 1) ** self.max_wd
        comps = (self.max_rb + 1) ** self.max_wd
        if assoc * comps > 1e8:
            raise ValueError("enumeration limits exceed 1e8 evaluations")


@dataclass(frozen=True)
class OracleResult:
    assignment: Assignment
    value: float


def _bits_per_rb(c, f, wd: WirelessDevice, link: Link):
    T = link.params.max_delay_s
    with np.errstate(divide="ignore", invalid="ignore"):
        window = T - c / f
        spare = wd.energy_budget_j - c * wd.energy_coeff * f**2
        p = np.minimum(wd.max_power_w, spare / window)
        bits = link.params.rb_bandwidth_hz * window * np.log2(1 + link.snr_per_watt * p)
    return np.where((window > 0) & (spare >= 0) & np.isfinite(bits), np.maximum(bits, 0.0), 0.0)


def _f_range(c, wd, link):
    lo = c / link.params.max_delay_s
    hi = min(wd.max_freq_hz, math.sqrt(wd.energy_budget_j / (c * wd.energy_coeff)))
    return lo, hi


def _best_bits(c, wd, link):
    """Max over f of per-RB bits at workload c, by bounded Brent."""
    lo, hi = _f_range(c, wd, link)
    if not hi > lo:
        return 0.0, math.nan
    res = minimize_scalar(lambda f: -float(_bits_per_rb(c, f, wd, link)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9 * hi})
    # Brent never probes the endpoints; the upper one can be optimal
    at_hi = float(_bits_per_rb(c, hi, wd, link))
    if at_hi >= -res.fun:
        return at_hi, hi
    return -res.fun, res.x


def _decision(c, f, z, bits, wd, link, kind) -> ScheduleDecision:
    p = wd.app_params
    d = min(z * bits, p.d_max_bits)
    u = float(utility(c, d, p, kind))
    if not u > 0:
        return ScheduleDecision.idle()
    T = link.params.max_delay_s
    window = T - c / f
    power = min(wd.max_power_w, (wd.energy_budget_j - c * wd.energy_coeff * f * f) / window)
    if z * bits > p.d_max_bits:
        need = (2.0 ** (d / (z * link.params.rb_bandwidth_hz * window)) - 1.0) / link.snr_per_watt
        power = min(power, need)
    return ScheduleDecision(float(c), float(f), float(power), float(d), u)


def oracle_table(wd: WirelessDevice, link: Link, k_max: int, kind=UtilityKind.CONCAVE,
                 cfg: OracleConfig = OracleConfig()) -> list[ScheduleDecision]:
    """Grid-then-polish optimum for each z in 0..k_max."""
    kind = UtilityKind.parse(kind)
    p = wd.app_params
    out = [ScheduleDecision.idle()]
    if k_max == 0:
        return out
    cs = np.geomspace(p.c_max_cycles * 1e-6, p.c_max_cycles, cfg.c_grid_points)
    bits = np.zeros((len(cs), cfg.f_grid_points))
    fs = np.full_like(bits, np.nan)
    for i, c in enumerate(cs):
        lo, hi = _f_range(c, wd, link)
        if hi > lo:
            fs[i] = np.linspace(lo, hi, cfg.f_grid_points + 1)[1:]
            bits[i] = _bits_per_rb(c, fs[i], wd, link)
    log_cs = np.log(cs)
    for z in range(1, k_max + 1):
        vals = utility(cs[:, None], np.minimum(z * bits, p.d_max_bits), p, kind)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        best = _decision(cs[i], fs[i, j], z, bits[i, j], wd, link, kind) if vals[i, j] > 0 else ScheduleDecision.idle()

        def neg(logc):
            c = math.exp(logc)
            b, _ = _best_bits(c, wd, link)
            return -float(utility(c, min(z * b, p.d_max_bits), p, kind))

        a, b = log_cs[max(i - 1, 0)], log_cs[min(i + 1, len(cs) - 1)]
        res = minimize_scalar(neg, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        if -res.fun > best.utility:
            c = math.exp(res.x)
            g, f = _best_bits(c, wd, link)
            cand = _decision(c, f, z, g, wd, link, kind)
            if cand.utility > best.utility:
                best = cand
        out.append(best)
    return out


def _check_limits(scenario, cfg: OracleConfig):
    if scenario.num_bs > cfg.max_bs or scenario.num_wd > cfg.max_wd:
        raise ValueError(f"instance {scenario.num_bs}x{scenario.num_wd} exceeds oracle limits "
                         f"{cfg.max_bs}x{cfg.max_wd}")
    if max(bs.rb_count for bs in scenario.base_stations) > cfg.max_rb:
        raise ValueError(f"RB count exceeds oracle limit {cfg.max_rb}")


def exact_solve(scenario, kind=UtilityKind.CONCAVE, cfg: OracleConfig = OracleConfig(),
                tables: Optional[list[list[list[ScheduleDecision]]]] = None) -> OracleResult:
    """Exhaustive optimum over associations (including none) and RB compositions."""
    _check_limits(scenario, cfg)
    N, M = scenario.num_wd, scenario.num_bs
    if tables is None:
        tables = [[oracle_table(wd, scenario.link(n, m), bs.rb_count, kind, cfg)
                   for m, bs in enumerate(scenario.base_stations)]
                  for n, wd in enumerate(scenario.devices)]
    util = [[[d.utility for d in tables[n][m]] for m in range(M)] for n in range(N)]

    @lru_cache(maxsize=None)
    def best_split(m: int, members: tuple[int, ...]):
        k = scenario.base_stations[m].rb_count
        best_v, best_z = 0.0, (0,) * len(members)
        for zs in itertools.product(range(k + 1), repeat=len(members)):
            if sum(zs) > k:
                continue
            v = math.fsum(util[n][m][z] for n, z in zip(members, zs))
            if v > best_v:
                best_v, best_z = v, zs
        return best_v, best_z

    best_value, best_assoc = -1.0, None
    for choice in itertools.product([None, *range(M)], repeat=N):
        v = math.fsum(best_split(m, tuple(n for n in range(N) if choice[n] == m))[0] for m in range(M))
        if v > best_value:
            best_value, best_assoc = v, choice

    association, allocation = list(best_assoc), [0] * N
    for m in range(M):
        members = tuple(n for n in range(N) if best_assoc[n] == m)
        for n, z in zip(members, best_split(m, members)[1]):
            allocation[n] = z
    schedules = [tables[n][association[n]][allocation[n]] if association[n] is not None
                 else ScheduleDecision.idle() for n in range(N)]
    return OracleResult(Assignment.from_parts(association, allocation, schedules), best_value)


def exact_delta(n: int, m: int, members: Sequence[int], tables, alloc: Optional[dict[int, int]] = None) -> float:
    """Exact utility BS ``m`` loses when ``n`` leaves and the freed RBs are re-allocated optimally."""
    members = list(members)
    if n not in members:
        raise ValueError(f"WD {n} is not a member of BS {m}")
    rows = [tables[o][m] for o in members]
    k = len(getattr(rows[0], "utility", rows[0])) - 1
    if alloc is None:
        alloc = dict(zip(members, dp_alloc(rows, k).rb_counts))

    def u(o, z):
        t = tables[o][m]
        return float(t.utility[z] if isinstance(t, UtilityTable) else t[z])

    rest = [o for o in members if o != n]
    if not rest:
        return u(n, alloc[n])
    regained = dp_alloc([tables[o][m] for o in rest], k).total_utility
    held = math.fsum(u(o, alloc[o]) for o in rest)
    return u(n, alloc[n]) - (regained - held)


def tiny_config(seed: int, num_bs: int = 2, num_wd: int = 3, rb_choices=(2, 3, 4)) -> GenConfig:
    return GenConfig(num_bs=num_bs, num_wd=num_wd, rb_choices=tuple(rb_choices), seed=seed)


@dataclass(frozen=True)
class OracleCheck:
    seed: int
    proposed: float
    optimum: float
    violations: int

    @property
    def ratio(self) -> float:
        return self.proposed / self.optimum if self.optimum > 0 else 1.0


def oracle_check(seeds, kind=UtilityKind.CONCAVE, allocator=None, cfg: OracleConfig = OracleConfig()) -> list[OracleCheck]:
    """Proposed-vs-optimum comparison on tiny generated instances."""
    out = []
    for seed in seeds:
        s = generate(tiny_config(seed))
        a = associate(s, kind, allocator)
        o = exact_solve(s, kind, cfg)
        out.append(OracleCheck(seed, a.total_utility, o.value, len(validate_assignment(a, s))))
    return out
