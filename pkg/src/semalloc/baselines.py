"""Comparison algorithms. Each swaps one stage of the proposed pipeline for a simpler rule.

* TC: no on-device processing; the raw sample is sent and the BS runs the full model.
* FSC: a fixed (c, d) semantic scheme instead of optimal scheduling.
* ARB: RBs split evenly among the WDs of a BS.
* NUA: every WD joins its nearest BS.
* FAN: FSC + ARB + NUA together.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .assoc import Tables, allocate_fixed, associate, default_allocator, scenario_tables
from .netmodel import Assignment, Link, ScheduleDecision, WirelessDevice
from .rballoc import AllocationResult, total_of
from .utilmodel import UtilityKind, utility
from .wdsched import UtilityTable, _Consts, _g_batch, backoff_power

__all__ = [
    "BaselineKind",
    "BaselineConfig",
    "tc_schedule",
    "fsc_schedule",
    "tc_tables",
    "fsc_tables",
    "arb_alloc",
    "nua_assoc",
    "run_baseline",
]


class BaselineKind(str, enum.Enum):
    TC = "TC"
    FSC = "FSC"
    ARB = "ARB"
    NUA = "NUA"
    FAN = "FAN"


@dataclass(frozen=True)
class BaselineConfig:
    """``fsc_compute`` picks the fixed FSC workload: ``"data"`` gives c = D/2 cycles, ``"cmax"`` gives c = C/2."""

    fsc_compute: str = "data"

    def __post_init__(self):
        if self.fsc_compute not in ("data", "cmax"):
            raise ValueError(f"unknown fsc_compute mode {self.fsc_compute!r}")

    def fsc_workload(self, wd: WirelessDevice) -> tuple[float, float]:
        p = wd.app_params
        c = p.d_max_bits / 2 if self.fsc_compute == "data" else p.c_max_cycles / 2
        return c, p.d_max_bits / 2


def _tc_value(wd: WirelessDevice, kind: UtilityKind) -> float:
    eta2 = wd.app_params.eta2
    return eta2 if kind is UtilityKind.CONCAVE else 1.0 / (1.0 - eta2)


def tc_schedule(wd: WirelessDevice, link: Link, z: int, kind=UtilityKind.CONCAVE) -> ScheduleDecision:
    """Send the raw sample over ``z`` RBs with no local computation."""
    return tc_tables([(wd, link, z)], kind)[0].decision(z)


def fsc_schedule(wd: WirelessDevice, link: Link, z: int, kind=UtilityKind.CONCAVE,
                 cfg: BaselineConfig = BaselineConfig()) -> ScheduleDecision:
    """Fixed workloads ``(c, d)``; full utility if they fit in the budgets, else nothing."""
    return fsc_tables([(wd, link, z)], kind, cfg)[0].decision(z)


def _step_table(k_max, z_min, u, c, f, power_of_z, d) -> UtilityTable:
    zs = np.arange(k_max + 1)
    ok = (zs >= max(z_min, 1)) & (u > 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        power = np.where(ok, power_of_z(np.maximum(zs, 1)), 0.0)
    fill = lambda v: np.where(ok, v, 0.0)  # noqa: E731
    return UtilityTable(fill(u), fill(c), fill(f), power, fill(d))


def tc_tables(jobs: Sequence[tuple[WirelessDevice, Link, int]], kind=UtilityKind.CONCAVE) -> list[UtilityTable]:
    kind = UtilityKind.parse(kind)
    out = []
    for wd, link, k_max in jobs:
        T, W, snr = link.params.max_delay_s, link.params.rb_bandwidth_hz, link.snr_per_watt
        raw = wd.app_params.raw_data_bits
        per_rb = W * T * math.log2(1.0 + snr * min(wd.max_power_w, wd.energy_budget_j / T))
        # fewest RBs with z * per_rb >= raw; the boundary counts as success
        z_min = math.ceil(raw / per_rb) if per_rb > 0 else k_max + 1
        while z_min > 1 and (z_min - 1) * per_rb >= raw:
            z_min -= 1
        while z_min <= k_max and z_min * per_rb < raw:
            z_min += 1
        out.append(_step_table(k_max, z_min, _tc_value(wd, kind), 0.0, 0.0,
                               lambda z: backoff_power(raw, z, T, snr, W), raw))
    return out


def fsc_tables(jobs: Sequence[tuple[WirelessDevice, Link, int]], kind=UtilityKind.CONCAVE,
               cfg: BaselineConfig = BaselineConfig()) -> list[UtilityTable]:
    kind = UtilityKind.parse(kind)
    if not jobs:
        return []
    consts = _Consts.stack([_Consts.of(wd, link) for wd, link, _ in jobs])
    c = np.array([cfg.fsc_workload(wd)[0] for wd, _, _ in jobs])
    with np.errstate(divide="ignore", invalid="ignore"):
        g, f = _g_batch(c, consts)
    out = []
    for i, (wd, link, k_max) in enumerate(jobs):
        ci, d = cfg.fsc_workload(wd)
        T, W, snr = link.params.max_delay_s, link.params.rb_bandwidth_hz, link.snr_per_watt
        u = float(utility(ci, d, wd.app_params, kind))
        if not g[i] > 0:
            out.append(UtilityTable.from_values(np.zeros(k_max + 1)))
            continue
        z_min = math.ceil(d / g[i])
        while z_min > 1 and (z_min - 1) * g[i] >= d:
            z_min -= 1
        while z_min <= k_max and z_min * g[i] < d:
            z_min += 1
        window = T - ci / f[i]
        out.append(_step_table(k_max, z_min, u, ci, f[i],
                               lambda z, w=window: backoff_power(d, z, w, snr, W), d))
    return out


def arb_alloc(members: Sequence[int], k: int) -> AllocationResult:
    """Even split of ``k`` RBs; the remainder goes one each to the first members."""
    n = len(members)
    if n == 0:
        return AllocationResult((), 0.0)
    base, extra = divmod(k, n)
    return AllocationResult(tuple(base + (1 if i < extra else 0) for i in range(n)), 0.0)


def _arb_allocator(tables, k):
    res = arb_alloc(range(len(tables)), k)
    return AllocationResult(res.rb_counts, total_of(tables, res.rb_counts))


def nua_assoc(scenario) -> list[int]:
    """Nearest BS per WD; ties go to the lowest BS index."""
    bs_pos = np.array([bs.position_m for bs in scenario.base_stations], dtype=float)
    out = []
    for wd in scenario.devices:
        dist = np.hypot(*(bs_pos - np.asarray(wd.position_m, dtype=float)).T)
        out.append(int(np.argmin(dist)))
    return out


def _jobs(scenario):
    return [(wd, scenario.link(n, m), bs.rb_count)
            for n, wd in enumerate(scenario.devices) for m, bs in enumerate(scenario.base_stations)]


def _reshape(flat, scenario):
    M = scenario.num_bs
    return [flat[n * M:(n + 1) * M] for n in range(scenario.num_wd)]


def run_baseline(kind, scenario, utility_kind=UtilityKind.CONCAVE, tables: Optional[Tables] = None,
                 allocator: Optional[str] = None, cfg: BaselineConfig = BaselineConfig()) -> Assignment:
    """Run one comparison algorithm end to end.

    ``tables`` may carry precomputed optimal-scheduling tables (used by ARB and
    NUA). TC and FSC produce step-shaped tables, so their allocation stage is
    always the exact DP; greedy would stall on the flat prefix.
    """
    kind = BaselineKind(kind)
    utility_kind = UtilityKind.parse(utility_kind)
    rb_counts = [bs.rb_count for bs in scenario.base_stations]
    if kind is BaselineKind.TC:
        return associate(scenario, utility_kind, "dp", _reshape(tc_tables(_jobs(scenario), utility_kind), scenario))
    if kind is BaselineKind.FSC:
        return associate(scenario, utility_kind, "dp",
                         _reshape(fsc_tables(_jobs(scenario), utility_kind, cfg), scenario))
    if kind is BaselineKind.FAN:
        nearest = nua_assoc(scenario)
        jobs = [(wd, scenario.link(n, nearest[n]), rb_counts[nearest[n]]) for n, wd in enumerate(scenario.devices)]
        flat = fsc_tables(jobs, utility_kind, cfg)
        fan_tables = [[flat[n] if m == nearest[n] else None for m in range(scenario.num_bs)]
                      for n in range(scenario.num_wd)]
        return allocate_fixed(nearest, fan_tables, rb_counts, _arb_allocator)

    if tables is None:
        tables = scenario_tables(scenario, utility_kind)
    if kind is BaselineKind.ARB:
        proposed = associate(scenario, utility_kind, allocator, tables)
        return allocate_fixed(proposed.association, tables, rb_counts, _arb_allocator)
    return allocate_fixed(nua_assoc(scenario), tables, rb_counts, allocator or default_allocator(utility_kind))
