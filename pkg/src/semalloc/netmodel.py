"""Physical system model: entities, link rate and the time/energy formulas.

All quantities are SI: seconds, joules, watts, hertz, bits and CPU cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .utilmodel import AccuracyParams

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "GlobalParams",
    "BaseStation",
    "WirelessDevice",
    "Link",
    "ScheduleDecision",
    "Assignment",
    "Violation",
    "InfeasibleError",
    "compute_time",
    "compute_energy",
    "link_rate",
    "transmit_time",
    "transmit_energy",
    "validate_assignment",
]

# relative slack allowed on the delay and energy budgets
BUDGET_RTOL = 1e-9


class InfeasibleError(ValueError):
    """Raised when a requested operating point cannot exist."""


@dataclass(frozen=True)
class GlobalParams:
    rb_bandwidth_hz: float
    max_delay_s: float
    noise_power_w: float

    def __post_init__(self):
        for name in ("rb_bandwidth_hz", "max_delay_s", "noise_power_w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class BaseStation:
    id: int
    position_m: tuple[float, float]
    rb_count: int
    interference_w: float

    def __post_init__(self):
        if int(self.rb_count) != self.rb_count or self.rb_count < 1:
            raise ValueError("rb_count must be an integer >= 1")
        if self.interference_w < 0:
            raise ValueError("interference_w must be >= 0")


@dataclass(frozen=True)
class WirelessDevice:
    id: int
    position_m: tuple[float, float]
    max_freq_hz: float
    max_power_w: float
    energy_budget_j: float
    energy_coeff: float
    app_params: AccuracyParams

    def __post_init__(self):
        for name in ("max_freq_hz", "max_power_w", "energy_budget_j", "energy_coeff"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class Link:
    """One WD-to-BS uplink as seen by the scheduler."""

    gain: float
    interference_w: float
    params: GlobalParams

    def __post_init__(self):
        if not 0 <= self.gain <= 1:
            raise ValueError("channel gain must lie in [0, 1]")

    @property
    def snr_per_watt(self) -> float:
        return self.gain / (self.params.noise_power_w + self.interference_w)


@dataclass(frozen=True)
class ScheduleDecision:
    c_cycles: float = 0.0
    freq_hz: float = 0.0
    power_w: float = 0.0
    data_bits: float = 0.0
    utility: float = 0.0

    @classmethod
    def idle(cls) -> "ScheduleDecision":
        return cls()


@dataclass
class Assignment:
    """A complete solution of the joint problem.

    ``association[n]`` is the BS index of WD ``n`` (or None), ``allocation[n]``
    its RB count on that BS.
    """

    association: list[Optional[int]]
    allocation: list[int]
    schedules: list[ScheduleDecision]
    total_utility: float = field(default=0.0)
    upper_bound: Optional[float] = None

    @classmethod
    def from_parts(cls, association, allocation, schedules, upper_bound=None):
        total = math.fsum(s.utility for s in schedules)
        return cls(list(association), [int(z) for z in allocation], list(schedules),
                   total, upper_bound)

    @classmethod
    def empty(cls, num_wd: int) -> "Assignment":
        return cls.from_parts([None] * num_wd, [0] * num_wd,
                              [ScheduleDecision.idle()] * num_wd)

    def members(self, bs: int) -> list[int]:
        return [n for n, m in enumerate(self.association) if m == bs]

    def bs_utility(self, bs: int) -> float:
        return math.fsum(self.schedules[n].utility for n in self.members(bs))


def compute_time(c: float, f: float) -> float:
    if c == 0:
        return 0.0
    if f <= 0:
        raise InfeasibleError("nonzero workload needs a positive CPU frequency")
    return c / f


def compute_energy(c: float, gamma: float, f: float) -> float:
    return c * gamma * f * f


def link_rate(z: float, params: GlobalParams, p: float, h: float, interference: float) -> float:
    if z == 0:
        return 0.0
    snr = p * h / (params.noise_power_w + interference)
    return z * params.rb_bandwidth_hz * math.log2(1.0 + snr)


def transmit_time(d: float, rate: float) -> float:
    if d == 0:
        return 0.0
    if rate <= 0:
        raise InfeasibleError(f"cannot send {d} bits at zero rate")
    return d / rate


def transmit_energy(p: float, t: float) -> float:
    return p * t


@dataclass(frozen=True)
class Violation:
    constraint: str
    entity: int
    magnitude: float
    detail: str = ""


def validate_assignment(a: Assignment, s: "Scenario") -> list[Violation]:
    """Check association, RB budgets and per-WD delay/energy/frequency/power limits."""
    out: list[Violation] = []
    tmax = s.params.max_delay_s
    num_bs = len(s.base_stations)
    if not (len(a.association) == len(a.allocation) == len(a.schedules) == len(s.devices)):
        out.append(Violation("shape", -1, float("nan"), "assignment size does not match scenario"))
        return out

    used = [0] * num_bs
    for n, (m, z, sch) in enumerate(zip(a.association, a.allocation, a.schedules)):
        wd = s.devices[n]
        if z < 0:
            out.append(Violation("rb_nonneg", n, -z))
        if m is None:
            if z != 0:
                out.append(Violation("unassociated_rb", n, z))
            if sch.utility != 0 or sch.data_bits != 0:
                out.append(Violation("unassociated_utility", n, sch.utility))
            continue
        if not 0 <= m < num_bs:
            out.append(Violation("association", n, 1.0, f"unknown BS {m}"))
            continue
        used[m] += z

        if sch.freq_hz < 0 or sch.freq_hz > wd.max_freq_hz * (1 + BUDGET_RTOL):
            out.append(Violation("freq", n, sch.freq_hz - wd.max_freq_hz))
        if sch.power_w < 0 or sch.power_w > wd.max_power_w * (1 + BUDGET_RTOL):
            out.append(Violation("power", n, sch.power_w - wd.max_power_w))
        try:
            tc = compute_time(sch.c_cycles, sch.freq_hz)
            bs = s.base_stations[m]
            rate = link_rate(z, s.params, sch.power_w, s.gain[m, n], bs.interference_w)
            tt = transmit_time(sch.data_bits, rate)
        except InfeasibleError as exc:
            out.append(Violation("delay", n, float("inf"), str(exc)))
            continue
        if tc + tt > tmax * (1 + BUDGET_RTOL):
            out.append(Violation("delay", n, tc + tt - tmax))
        energy = compute_energy(sch.c_cycles, wd.energy_coeff, sch.freq_hz) + transmit_energy(sch.power_w, tt)
        if energy > wd.energy_budget_j * (1 + BUDGET_RTOL):
            out.append(Violation("energy", n, energy - wd.energy_budget_j))

    for m, bs in enumerate(s.base_stations):
        if used[m] > bs.rb_count:
            out.append(Violation("rb_budget", m, used[m] - bs.rb_count))

    total = math.fsum(sch.utility for sch in a.schedules)
    if abs(total - a.total_utility) > 1e-9 * max(1.0, abs(total)):
        out.append(Violation("total_utility", -1, a.total_utility - total))
    return out
