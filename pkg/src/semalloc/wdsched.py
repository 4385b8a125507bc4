"""Per-device scheduling: optimal (c, f, P, d) for a WD given its BS and RB count.

For a fixed workload ``c`` the largest transmittable volume is ``z * g(c)``
where ``g`` is found by maximizing the per-RB volume over the CPU frequency.
The utility is then maximized over ``c``. Both one-dimensional searches seed
with a 64-point grid and polish with golden-section search.

The solver is batched: one call handles any number of (WD, BS, z) triples,
which is how whole utility tables for a scenario are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .netmodel import InfeasibleError, Link, ScheduleDecision, WirelessDevice
from .utilmodel import AccuracyParams, UtilityKind, utility

__all__ = [
    "FreqInterval",
    "UtilityTable",
    "golden_max",
    "tight_power",
    "feasible_freq_interval",
    "d_given_f",
    "g_of_c",
    "max_compute",
    "backoff_power",
    "optimal_schedule",
    "optimal_schedules",
    "utility_table",
    "solve_tables",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GRID_POINTS = 64
RTOL = 1e-8
C_LO_FRACTION = 1e-6


@dataclass(frozen=True)
class FreqInterval:
    """Feasible CPU frequencies ``(lo, hi]``; ``lo`` is excluded when it equals c/T."""

    lo_hz: float
    hi_hz: float

    @property
    def empty(self) -> bool:
        return not self.hi_hz > self.lo_hz

    @classmethod
    def none(cls) -> "FreqInterval":
        return cls(math.nan, math.nan)


@dataclass(frozen=True)
class UtilityTable:
    """``u*(z)`` for ``z = 0..k_max`` plus the decision behind each entry."""

    utility: np.ndarray
    c_cycles: np.ndarray
    freq_hz: np.ndarray
    power_w: np.ndarray
    data_bits: np.ndarray

    def __len__(self):
        return len(self.utility)

    def __getitem__(self, z):
        return self.utility[z]

    @property
    def k_max(self) -> int:
        return len(self.utility) - 1

    def decision(self, z: int) -> ScheduleDecision:
        if not self.utility[z] > 0:
            return ScheduleDecision.idle()
        return ScheduleDecision(float(self.c_cycles[z]), float(self.freq_hz[z]),
                                float(self.power_w[z]), float(self.data_bits[z]),
                                float(self.utility[z]))

    @classmethod
    def from_values(cls, values) -> "UtilityTable":
        """Bare table without decisions (used by allocators and tests)."""
        u = np.asarray(values, dtype=float)
        nan = np.full(u.shape, np.nan)
        return cls(u, nan, nan, nan, nan)


def golden_max(fun, lo, hi, xtol, max_iter: int = 200):
    """Elementwise golden-section maximization of ``fun`` on ``[lo, hi]``.

    ``fun`` maps an array of abscissae to values of the same shape. Returns
    ``(x, f(x))`` for the best interior probe; endpoints are not evaluated.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    xtol = np.broadcast_to(np.asarray(xtol, dtype=float), lo.shape)
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        active = (hi - lo) > xtol
        if not active.any():
            break
        right = active & (f2 > f1)
        left = active & ~right
        lo = np.where(right, x1, lo)
        hi = np.where(left, x2, hi)
        xn = np.where(right, lo + INV_PHI * (hi - lo), hi - INV_PHI * (hi - lo))
        fn = fun(xn)
        x1, f1, x2, f2 = (
            np.where(right, x2, np.where(left, xn, x1)),
            np.where(right, f2, np.where(left, fn, f1)),
            np.where(right, xn, np.where(left, x1, x2)),
            np.where(right, fn, np.where(left, f1, f2)),
        )
    better = f2 > f1
    return np.where(better, x2, x1), np.where(better, f2, f1)


class _Consts(NamedTuple):
    """Per-element physical constants; fields are scalars or equal-length arrays."""

    T: np.ndarray
    E: np.ndarray
    gamma: np.ndarray
    fmax: np.ndarray
    pmax: np.ndarray
    snr: np.ndarray
    W: np.ndarray

    @classmethod
    def of(cls, wd: WirelessDevice, link: Link) -> "_Consts":
        return cls(*(np.array([v], dtype=float) for v in (
            link.params.max_delay_s, wd.energy_budget_j, wd.energy_coeff, wd.max_freq_hz,
            wd.max_power_w, link.snr_per_watt, link.params.rb_bandwidth_hz)))

    @classmethod
    def stack(cls, items: Sequence["_Consts"]) -> "_Consts":
        return cls(*(np.concatenate(col) for col in zip(*items)))

    def take(self, idx) -> "_Consts":
        return _Consts(*(a[idx] for a in self))

    def col(self) -> "_Consts":
        return _Consts(*(a[:, None] for a in self))

    def f_upper(self, c):
        f_energy = np.sqrt(self.E / (np.maximum(c, 1e-300) * self.gamma))
        return np.minimum(self.fmax, np.where(c > 0, f_energy, np.inf))

    def per_rb_bits(self, c, f):
        """Bits per RB at frequency ``f``; power is the tight value capped at Pmax."""
        window = self.T - np.where(c > 0, c / f, 0.0)
        left = self.E - c * self.gamma * f * f
        power = np.minimum(self.pmax, left / window)
        bits = self.W * window * np.log2(1.0 + self.snr * power)
        ok = (window > 0) & (left >= 0) & (bits > 0)
        return np.where(ok, bits, 0.0)

    def max_compute(self):
        """Supremum of workloads with any feasible frequency (deadline and energy)."""
        return np.minimum(self.fmax * self.T, np.cbrt(self.E * self.T**2 / self.gamma))


class _Params(NamedTuple):
    """Array-valued stand-in for AccuracyParams, accepted by the utility functions."""

    eta1: np.ndarray
    eta2: np.ndarray
    c_max_cycles: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    d_max_bits: np.ndarray
    raw_data_bits: np.ndarray
    log_base: Optional[float]

    @classmethod
    def stack(cls, items: Sequence[AccuracyParams]) -> "_Params":
        bases = {p.log_base for p in items}
        if len(bases) > 1:
            raise ValueError("cannot batch applications with different log bases")
        cols = [np.array([getattr(p, f) for p in items], dtype=float) for f in cls._fields[:-1]]
        return cls(*cols, bases.pop())

    def take(self, idx) -> "_Params":
        return _Params(*(a[idx] for a in self[:-1]), self.log_base)

    def col(self) -> "_Params":
        return _Params(*(a[:, None] for a in self[:-1]), self.log_base)


def tight_power(c: float, f: float, wd: WirelessDevice, link: Link) -> float:
    """Power that exhausts the remaining energy over the remaining time window."""
    T, E = link.params.max_delay_s, wd.energy_budget_j
    window = T - (c / f if c > 0 else 0.0)
    left = E - c * wd.energy_coeff * f * f
    if window <= 0 or left < -1e-12 * E:
        raise InfeasibleError("no time or energy left for transmission")
    return max(left, 0.0) / window


def feasible_freq_interval(c: float, wd: WirelessDevice, link: Link) -> FreqInterval:
    """Frequencies meeting the deadline, the energy budget and ``tight_power <= Pmax``."""
    T, E, gamma, pmax = link.params.max_delay_s, wd.energy_budget_j, wd.energy_coeff, wd.max_power_w
    lo = c / T
    hi = min(wd.max_freq_hz, math.sqrt(E / (c * gamma)) if c > 0 else math.inf)
    if not hi > lo:
        return FreqInterval.none()
    if c == 0:
        return FreqInterval(0.0, hi) if E <= pmax * T else FreqInterval.none()

    # tight_power(f) <= Pmax  <=>  phi(f) <= 0, and phi is decreasing in f
    def phi(f):
        return E - pmax * T + pmax * c / f - c * gamma * f * f

    if phi(hi) > 0:
        return FreqInterval.none()
    lo_probe = lo * (1 + 1e-15)
    if phi(lo_probe) <= 0:
        return FreqInterval(lo, hi)
    root = brentq(phi, lo_probe, hi, xtol=1e-12 * hi, rtol=4 * np.finfo(float).eps)
    return FreqInterval(root, hi)


def d_given_f(c: float, f: float, z: int, wd: WirelessDevice, link: Link) -> float:
    """Largest volume for fixed ``(c, f)`` with both budgets spent (power capped at Pmax)."""
    if z == 0:
        return 0.0
    k = _Consts.of(wd, link)
    hi = float(k.f_upper(np.array([c]))[0])
    if c > 0 and not (c / link.params.max_delay_s < f <= hi * (1 + 1e-12)):
        raise ValueError(f"frequency {f} outside the feasible domain for c={c}")
    return z * float(k.per_rb_bits(np.array([c]), np.array([min(f, hi)]))[0])


def _g_batch(c: np.ndarray, k: _Consts):
    """Vectorized ``g(c)`` and its maximizing frequency; zero where infeasible."""
    lo = np.where(c > 0, c / k.T, 0.0)
    hi = k.f_upper(c)
    feasible = hi > lo
    hi = np.where(feasible, hi, lo)
    steps = np.arange(1, GRID_POINTS + 1) / GRID_POINTS
    grid = lo[:, None] + (hi - lo)[:, None] * steps
    vals = k.col().per_rb_bits(c[:, None], grid)
    best = np.argmax(vals, axis=1)
    rows = np.arange(len(c))
    f_grid, g_grid = grid[rows, best], vals[rows, best]
    b_lo = np.where(best > 0, grid[rows, np.maximum(best - 1, 0)], lo)
    b_hi = grid[rows, np.minimum(best + 1, GRID_POINTS - 1)]
    f_gs, g_gs = golden_max(lambda f: k.per_rb_bits(c, f), b_lo, b_hi, RTOL * hi)
    use_gs = g_gs > g_grid
    f_star = np.where(use_gs, f_gs, f_grid)
    g = np.where(feasible, np.where(use_gs, g_gs, g_grid), 0.0)
    # compute-free workloads are insensitive to f; report the idle clock
    f_star = np.where(feasible, np.where(c > 0, f_star, 0.0), np.nan)
    return g, f_star


def g_of_c(c: float, wd: WirelessDevice, link: Link) -> tuple[float, float]:
    """Per-RB maximum transmittable bits at workload ``c`` and the frequency achieving it."""
    k = _Consts.of(wd, link)
    c_arr = np.array([c], dtype=float)
    if not k.f_upper(c_arr)[0] > c / link.params.max_delay_s:
        raise InfeasibleError(f"no feasible frequency for c={c}")
    with np.errstate(divide="ignore", invalid="ignore"):
        g, f = _g_batch(c_arr, k)
    return float(g[0]), float(f[0])


def max_compute(wd: WirelessDevice, link: Link) -> float:
    """Upper end of the searched workload range: min(C, feasibility supremum)."""
    return min(wd.app_params.c_max_cycles, float(_Consts.of(wd, link).max_compute()[0]))


def backoff_power(bits, z, window, snr, rb_bandwidth_hz):
    """Smallest power delivering ``bits`` over ``z`` RBs within ``window`` seconds."""
    return (2.0 ** (bits / (z * rb_bandwidth_hz * window)) - 1.0) / snr


def _solve(consts: _Consts, params: _Params, pair: np.ndarray, zs: np.ndarray, kind: UtilityKind):
    """Solve every (pair, z) element; returns arrays (u, c, f, P, d) aligned with ``zs``."""
    n_pairs = len(consts.T)
    c_ub = np.minimum(params.c_max_cycles, consts.max_compute())
    log_ub = np.log(c_ub)
    frac = np.linspace(math.log(C_LO_FRACTION), 0.0, GRID_POINTS)
    log_grid = log_ub[:, None] + frac  # (pairs, grid)
    c_grid = np.exp(log_grid)
    rep = np.repeat(np.arange(n_pairs), GRID_POINTS)
    g_grid, _ = _g_batch(c_grid.ravel(), consts.take(rep))
    g_grid = g_grid.reshape(n_pairs, GRID_POINTS)

    out = [np.zeros(len(zs)) for _ in range(5)]
    active = (zs > 0) & (consts.snr[pair] > 0)
    if not active.any():
        return out
    idx = np.flatnonzero(active)
    pe, z = pair[idx], zs[idx].astype(float)
    k, p = consts.take(pe), params.take(pe)

    def value(c, g, z, p):
        return utility(c, np.minimum(z * g, p.d_max_bits), p, kind)

    table = value(c_grid[pe], g_grid[pe], z[:, None], p.col())
    best = np.argmax(table, axis=1)
    rows = np.arange(len(idx))
    u_grid = table[rows, best]
    lg = log_grid[pe]
    b_lo = lg[rows, np.maximum(best - 1, 0)]
    b_hi = lg[rows, np.minimum(best + 1, GRID_POINTS - 1)]

    def objective(logc):
        c = np.exp(logc)
        return value(c, _g_batch(c, k)[0], z, p)

    x_gs, u_gs = golden_max(objective, b_lo, b_hi, RTOL)
    c_star = np.exp(np.where(u_gs > u_grid, x_gs, lg[rows, best]))
    g_star, f_star = _g_batch(c_star, k)
    u_star = value(c_star, g_star, z, p)

    full = z * g_star
    d_star = np.minimum(full, p.d_max_bits)
    window = k.T - c_star / f_star
    tight = np.minimum(k.pmax, (k.E - c_star * k.gamma * f_star**2) / window)
    capped = np.minimum(backoff_power(d_star, z, window, k.snr, k.W), tight)
    power = np.where(full > p.d_max_bits, capped, tight)

    served = u_star > 0
    for arr, vals in zip(out, (u_star, c_star, f_star, power, d_star)):
        arr[idx] = np.where(served, vals, 0.0)
    return out


def solve_tables(jobs: Sequence[tuple[WirelessDevice, Link, int]], kind=UtilityKind.CONCAVE) -> list[UtilityTable]:
    """Utility tables ``u*(0..k_max)`` for many (WD, link, k_max) jobs in one batched solve."""
    kind = UtilityKind.parse(kind)
    if not jobs:
        return []
    consts = _Consts.stack([_Consts.of(wd, link) for wd, link, _ in jobs])
    params = _Params.stack([wd.app_params for wd, _, _ in jobs])
    sizes = [int(kmax) + 1 for _, _, kmax in jobs]
    if min(sizes) < 1:
        raise ValueError("k_max must be >= 0")
    pair = np.repeat(np.arange(len(jobs)), sizes)
    zs = np.concatenate([np.arange(s) for s in sizes])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cols = _solve(consts, params, pair, zs, kind)
    bounds = np.cumsum([0] + sizes)
    return [UtilityTable(*(col[a:b] for col in cols)) for a, b in zip(bounds[:-1], bounds[1:])]


def optimal_schedules(wd: WirelessDevice, link: Link, zs, kind=UtilityKind.CONCAVE) -> UtilityTable:
    """Optimal decisions for each RB count in ``zs`` (any order, duplicates allowed)."""
    zs = np.asarray(zs, dtype=int)
    if np.any(zs < 0):
        raise ValueError("RB count must be >= 0")
    consts = _Consts.of(wd, link)
    params = _Params.stack([wd.app_params])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cols = _solve(consts, params, np.zeros(len(zs), dtype=int), zs, UtilityKind.parse(kind))
    return UtilityTable(*cols)


def optimal_schedule(wd: WirelessDevice, link: Link, z: int, kind=UtilityKind.CONCAVE) -> ScheduleDecision:
    return optimal_schedules(wd, link, [z], kind).decision(0)


def utility_table(wd: WirelessDevice, link: Link, k_max: int, kind=UtilityKind.CONCAVE) -> UtilityTable:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    return solve_tables([(wd, link, k_max)], kind)[0]
