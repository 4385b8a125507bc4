"""Accuracy/utility curve fits and numerical checks of their structural assumptions.

Accuracy from computation follows ``eta1 * log(c / C) + eta2`` and accuracy from
transmitted data follows ``beta1 * (1 - d / D)**beta2 + beta3``. The delivered
accuracy is ``A = A_c * A_d / beta3``; utility is ``A`` (concave kind) or
``1 / (1 - A)`` (general kind). Functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "AccuracyParams",
    "UtilityKind",
    "accuracy_comp",
    "accuracy_comm",
    "accuracy",
    "utility",
    "AssumptionCheck",
    "validate_assumptions",
]


class UtilityKind(str, enum.Enum):
    CONCAVE = "concave"
    GENERAL = "general"

    @classmethod
    def parse(cls, value) -> "UtilityKind":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class AccuracyParams:
    eta1: float
    eta2: float
    c_max_cycles: float
    beta1: float
    beta2: float
    beta3: float
    d_max_bits: float
    raw_data_bits: float = 0.0
    log_base: Optional[float] = None  # None = natural log

    def __post_init__(self):
        if not self.eta1 > 0:
            raise ValueError("eta1 must be > 0")
        if not 0 < self.eta2 <= 1:
            raise ValueError("eta2 must lie in (0, 1]")
        if not self.beta1 < 0:
            raise ValueError("beta1 must be < 0")
        if not self.beta2 > 0:
            raise ValueError("beta2 must be > 0")
        if not 0 < self.beta3 <= 1:
            raise ValueError("beta3 must lie in (0, 1]")
        if not (self.c_max_cycles > 0 and self.d_max_bits > 0):
            raise ValueError("C and D must be > 0")
        if self.beta1 + self.beta3 < 0:
            raise ValueError("beta1 + beta3 must be >= 0")
        if self.raw_data_bits < 0:
            raise ValueError("raw_data_bits must be >= 0")


def _log(x, base):
    return np.log(x) if base is None else np.log(x) / np.log(base)


def accuracy_comp(c, p: AccuracyParams):
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise ValueError("computation workload must be > 0")
    ratio = np.minimum(c, p.c_max_cycles) / p.c_max_cycles
    out = np.maximum(0.0, p.eta1 * _log(ratio, p.log_base) + p.eta2)
    return out if out.ndim else float(out)


def accuracy_comm(d, p: AccuracyParams):
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > p.d_max_bits):
        raise ValueError("transmitted data must lie in [0, D]")
    out = p.beta1 * (1.0 - d / p.d_max_bits) ** p.beta2 + p.beta3
    return out if out.ndim else float(out)


def accuracy(c, d, p: AccuracyParams):
    """Delivered accuracy; workloads are clamped to (C, D) and ``d == 0`` gives 0."""
    c = np.minimum(np.asarray(c, dtype=float), p.c_max_cycles)
    d = np.minimum(np.asarray(d, dtype=float), p.d_max_bits)
    c, d = np.broadcast_arrays(c, d)
    safe_c = np.where(c > 0, c, p.c_max_cycles)
    safe_d = np.clip(d, 0.0, None)
    a = accuracy_comp(safe_c, p) * accuracy_comm(safe_d, p) / p.beta3
    out = np.where((d > 0) & (c > 0), a, 0.0)
    return out if out.ndim else float(out)


def utility(c, d, p: AccuracyParams, kind: UtilityKind = UtilityKind.CONCAVE):
    """Utility of workload pair ``(c, d)``; zero whenever nothing is transmitted."""
    kind = UtilityKind.parse(kind)
    a = np.asarray(accuracy(c, d, p))
    if kind is UtilityKind.CONCAVE:
        out = a
    else:
        if np.any(a >= 1):
            raise ValueError("reciprocal utility undefined for accuracy >= 1")
        sent = np.broadcast_to(np.asarray(d, dtype=float), a.shape) > 0
        out = np.where(sent & (a > 0), 1.0 / (1.0 - a), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    worst_violation: float
    location: Optional[tuple[float, float]]


def validate_assumptions(p: AccuracyParams, kind=UtilityKind.CONCAVE, n_c: int = 50, n_d: int = 50,
                         c_range=(0.02, 1.0), d_range=(0.02, 1.0),
                         alphas=(1.5, 2.0, 4.0), tol: float = 1e-12) -> dict[str, AssumptionCheck]:
    """Sample the utility surface and report on the three structural assumptions.

    ``c_range`` and ``d_range`` are fractions of C and D. Returned keys are
    ``"monotone"``, ``"A1"`` (joint concavity), ``"A2"`` (marginal of c
    non-decreasing in d) and ``"A3"`` (d-marginal scaling bound).
    Derivatives are central finite differences with a step of 1e-4 of the range.
    """
    kind = UtilityKind.parse(kind)
    C, D = p.c_max_cycles, p.d_max_bits
    cs = np.linspace(c_range[0], c_range[1], n_c) * C
    ds = np.linspace(d_range[0], d_range[1], n_d) * D
    hc, hd = 1e-4 * C, 1e-4 * D
    cg, dg = np.meshgrid(cs, ds, indexing="ij")

    def u(c, d):
        return utility(np.clip(c, 1e-300, C), np.clip(d, 0, D), p, kind)

    # stencils are clipped to the domain, so boundary points use one-sided widths
    lo_c, hi_c = np.maximum(cg - hc, 1e-300), np.minimum(cg + hc, C)
    lo_d, hi_d = np.maximum(dg - hd, 0), np.minimum(dg + hd, D)
    mid_c, mid_d = (hi_c + lo_c) / 2, (hi_d + lo_d) / 2
    step_c, step_d = (hi_c - lo_c) / 2, (hi_d - lo_d) / 2
    u_c = (u(hi_c, dg) - u(lo_c, dg)) / (hi_c - lo_c)
    u_d = (u(cg, hi_d) - u(cg, lo_d)) / (hi_d - lo_d)
    u_cc = (u(hi_c, dg) - 2 * u(mid_c, dg) + u(lo_c, dg)) / step_c**2
    u_dd = (u(cg, hi_d) - 2 * u(cg, mid_d) + u(cg, lo_d)) / step_d**2
    u_cd = (u(hi_c, hi_d) - u(hi_c, lo_d) - u(lo_c, hi_d) + u(lo_c, lo_d)) / ((hi_c - lo_c) * (hi_d - lo_d))

    def report(name, viol):
        # viol > 0 means violated; scale-free magnitudes are left to the caller
        viol = np.where(np.isfinite(viol), viol, np.inf)
        i = np.unravel_index(int(np.argmax(viol)), viol.shape)
        worst = float(viol[i])
        ok = worst <= tol
        return AssumptionCheck(name, ok, worst if worst > 0 else 0.0, None if ok else (float(cg[i]), float(dg[i])))

    mono = np.maximum(-u_c * hc, -u_d * hd)
    # concavity: non-positive diagonal and non-negative Hessian determinant, scaled to
    # utility units over one finite-difference step
    det = u_cc * u_dd - u_cd**2
    a1 = np.maximum.reduce([u_cc * hc**2, u_dd * hd**2, -det * hc**2 * hd**2])
    # A2: u_c must not decrease along d
    a2 = -(np.diff(u_c, axis=1)) * hc
    a2 = np.pad(a2, ((0, 0), (0, 1)))

    a3 = np.full(cg.shape, -np.inf)
    for alpha in alphas:
        ad = alpha * dg
        ok = ad + hd <= D
        lo, hi = np.maximum(ad - hd, 0), np.minimum(ad + hd, D)
        with np.errstate(invalid="ignore"):
            u_d_alpha = (u(cg, hi) - u(cg, lo)) / (hi - lo)
        gap = (u_d_alpha - u_d / alpha) * hd
        a3 = np.maximum(a3, np.where(ok, gap, -np.inf))
    a3 = np.where(np.isfinite(a3), a3, -1.0)

    return {
        "monotone": report("monotone", mono),
        "A1": report("A1", a1),
        "A2": report("A2", a2),
        "A3": report("A3", a3),
    }
