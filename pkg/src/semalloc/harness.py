"""Seeded experiment runs: the proposed algorithm and the baselines over seeds and one sweep axis."""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .assoc import associate
from .baselines import BaselineConfig, BaselineKind, run_baseline
from .netmodel import Assignment, validate_assignment
from .scenario import GenConfig, Scenario, ScenarioVersionError, generate
from .utilmodel import UtilityKind
from .wdsched import UtilityTable, solve_tables

__all__ = [
    "ALGORITHMS",
    "SWEEP_FIELDS",
    "DEFAULT_SWEEPS",
    "CSV_HEADER",
    "ExperimentSpec",
    "ResultRow",
    "ExperimentResult",
    "TableCache",
    "solve_algorithm",
    "run",
    "emit_csv",
    "read_csv",
    "load_spec",
    "save_spec",
]

SPEC_SCHEMA = "semalloc.experiment"
SPEC_VERSION = 1

ALGORITHMS = ("Prop", *(k.value for k in BaselineKind))
SWEEP_FIELDS = {
    "none": None,
    "num_bs": "num_bs",
    "num_wd": "num_wd",
    "max_delay": "max_delay_s",
    "energy_budget": "energy_budget_j",
}
DEFAULT_SWEEPS = {
    "num_bs": (3, 4, 5, 6, 7, 8),
    "num_wd": (10, 20, 30, 40, 50),
    "max_delay": (5e-3, 10e-3, 15e-3, 20e-3),
    "energy_budget": (1e-3, 2e-3, 3e-3, 4e-3),
}
CSV_HEADER = ("sweep_axis", "sweep_value", "seed", "algorithm", "scope", "utility", "wall_ms")
_USES_TABLES = {"Prop", "ARB", "NUA"}


@dataclass(frozen=True)
class ExperimentSpec:
    base: GenConfig = GenConfig()
    utility: UtilityKind = UtilityKind.CONCAVE
    algorithms: tuple[str, ...] = ALGORITHMS
    seeds: int = 10
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    allocator: Optional[str] = None
    fsc_compute: str = "data"
    timing: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "utility", UtilityKind.parse(self.utility))
        if self.seeds < 1:
            raise ValueError("need at least one seed")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.sweep_axis not in SWEEP_FIELDS:
            raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
        if self.sweep_axis == "none":
            if self.sweep_values:
                raise ValueError("sweep values given without a sweep axis")
        elif not self.sweep_values:
            object.__setattr__(self, "sweep_values", DEFAULT_SWEEPS[self.sweep_axis])
        if self.allocator not in (None, "greedy", "dp"):
            raise ValueError(f"unknown allocator {self.allocator!r}")
        for v in self.sweep_values:
            self.config(v, 0)  # generator validity

    @property
    def points(self) -> tuple:
        return self.sweep_values if self.sweep_axis != "none" else ("",)

    def config(self, value, replicate: int) -> GenConfig:
        changes = {"seed": self.base.seed + replicate}
        name = SWEEP_FIELDS[self.sweep_axis]
        if name is not None:
            changes[name] = int(value) if name in ("num_bs", "num_wd") else float(value)
        return self.base.replace(**changes)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["base"] = self.base.to_dict()
        out["utility"] = self.utility.value
        out["algorithms"] = list(self.algorithms)
        out["sweep_values"] = list(self.sweep_values)
        return {"schema": SPEC_SCHEMA, "version": SPEC_VERSION, **out}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        if data.get("schema", SPEC_SCHEMA) != SPEC_SCHEMA:
            raise ScenarioVersionError(f"not an experiment spec: schema {data.get('schema')!r}")
        if data.get("version", SPEC_VERSION) != SPEC_VERSION:
            raise ScenarioVersionError(f"unsupported experiment spec version {data.get('version')!r}")
        kw = {k: v for k, v in data.items() if k not in ("schema", "version")}
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(kw) - names
        if extra:
            raise ValueError(f"unknown experiment spec fields {sorted(extra)}")
        if "base" in kw:
            kw["base"] = GenConfig.from_dict(kw["base"])
        for key in ("algorithms", "sweep_values"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)


def save_spec(spec: ExperimentSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


def load_spec(path) -> ExperimentSpec:
    return ExperimentSpec.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ResultRow:
    sweep_axis: str
    sweep_value: object
    seed: object  # int, or "mean" on aggregate rows
    algorithm: str
    scope: str    # BS index, "TOTAL", or "ERROR"
    utility: float
    wall_ms: Optional[float]

    def cells(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            return repr(float(v)) if isinstance(v, float) else str(v)
        return [fmt(getattr(self, f)) for f in CSV_HEADER]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[ResultRow] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)

    def data_rows(self) -> list[ResultRow]:
        return [r for r in self.rows if r.seed != "mean"]

    def mean_total(self, algorithm: str, sweep_value="") -> float:
        for r in self.rows:
            if (r.seed == "mean" and r.algorithm == algorithm and r.scope == "TOTAL"
                    and r.sweep_value == sweep_value):
                return r.utility
        raise KeyError((algorithm, sweep_value))


class TableCache:
    """Optimal-scheduling tables keyed by the (WD, link, RB count) content."""

    def __init__(self):
        self._store: dict = {}

    def __len__(self):
        return len(self._store)

    def tables(self, scenario: Scenario, kind: UtilityKind) -> list[list[UtilityTable]]:
        keys = [[(wd, scenario.link(n, m), bs.rb_count, kind)
                 for m, bs in enumerate(scenario.base_stations)] for n, wd in enumerate(scenario.devices)]
        missing = list(dict.fromkeys(k for row in keys for k in row if k not in self._store))
        if missing:
            for key, table in zip(missing, solve_tables([k[:3] for k in missing], kind)):
                self._store[key] = table
        return [[self._store[k] for k in row] for row in keys]


def solve_algorithm(algorithm: str, scenario: Scenario, kind=UtilityKind.CONCAVE, allocator: Optional[str] = None,
                    tables=None, baseline_cfg: BaselineConfig = BaselineConfig()) -> Assignment:
    """Run ``Prop`` (the three-stage algorithm) or one baseline on a scenario."""
    if algorithm == "Prop":
        return associate(scenario, kind, allocator, tables)
    return run_baseline(algorithm, scenario, kind, tables, allocator, baseline_cfg)


def _run_cell(spec: ExperimentSpec, value, replicate: int, cache: Optional[TableCache] = None):
    """Rows, errors and violations for one (sweep value, seed) cell."""
    cache = cache if cache is not None else TableCache()
    cfg = spec.config(value, replicate)
    rows, errors, violations = [], [], []

    def error(alg, exc):
        errors.append({"sweep_value": value, "seed": cfg.seed, "algorithm": alg, "error": repr(exc)})
        rows.append(ResultRow(spec.sweep_axis, value, cfg.seed, alg, "ERROR", math.nan, None))

    try:
        scenario = generate(cfg)
    except Exception as exc:  # noqa: BLE001 - recorded, never aborts the sweep
        for alg in spec.algorithms:
            error(alg, exc)
        return rows, errors, violations

    table_ms, tables = 0.0, None
    if _USES_TABLES & set(spec.algorithms):
        t0 = time.perf_counter()
        try:
            tables = cache.tables(scenario, spec.utility)
        except Exception as exc:  # noqa: BLE001
            for alg in spec.algorithms:
                error(alg, exc)
            return rows, errors, violations
        table_ms = (time.perf_counter() - t0) * 1e3

    bcfg = BaselineConfig(spec.fsc_compute)
    for alg in spec.algorithms:
        t0 = time.perf_counter()
        try:
            a = solve_algorithm(alg, scenario, spec.utility, spec.allocator, tables, bcfg)
        except Exception as exc:  # noqa: BLE001
            error(alg, exc)
            continue
        wall = (time.perf_counter() - t0) * 1e3 + (table_ms if alg in _USES_TABLES else 0.0)
        wall = wall if spec.timing else None
        bad = validate_assignment(a, scenario)
        if bad:
            violations.append({"sweep_value": value, "seed": cfg.seed, "algorithm": alg,
                               "violations": [dataclasses.asdict(v) for v in bad]})
        for m in range(scenario.num_bs):
            rows.append(ResultRow(spec.sweep_axis, value, cfg.seed, alg, str(m), a.bs_utility(m), wall))
        rows.append(ResultRow(spec.sweep_axis, value, cfg.seed, alg, "TOTAL", a.total_utility, wall))
    return rows, errors, violations


def _cell_job(args):
    return _run_cell(*args)


def _aggregate(spec: ExperimentSpec, rows: list[ResultRow]) -> list[ResultRow]:
    groups: dict = {}
    for r in rows:
        if r.scope != "ERROR":
            groups.setdefault((r.sweep_value, r.algorithm, r.scope), []).append(r)
    out = []
    for (value, alg, scope), rs in groups.items():
        walls = [r.wall_ms for r in rs if r.wall_ms is not None]
        wall = math.fsum(walls) / len(walls) if walls else None
        out.append(ResultRow(spec.sweep_axis, value, "mean", alg, scope,
                             math.fsum(r.utility for r in rs) / len(rs), wall))
    return out


def _sort_key(spec: ExperimentSpec):
    points = {v: i for i, v in enumerate(spec.points)}
    algs = {a: i for i, a in enumerate(spec.algorithms)}

    def scope_rank(s):
        return (0, int(s)) if s.isdigit() else (1, 0 if s == "TOTAL" else 1)

    def key(r: ResultRow):
        return (r.seed == "mean", points[r.sweep_value], -1 if r.seed == "mean" else r.seed,
                algs[r.algorithm], scope_rank(r.scope))
    return key


def run(spec: ExperimentSpec) -> ExperimentResult:
    """Every (sweep value, seed, algorithm) cell; failures become ERROR rows."""
    cells = [(spec, v, r) for v in spec.points for r in range(spec.seeds)]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            parts = list(pool.map(_cell_job, cells))
    else:
        cache = TableCache()  # shared across the sweep: same WD/link content recurs across M and N
        parts = [_run_cell(*c, cache) for c in cells]
    result = ExperimentResult(spec)
    for rows, errors, violations in parts:
        result.rows.extend(rows)
        result.errors.extend(errors)
        result.violations.extend(violations)
    result.rows.extend(_aggregate(spec, result.rows))
    result.rows.sort(key=_sort_key(spec))
    return result


def emit_csv(result: ExperimentResult, path) -> Path:
    """Write the CSV and a sibling ``.meta.json``; returns the metadata path."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow(r.cells())
    meta = path.with_suffix(".meta.json")
    meta.write_text(json.dumps({
        "library_version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "spec": result.spec.to_dict(),
        "errors": result.errors,
        "violations": result.violations,
    }, indent=2, default=str) + "\n")
    return meta


def read_csv(path) -> list[dict]:
    """Parse an emitted CSV back into dicts with numeric utility and wall_ms."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["utility"] = float(r["utility"])
        r["wall_ms"] = float(r["wall_ms"]) if r["wall_ms"] else None
    return rows
