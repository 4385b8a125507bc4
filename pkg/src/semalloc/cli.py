"""Command-line entry point: ``semalloc <subcommand>`` or ``python -m semalloc``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .harness import ALGORITHMS, ExperimentSpec, emit_csv, load_spec, run, solve_algorithm
from .netmodel import validate_assignment
from .oracle import oracle_check
from .scenario import GenConfig, ScenarioVersionError, generate, load, save, to_dict
from .utilmodel import validate_assumptions


def _scenario(args):
    if args.scenario:
        return load(args.scenario)
    return generate(GenConfig(seed=args.seed, num_bs=args.num_bs, num_wd=args.num_wd))


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    base = GenConfig.from_dict(json.loads(Path(args.config).read_text())) if args.config else GenConfig()
    s = generate(base.replace(seed=args.seed, num_bs=args.num_bs, num_wd=args.num_wd))
    if args.out:
        save(s, args.out)
    else:
        _write(json.dumps(to_dict(s), indent=2) + "\n", None)
    return 0


def cmd_solve(args) -> int:
    s = _scenario(args)
    a = solve_algorithm(args.algorithm, s, args.utility, args.allocator)
    bad = validate_assignment(a, s)
    served = sum(1 for sch in a.schedules if sch.utility > 0)
    print(f"algorithm {args.algorithm}  utility {args.utility}  M={s.num_bs} N={s.num_wd}")
    print(f"total utility {a.total_utility:.6g}" +
          (f"  (all-associated bound {a.upper_bound:.6g})" if a.upper_bound is not None else ""))
    print(f"served WDs {served}/{s.num_wd}")
    for m in range(s.num_bs):
        members = a.members(m)
        used = sum(a.allocation[n] for n in members)
        print(f"  BS {m}: {len(members)} WDs, {used}/{s.base_stations[m].rb_count} RBs, utility {a.bs_utility(m):.6g}")
    print(f"constraint violations {len(bad)}")
    if args.out:
        Path(args.out).write_text(json.dumps({
            "association": a.association,
            "allocation": a.allocation,
            "schedules": [dataclasses.asdict(x) for x in a.schedules],
            "total_utility": a.total_utility,
            "upper_bound": a.upper_bound,
        }, indent=2) + "\n")
    return 1 if (bad and args.strict) else 0


def cmd_experiment(args) -> int:
    spec = load_spec(args.spec) if args.spec else ExperimentSpec()
    changes = {}
    if args.seeds is not None:
        changes["seeds"] = args.seeds
    if args.utility is not None:
        changes["utility"] = args.utility
    if args.allocator is not None:
        changes["allocator"] = args.allocator
    if args.seed is not None:
        changes["base"] = spec.base.replace(seed=args.seed)
    if args.no_timing:
        changes["timing"] = False
    spec = dataclasses.replace(spec, **changes)
    result = run(spec)
    meta = emit_csv(result, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out} (metadata {meta})")
    for v in spec.points:
        means = ", ".join(f"{alg} {result.mean_total(alg, v):.4g}" for alg in spec.algorithms
                          if _has(result, alg, v))
        label = f"{spec.sweep_axis}={v}" if spec.sweep_axis != "none" else "mean TOTAL"
        print(f"  {label}: {means}")
    if result.errors or result.violations:
        print(f"{len(result.errors)} error rows, {len(result.violations)} runs with violations", file=sys.stderr)
        return 1 if args.strict else 0
    return 0


def _has(result, alg, v) -> bool:
    try:
        result.mean_total(alg, v)
        return True
    except KeyError:
        return False


def cmd_oracle_check(args) -> int:
    checks = oracle_check(range(args.seed, args.seed + args.count), args.utility, args.allocator)
    failed = 0
    for c in checks:
        ok = c.ratio >= args.threshold and c.violations == 0
        failed += not ok
        print(f"seed {c.seed:4d}  proposed {c.proposed:.6f}  optimum {c.optimum:.6f}  "
              f"ratio {c.ratio:.4f}  {'ok' if ok else 'BELOW'}")
    print(f"{len(checks) - failed}/{len(checks)} instances at >= {args.threshold} of the optimum")
    return 1 if (failed and args.strict) else 0


def cmd_validate(args) -> int:
    s = _scenario(args)
    tally: dict[str, list] = {}
    for n, wd in enumerate(s.devices):
        for name, chk in validate_assumptions(wd.app_params, args.utility).items():
            tally.setdefault(name, []).append((n, chk))
    failed = False
    for name, rows in tally.items():
        bad = [(n, c) for n, c in rows if not c.passed]
        failed |= bool(bad)
        line = f"{name:9s} holds for {len(rows) - len(bad)}/{len(rows)} WDs"
        if bad:
            n, worst = max(bad, key=lambda t: t[1].worst_violation)
            line += f"; worst WD {n}: {worst.worst_violation:.3g} at (c, d) = {worst.location}"
        print(line)
    return 1 if (failed and args.strict) else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semalloc", description="Multi-cell association and resource allocation "
                                "for adaptive semantic communication.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, utility_default="concave", seed_default=0):
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--utility", choices=("concave", "general"), default=utility_default)
        sp.add_argument("--allocator", choices=("greedy", "dp"), default=None,
                        help="RB allocator (default: greedy for concave, dp for general)")
        sp.add_argument("--strict", action="store_true", help="nonzero exit on any failure")

    def scenario_args(sp):
        sp.add_argument("scenario", nargs="?", help="scenario file (default: generate from --seed)")
        sp.add_argument("--num-bs", type=int, default=5)
        sp.add_argument("--num-wd", type=int, default=30)

    g = sub.add_parser("gen", help="write a scenario file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--num-bs", type=int, default=5)
    g.add_argument("--num-wd", type=int, default=30)
    g.add_argument("--config", help="JSON file with generator overrides")
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one scenario with one algorithm")
    scenario_args(s)
    common(s)
    s.add_argument("--algorithm", choices=ALGORITHMS, default="Prop")
    s.add_argument("--out", help="write the assignment as JSON")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run an experiment spec and write CSV")
    e.add_argument("spec", nargs="?", help="experiment spec file (default: all algorithms, default scenario)")
    common(e, utility_default=None, seed_default=None)
    e.add_argument("--seeds", type=int, help="number of replicates")
    e.add_argument("--no-timing", action="store_true", help="leave wall_ms empty (byte-stable output)")
    e.add_argument("--out", required=True, help="CSV path; metadata goes next to it")
    e.set_defaults(func=cmd_experiment)

    o = sub.add_parser("oracle-check", help="compare against the exhaustive optimum on tiny instances")
    common(o)
    o.add_argument("--count", type=int, default=20)
    o.add_argument("--threshold", type=float, default=0.95)
    o.set_defaults(func=cmd_oracle_check)

    v = sub.add_parser("validate", help="check the utility-model assumptions for every WD of a scenario")
    scenario_args(v)
    common(v)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ScenarioVersionError, ValueError) as exc:
        print(f"semalloc: error: {exc}", file=sys.stderr)
        return 2
