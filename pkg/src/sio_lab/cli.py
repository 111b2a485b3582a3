"""Command-line entry point: sio-lab <subcommand>.

Subcommands: generate, check-growth, check-kernel, good-radii, pairing,
converge, report. A JSON config file (--config) may supply any flag value;
explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from .generators import GeneratorSpec, generate
from .good_radii import (GoodSetParams, interval_set_to_file, is_good_radius,
                         materialize_good_set, select_good_radius_near)
from .kernels import KernelSpec, check_antisymmetry, check_size_bound
from .measure import (growth_constant, load_measure, measure_to_json,
                      normalize, radial_pushforward, save_measure)
from .operator import simple_function_from_json
from .suite import (SuiteConfig, compute_pairing_trace, emit_report,
                    parse_eps_grid, run_convergence_suite, trace_csv_lines)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file supplying defaults for flags")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")


def _apply_config(args: argparse.Namespace,
                  parser: argparse.ArgumentParser) -> argparse.Namespace:
    """File values fill in flags the user left at their defaults."""
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        file_vals = json.load(fh)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, val in file_vals.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) == defaults.get(dest):
            setattr(args, dest, val)
    return args


def _kernel_from_args(args) -> KernelSpec:
    if args.kernel == "riesz":
        return KernelSpec(family="coordinate_riesz", s=args.s,
                          i=args.riesz_i, n=args.riesz_n)
    if args.kernel == "custom":
        if not args.kernel_file:
            raise SystemExit("--kernel custom requires --kernel-file")
        with open(args.kernel_file) as fh:
            expr = fh.read().strip()
        return KernelSpec(family="generic_antisymmetrized", s=args.s,
                          base=expr)
    raise SystemExit(f"unknown kernel {args.kernel!r}")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="riesz", choices=["riesz", "custom"])
    p.add_argument("--riesz-i", type=int, default=1)
    p.add_argument("--riesz-n", type=int, default=1)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--kernel-file")


def cmd_generate(args) -> int:
    spec = GeneratorSpec(family=args.family, level=args.level,
                         ratio=args.ratio, count=args.count, seed=args.seed)
    cloud, m, r_min = generate(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, args.out)
    save_measure(m, path)
    print(f"wrote {path}: {m.n_atoms} atoms, diameter {cloud.diameter!r}, "
          f"r_min {r_min!r}")
    return 0


def cmd_check_growth(args) -> int:
    m, _ = normalize(load_measure(args.measure))
    c_mu, (atom, radius) = growth_constant(m, args.s, args.r_min)
    print(f"c_mu = {c_mu!r} (s = {args.s}, r_min = {args.r_min}), "
          f"witness atom {atom} at radius {radius!r}")
    return 0


def cmd_check_kernel(args) -> int:
    m = load_measure(args.measure)
    k = _kernel_from_args(args)
    anti = check_antisymmetry(k, m.cloud)
    c, pair = check_size_bound(k, m.cloud, args.s)
    print(f"antisymmetry: {'ok' if anti.ok else 'FAIL'} "
          f"(worst residual {anti.worst_residual!r} at {anti.worst_pair})")
    print(f"size bound: |k| <= {c!r} * d^-{args.s}, witness pair {pair}")
    return 0 if anti.ok else 1


def cmd_good_radii(args) -> int:
    m, _ = normalize(load_measure(args.measure))
    mu_z = radial_pushforward(m, args.center)
    params = GoodSetParams(lam=args.lam, depth=args.depth,
                           budget=args.budget)
    if args.materialize:
        iset = materialize_good_set(mu_z, params)
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, args.materialize)
        interval_set_to_file(iset, path)
        print(f"wrote {path}: {iset.n_intervals} intervals, total length "
              f"{iset.total_length} (bound {params.length * params.lower_bound})")
        return 0
    if args.test is not None:
        res = is_good_radius(mu_z, Fraction(args.test), params)
        if res.ok:
            print(f"t = {args.test} is a good radius "
                  f"(lambda={args.lam}, depth={args.depth})")
            for n, j, mass, clr in res.witnesses:
                print(f"  generation {n}: cell {j}, mass {mass}, "
                      f"clearance {clr}")
            return 0
        print(f"t = {args.test} rejected at generation {res.generation}: "
              f"{res.reason}")
        return 1
    if args.near is not None:
        t = select_good_radius_near(mu_z, Fraction(args.near), params)
        print(f"{t} (= {float(t)!r})")
        return 0
    raise SystemExit("choose one of --materialize / --test / --near")


def cmd_pairing(args) -> int:
    m, _ = normalize(load_measure(args.measure))
    k = _kernel_from_args(args)
    with open(args.f) as fh:
        f = simple_function_from_json(json.load(fh))
    with open(args.g) as fh:
        g = simple_function_from_json(json.load(fh))
    grid = parse_eps_grid(args.eps_grid)
    trace = compute_pairing_trace(k, m, f, g, grid, workers=args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, args.out)
    with open(path, "w") as fh:
        fh.write("\n".join(trace_csv_lines(trace)) + "\n")
    print(f"wrote {path} ({len(grid)} epsilon values)")
    return 0


def cmd_converge(args) -> int:
    gen = GeneratorSpec(family=args.family, level=args.level,
                        ratio=args.ratio, count=args.count, seed=args.seed)
    cfg = SuiteConfig(generator=gen, kernel=_kernel_from_args(args),
                      s=args.s, lam=args.lam, depth=args.depth,
                      n_balls=args.balls, eps_start=args.eps_start,
                      eps_ratio=args.eps_ratio, eps_count=args.eps_count,
                      levels_back=args.levels_back, seed=args.seed,
                      workers=args.threads)
    report = run_convergence_suite(cfg)
    written = emit_report(report, args.out_dir)
    verdict = "all checks passed" if report.all_ok else "CHECKS FAILED"
    print(f"{verdict}; wrote {', '.join(written)}")
    return 0 if report.all_ok else 1


def cmd_report(args) -> int:
    with open(args.summary) as fh:
        summary = json.load(fh)
    checks = summary.get("checks", [])
    for c in checks:
        print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']}  "
              f"lhs={c['lhs']!r}  rhs={c['rhs']!r}")
    n_ok = sum(1 for c in checks if c["ok"])
    print(f"{n_ok}/{len(checks)} checks passed")
    return 0 if n_ok == len(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="sio-lab",
        description="truncated singular integrals on point clouds: "
                    "good radii, pairings, convergence diagnostics")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a test measure")
    _add_common(p)
    p.add_argument("--family", default="four_corner_cantor")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--ratio", type=float, default=0.25)
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--out", default="measure.json")
    p.set_defaults(func=cmd_generate, parser=p)

    p = sub.add_parser("check-growth", help="certify the growth constant")
    _add_common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--r-min", type=float, required=True)
    p.set_defaults(func=cmd_check_growth, parser=p)

    p = sub.add_parser("check-kernel", help="certify kernel bounds")
    _add_common(p)
    p.add_argument("--measure", required=True)
    _add_kernel_flags(p)
    p.set_defaults(func=cmd_check_kernel, parser=p)

    p = sub.add_parser("good-radii", help="good-radius queries for one center")
    _add_common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--center", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=int, default=5)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--budget", type=int, default=10 ** 6)
    p.add_argument("--materialize", metavar="OUT_JSON")
    p.add_argument("--test", metavar="T")
    p.add_argument("--near", metavar="TARGET")
    p.set_defaults(func=cmd_good_radii, parser=p)

    p = sub.add_parser("pairing", help="pairing trace along an eps grid")
    _add_common(p)
    p.add_argument("--measure", required=True)
    _add_kernel_flags(p)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--eps-grid", default="geometric:start=0.5,ratio=0.5,count=20")
    p.add_argument("--out", default="trace.csv")
    p.set_defaults(func=cmd_pairing, parser=p)

    p = sub.add_parser("converge", help="full convergence suite")
    _add_common(p)
    p.add_argument("--family", default="four_corner_cantor")
    p.add_argument("--level", type=int, default=4)
    p.add_argument("--ratio", type=float, default=0.25)
    p.add_argument("--count", type=int, default=64)
    _add_kernel_flags(p)
    p.add_argument("--lambda", dest="lam", type=int, default=5)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--balls", type=int, default=5)
    p.add_argument("--eps-start", type=float, default=0.5)
    p.add_argument("--eps-ratio", type=float, default=0.5)
    p.add_argument("--eps-count", type=int, default=12)
    p.add_argument("--levels-back", type=int, default=2)
    p.set_defaults(func=cmd_converge, parser=p)

    p = sub.add_parser("report", help="print a saved summary's verdicts")
    _add_common(p)
    p.add_argument("--summary", required=True)
    p.set_defaults(func=cmd_report, parser=p)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, args.parser)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
