"""Run the standard level-4 four-corner convergence suite and emit reports.

Usage: python scripts/run_m4_suite.py [out_dir] [workers]
"""

import sys

from sio_lab.generators import GeneratorSpec
from sio_lab.kernels import KernelSpec
from sio_lab.suite import SuiteConfig, emit_report, run_convergence_suite


def main() -> int:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "m4_suite_out"
    workers = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    cfg = SuiteConfig(
        generator=GeneratorSpec(family="four_corner_cantor", level=4),
        kernel=KernelSpec(family="coordinate_riesz", s=1.0, i=1, n=1),
        s=1.0, lam=5, depth=3, n_balls=5,
        eps_start=0.5, eps_ratio=0.5, eps_count=12,
        seed=0, workers=workers)
    report = run_convergence_suite(cfg)
    written = emit_report(report, out_dir)
    print(f"atoms: {report.n_atoms}, c_mu = {report.c_mu!r}, "
          f"c_certified = {report.c_certified!r}")
    for c in report.checks:
        print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']}")
    print("wrote:", ", ".join(written))
    return 0 if report.all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
