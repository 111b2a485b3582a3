import json
import os

import pytest

from sio_lab.generators import GeneratorSpec
from sio_lab.kernels import KernelSpec
from sio_lab.suite import (SuiteConfig, emit_report, geometric_grid,
                           parse_eps_grid, run_convergence_suite,
                           trace_csv_lines)

RIESZ = KernelSpec(family="coordinate_riesz", s=1.0, i=1, n=1)


def small_config(**kw):
    defaults = dict(
        generator=GeneratorSpec(family="four_corner_cantor", level=3),
        kernel=RIESZ, s=1.0, lam=5, depth=2, n_balls=3,
        eps_start=0.5, eps_ratio=0.5, eps_count=6, n_cancellation=2,
        levels_back=1, seed=0, workers=1)
    defaults.update(kw)
    return SuiteConfig(**defaults)


def test_parse_eps_grid():
    assert parse_eps_grid("geometric:start=0.5,ratio=0.5,count=3") \
        == (0.5, 0.25, 0.125)
    assert parse_eps_grid("0.4,0.2") == (0.4, 0.2)
    assert geometric_grid(1.0, 0.5, 2) == (1.0, 0.5)


def test_suite_smoke_all_checks_pass():
    report = run_convergence_suite(small_config())
    assert report.all_ok
    assert report.n_atoms == 64
    assert report.c_certified <= 1.0
    assert len(report.trace.values) == 6
    assert all(c["ok"] for c in report.cancellation)
    assert report.annuli_ok
    assert report.log_boundary["ok"]
    assert len(report.boundedness) == 2  # levels 2 and 3


def test_emit_report_files(tmp_path):
    report = run_convergence_suite(small_config())
    written = emit_report(report, str(tmp_path))
    csv_path, json_path = written
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "epsilon,pairing,cauchy_diff,four_term_bound"
    assert len(lines) == 1 + 6
    assert lines[-1].endswith(",,")  # no consecutive pair after the last eps
    summary = json.load(open(json_path))
    assert summary["all_ok"] is True
    assert os.path.exists(os.path.join(str(tmp_path), "run_meta.json"))


def test_emit_byte_stable_across_runs(tmp_path):
    cfg = small_config()
    paths = []
    for run in ("a", "b"):
        report = run_convergence_suite(cfg)
        out = tmp_path / run
        emit_report(report, str(out))
        paths.append(out)
    for name in ("trace.csv", "summary.json"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes()


def test_workers_do_not_change_outputs(tmp_path):
    rep1 = run_convergence_suite(small_config(workers=1))
    rep8 = run_convergence_suite(small_config(workers=8))
    emit_report(rep1, str(tmp_path / "w1"))
    emit_report(rep8, str(tmp_path / "w8"))
    for name in ("trace.csv", "summary.json"):
        assert (tmp_path / "w1" / name).read_bytes() \
            == (tmp_path / "w8" / name).read_bytes()
