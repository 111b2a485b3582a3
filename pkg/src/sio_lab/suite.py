"""End-to-end convergence suites: generate a measure, certify growth and
kernel bounds, select good radii, and verify every estimate in the
truncation-difference argument on a decreasing eps grid.

Outputs are byte-stable: data files carry no timestamps (run metadata goes to
a sidecar), floats are serialized via repr, and all reductions are
deterministic for any worker count.
"""

from __future__ import annotations

import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CertificationError, InputError
from .generators import GeneratorSpec, generate
from .good_radii import GoodSetParams, is_good_radius, select_good_radius_near
from .kernels import KernelSpec, check_antisymmetry, check_size_bound
from .measure import (DiscreteMeasure, growth_constant, normalize,
                      radial_pushforward)
from .operator import (Ball, PairingTrace, SimpleFunction,
                       annuli_log_bound_check, cancellation_residual,
                       compute_pairing_trace, log_boundary_sum,
                       shell_mass_check, total_boundary_integral)

TRACE_COLUMNS = ("epsilon", "pairing", "cauchy_diff", "four_term_bound")


@dataclass(frozen=True)
class SuiteConfig:
    generator: GeneratorSpec
    kernel: KernelSpec
    s: float = 1.0
    lam: int = 5
    depth: int = 3
    n_balls: int = 5
    eps_start: float = 0.5
    eps_ratio: float = 0.5
    eps_count: int = 12
    n_cancellation: int = 4
    levels_back: int = 2   # boundedness trend over levels m-levels_back..m
    seed: int = 0
    workers: int = 1

    def eps_grid(self) -> tuple[float, ...]:
        return geometric_grid(self.eps_start, self.eps_ratio, self.eps_count)


def geometric_grid(start: float, ratio: float, count: int
                   ) -> tuple[float, ...]:
    if start <= 0.0 or not 0.0 < ratio < 1.0 or count < 1:
        raise InputError("need start > 0, 0 < ratio < 1, count >= 1")
    return tuple(start * ratio ** j for j in range(count))


def parse_eps_grid(text: str) -> tuple[float, ...]:
    """"geometric:start=0.5,ratio=0.5,count=20" or a comma list of floats."""
    if text.startswith("geometric:"):
        kv = dict(part.split("=") for part in text[len("geometric:"):].split(","))
        return geometric_grid(float(kv["start"]), float(kv["ratio"]),
                              int(kv["count"]))
    return tuple(float(x) for x in text.split(","))


@dataclass(frozen=True)
class BallRecord:
    center: int
    target: float
    radius: tuple[int, int]          # exact rational (num, den)
    cert_depth: int
    shells: tuple[dict, ...]         # per-generation mass vs threshold
    shell_tail_sum: float


@dataclass(frozen=True)
class ConvergenceReport:
    config: SuiteConfig
    n_atoms: int
    r_min: float
    c_mu: float
    growth_witness: tuple[int, float]
    c_certified: float
    kernel_witness: tuple[int, int]
    antisymmetry_ok: bool
    balls: tuple[BallRecord, ...]
    f_terms: tuple[tuple[float, int, float], ...]   # (coeff, center, radius)
    g_terms: tuple[tuple[float, int, float], ...]
    trace: PairingTrace
    cancellation: tuple[dict, ...]
    annuli_ok: bool
    annuli_worst: dict
    log_boundary: dict
    boundedness: tuple[dict, ...]
    checks: tuple[dict, ...]

    @property
    def all_ok(self) -> bool:
        return all(c["ok"] for c in self.checks)


def _check(checks: list, name: str, lhs, rhs, ok: bool) -> None:
    checks.append({"name": name, "lhs": lhs, "rhs": rhs, "ok": bool(ok)})
    if not ok:
        raise CertificationError(f"{name}: lhs={lhs!r} rhs={rhs!r}",
                                 witness={"name": name, "lhs": lhs, "rhs": rhs})


def certify_ball(m: DiscreteMeasure, center: int, target: float,
                 params: GoodSetParams) -> tuple[Ball, BallRecord]:
    """Pushforward at the center, nearest certified radius, shell masses."""
    mu_z = radial_pushforward(m, center)
    r = select_good_radius_near(mu_z, Fraction(target), params)
    cert = is_good_radius(mu_z, r, params)
    if not cert.ok:
        raise CertificationError(
            f"selected radius failed certification at center {center}",
            witness=cert)
    shells = shell_mass_check(m, center, r, cert)
    if not shells.all_ok:
        raise CertificationError(
            f"shell mass bound failed at center {center}", witness=shells)
    rec = BallRecord(
        center=center, target=float(target),
        radius=(r.numerator, r.denominator), cert_depth=cert.depth,
        shells=tuple({"n": s.n,
                      "mass": [s.mass.numerator, s.mass.denominator],
                      "threshold": [s.threshold.numerator,
                                    s.threshold.denominator],
                      "ok": s.ok} for s in shells.records),
        shell_tail_sum=shells.tail_sum)
    return Ball(center=center, radius=float(r)), rec


def run_convergence_suite(config: SuiteConfig) -> ConvergenceReport:
    """Full pipeline; any failed certification aborts with its witness."""
    cloud, m, r_min = generate(config.generator)
    m, _ = normalize(m)
    checks: list[dict] = []

    c_mu, growth_witness = growth_constant(m, config.s, r_min)
    _check(checks, "growth_constant_finite", c_mu, None,
           np.isfinite(c_mu) and c_mu > 0.0)

    anti = check_antisymmetry(config.kernel, cloud)
    _check(checks, "kernel_antisymmetry", anti.worst_residual,
           1e-13 * max(anti.scale, 1e-300), anti.ok)
    c_cert, kernel_witness = check_size_bound(config.kernel, cloud, config.s)
    _check(checks, "kernel_size_bound_finite", c_cert, None,
           np.isfinite(c_cert))

    params = GoodSetParams(lam=config.lam, depth=config.depth)
    rng = np.random.default_rng(config.seed)
    balls: list[Ball] = []
    records: list[BallRecord] = []
    centers = rng.integers(0, m.n_atoms, size=config.n_balls)
    targets = 0.2 + 0.6 * rng.random(config.n_balls)
    for z, target in zip(centers.tolist(), targets.tolist()):
        ball, rec = certify_ball(m, int(z), float(target), params)
        balls.append(ball)
        records.append(rec)
        _check(checks, f"good_radius_center_{z}",
               [rec.radius[0], rec.radius[1]], None, True)

    half = max(1, len(balls) // 2)
    f_coeffs = (rng.random(half) * 2.0 - 1.0).tolist()
    g_coeffs = (rng.random(len(balls) - half) * 2.0 - 1.0).tolist()
    f = SimpleFunction(terms=tuple((c, b) for c, b
                                   in zip(f_coeffs, balls[:half])))
    g = SimpleFunction(terms=tuple((c, b) for c, b
                                   in zip(g_coeffs, balls[half:])))

    trace = compute_pairing_trace(config.kernel, m, f, g, config.eps_grid(),
                                  workers=config.workers)
    for j, (d, bnd) in enumerate(zip(trace.cauchy_diffs, trace.bound_values)):
        _check(checks, f"cauchy_bound_step_{j}", d, bnd, d <= bnd)

    cancellation = []
    for j in range(config.n_cancellation):
        b1 = balls[j % len(balls)]
        b2 = balls[(j + 1) % len(balls)]
        lo = float(0.01 + 0.4 * rng.random())
        hi = float(lo + 0.05 + 0.5 * rng.random())
        resid, scale = cancellation_residual(config.kernel, m, b1, b2, lo, hi)
        ok = abs(resid) <= 1e-13 * max(scale, 1e-300)
        cancellation.append({"balls": [b1.center, b2.center],
                             "delta": lo, "eps": hi,
                             "residual": resid, "scale": scale, "ok": ok})
        _check(checks, f"cancellation_{j}", abs(resid), 1e-13 * scale, ok)

    ann_records, _on_sphere = annuli_log_bound_check(
        config.kernel, m, balls[0], config.s, max(c_cert, 1e-300), c_mu)
    annuli_ok = all(r.ok for r in ann_records)
    worst = max(ann_records, key=lambda r: r.lhs - r.rhs)
    annuli_worst = {"atom": worst.atom, "lhs": worst.lhs, "rhs": worst.rhs,
                    "n_annuli": worst.n_annuli}
    _check(checks, "annuli_log_bound", annuli_worst["lhs"],
           annuli_worst["rhs"], annuli_ok)

    lb = log_boundary_sum(m, balls[0], config.lam)
    log_boundary = {"value": lb.value, "bound": lb.bound,
                    "core_mass": lb.core_mass, "n_shells": lb.n_shells,
                    "ok": lb.ok}
    _check(checks, "log_boundary_sum", lb.value, lb.bound, lb.ok)

    boundedness = _boundedness_trend(config, params, records[0].target)

    return ConvergenceReport(
        config=config, n_atoms=m.n_atoms, r_min=r_min, c_mu=c_mu,
        growth_witness=growth_witness, c_certified=c_cert,
        kernel_witness=kernel_witness, antisymmetry_ok=anti.ok,
        balls=tuple(records),
        f_terms=tuple((c, b.center, b.radius) for c, b in f.terms),
        g_terms=tuple((c, b.center, b.radius) for c, b in g.terms),
        trace=trace, cancellation=tuple(cancellation),
        annuli_ok=annuli_ok, annuli_worst=annuli_worst,
        log_boundary=log_boundary, boundedness=tuple(boundedness),
        checks=tuple(checks))


def _boundedness_trend(config: SuiteConfig, params: GoodSetParams,
                       target: float) -> list[dict]:
    """total_boundary_integral at a recertified radius across refinement
    levels; the same center atom (id 0, a fixed corner) exists at each."""
    gen = config.generator
    if gen.family == "uniform_random":
        return []
    out = []
    lo_level = max(1, gen.level - config.levels_back)
    for level in range(lo_level, gen.level + 1):
        spec = GeneratorSpec(family=gen.family, level=level, ratio=gen.ratio,
                             count=gen.count, seed=gen.seed, metric=gen.metric)
        _cloud, m_lev, _ = generate(spec)
        m_lev, _ = normalize(m_lev)
        mu_z = radial_pushforward(m_lev, 0)
        r = select_good_radius_near(mu_z, Fraction(target), params)
        cert = is_good_radius(mu_z, r, params)
        value = total_boundary_integral(config.kernel, m_lev,
                                        Ball(center=0, radius=float(r)))
        out.append({"level": level,
                    "radius": [r.numerator, r.denominator],
                    "cert_depth": cert.depth, "value": value})
    return out


# ---------------------------------------------------------------------------
# emission: byte-stable CSV + JSON, run metadata in a sidecar


def trace_csv_lines(trace: PairingTrace) -> list[str]:
    lines = [",".join(TRACE_COLUMNS)]
    for j, (e, v) in enumerate(zip(trace.eps_grid, trace.values)):
        d = repr(trace.cauchy_diffs[j]) if j < len(trace.cauchy_diffs) else ""
        b = repr(trace.bound_values[j]) if j < len(trace.bound_values) else ""
        lines.append(f"{e!r},{v!r},{d},{b}")
    return lines


def report_to_json(report: ConvergenceReport) -> dict:
    cfg = asdict(report.config)
    cfg["generator"] = asdict(report.config.generator)
    cfg["kernel"] = asdict(report.config.kernel)
    del cfg["workers"]  # execution detail; results are worker-independent
    return {
        "config": cfg,
        "n_atoms": report.n_atoms,
        "r_min": report.r_min,
        "c_mu": report.c_mu,
        "growth_witness": list(report.growth_witness),
        "c_certified": report.c_certified,
        "kernel_witness": list(report.kernel_witness),
        "antisymmetry_ok": report.antisymmetry_ok,
        "balls": [asdict(b) for b in report.balls],
        "f_terms": [list(t) for t in report.f_terms],
        "g_terms": [list(t) for t in report.g_terms],
        "trace": {"epsilon": list(report.trace.eps_grid),
                  "pairing": list(report.trace.values),
                  "cauchy_diff": list(report.trace.cauchy_diffs),
                  "four_term_bound": list(report.trace.bound_values)},
        "cancellation": list(report.cancellation),
        "annuli_ok": report.annuli_ok,
        "annuli_worst": report.annuli_worst,
        "log_boundary": report.log_boundary,
        "boundedness": list(report.boundedness),
        "checks": list(report.checks),
        "all_ok": report.all_ok,
    }


def emit_report(report: ConvergenceReport, out_dir: str,
                formats: tuple[str, ...] = ("csv", "json")) -> list[str]:
    """Write trace CSV and summary JSON (byte-stable) plus a metadata
    sidecar (the only file with timestamps); returns the data-file paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, "trace.csv")
        with open(path, "w") as fh:
            fh.write("\n".join(trace_csv_lines(report.trace)) + "\n")
        written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w") as fh:
            json.dump(report_to_json(report), fh, sort_keys=True, indent=1)
            fh.write("\n")
        written.append(path)
    meta = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "python": sys.version, "platform": platform.platform(),
            "numpy": np.__version__}
    with open(os.path.join(out_dir, "run_meta.json"), "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return written
