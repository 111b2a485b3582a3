"""Truncated singular integral operators and the proof-side estimates.

Everything here is a finite double sum over atom pairs. Determinism contract:
all reductions run over a fixed perfect binary tree in ascending-(id, id)
order, so results are bit-identical across runs and worker counts. Truncation
is strict (d > eps) and bands are open (delta < d < eps); pairs landing
exactly on eps are excluded, which discrete measures can realize.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError
from .good_radii import GoodRadiusCertificate
from .kernels import KernelSpec, kernel_rows
from .measure import DiscreteMeasure, StepMeasure, interval_mass, radial_pushforward
from .metric import PointCloud
from .sums import pairwise_sum


@dataclass(frozen=True)
class Ball:
    """Closed ball; the center must be an atom id."""

    center: int
    radius: float

    def members(self, cloud: PointCloud) -> np.ndarray:
        cloud.check_id(self.center)
        return cloud.distances_from(self.center) <= self.radius

    def interior(self, cloud: PointCloud) -> np.ndarray:
        return cloud.distances_from(self.center) < self.radius


@dataclass(frozen=True)
class SimpleFunction:
    """Finite linear combination of closed-ball indicators."""

    terms: tuple[tuple[float, Ball], ...]
    certificates: tuple[GoodRadiusCertificate, ...] | None = None

    def values(self, cloud: PointCloud) -> np.ndarray:
        out = np.zeros(cloud.n_points)
        for coeff, ball in self.terms:
            out += coeff * ball.members(cloud)
        return out


def indicator(ball: Ball) -> SimpleFunction:
    return SimpleFunction(terms=((1.0, ball),))


def simple_function_to_json(f: SimpleFunction) -> dict:
    return {"terms": [{"coeff": float(c), "center": int(b.center),
                       "radius": float(b.radius)} for c, b in f.terms]}


def simple_function_from_json(obj: dict) -> SimpleFunction:
    return SimpleFunction(terms=tuple(
        (float(t["coeff"]), Ball(center=int(t["center"]),
                                 radius=float(t["radius"])))
        for t in obj["terms"]))


def _fold_rows(a: np.ndarray) -> np.ndarray:
    """Per-row pairwise tree sum; bit-identical to pairwise_sum on each row."""
    n = a.shape[1]
    if n == 0:
        return np.zeros(a.shape[0])
    m = 1 << (n - 1).bit_length()
    if m != n:
        a = np.concatenate([a, np.zeros((a.shape[0], m - n))], axis=1)
    while a.shape[1] > 1:
        a = a[:, 0::2] + a[:, 1::2]
    return a[:, 0].copy()


def _truncated_rows(k: KernelSpec, m: DiscreteMeasure, fvals: np.ndarray,
                    rows: np.ndarray, eps: float) -> np.ndarray:
    """(T_eps(f mu))(x) for each x in rows: strict truncation d(x, y) > eps."""
    km = kernel_rows(k, m.cloud, rows)
    d = np.stack([m.cloud.distances_from(int(x)) for x in rows])
    terms = np.where(d > eps, km * (fvals * m.weights)[None, :], 0.0)
    return _fold_rows(terms)


def apply_truncated(k: KernelSpec, m: DiscreteMeasure, f: SimpleFunction,
                    x: int, eps: float) -> float:
    """Sum of k(x,y) f(y) w(y) over atoms with d(x,y) > eps (strict)."""
    if eps <= 0.0:
        raise InputError("eps must be positive")
    m.cloud.check_id(x)
    fvals = f.values(m.cloud)
    return float(_truncated_rows(k, m, fvals, np.asarray([x]), eps)[0])


def pairing(k: KernelSpec, m: DiscreteMeasure, f: SimpleFunction,
            g: SimpleFunction, eps: float, workers: int = 1) -> float:
    """<T_eps(f mu), g> against mu: the full truncated double sum.

    Equals sum over pairs with d(x,y) > eps of k(x,y) f(y) g(x) w(y) w(x).
    `workers` splits the outer rows; the reduction tree is fixed, so the
    result is bit-identical for any worker count.
    """
    if eps <= 0.0:
        raise InputError("eps must be positive")
    fvals = f.values(m.cloud)
    gvals = g.values(m.cloud)
    n = m.n_atoms
    chunks = _row_chunks(n, workers)
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda rows: _truncated_rows(k, m, fvals, rows, eps), chunks))
        inner = np.concatenate(parts)
    else:
        inner = _truncated_rows(k, m, fvals, np.arange(n), eps)
    return pairwise_sum(inner * gvals * m.weights)


def _row_chunks(n: int, workers: int) -> list[np.ndarray]:
    if workers <= 1 or n < 64:
        return [np.arange(n)]
    size = max(32, (n + workers - 1) // workers)
    return [np.arange(i, min(i + size, n)) for i in range(0, n, size)]


def pv_scan(k: KernelSpec, m: DiscreteMeasure, f: SimpleFunction, x: int,
            eps_grid) -> list[float]:
    """Truncated values along a decreasing eps grid (principal-value probe).

    For discrete measures the scan stabilizes once eps drops below the
    smallest positive distance from x.
    """
    grid = [float(e) for e in eps_grid]
    if any(e <= 0.0 for e in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
        raise InputError("eps grid must be positive and strictly decreasing")
    fvals = f.values(m.cloud)
    return [float(_truncated_rows(k, m, fvals, np.asarray([x]), e)[0])
            for e in grid]


def boundary_term(k: KernelSpec, m: DiscreteMeasure, ball: Ball,
                  delta: float, eps: float) -> float:
    """Double sum of |k(x,y)| w(x) w(y), x in B, y outside B, delta<d<eps."""
    if not 0.0 < delta < eps:
        raise InputError("need 0 < delta < eps")
    return _band_abs_sum(k, m, ball, delta, eps)


def total_boundary_integral(k: KernelSpec, m: DiscreteMeasure,
                            ball: Ball) -> float:
    """All pairs x in B, y outside B of |k(x,y)| w(x) w(y) (Eq.-finiteness
    probe; always finite on discrete measures, interesting across levels)."""
    return _band_abs_sum(k, m, ball, 0.0, math.inf)


def _band_abs_sum(k: KernelSpec, m: DiscreteMeasure, ball: Ball,
                  delta: float, eps: float) -> float:
    inside = ball.members(m.cloud)
    rows = np.nonzero(inside)[0]
    if rows.size == 0 or rows.size == m.n_atoms:
        return 0.0
    km = np.abs(kernel_rows(k, m.cloud, rows))
    d = np.stack([m.cloud.distances_from(int(x)) for x in rows])
    mask = (~inside)[None, :] & (d > delta) & (d < eps)
    terms = np.where(mask, km * m.weights[None, :], 0.0)
    return pairwise_sum(_fold_rows(terms) * m.weights[rows])


def cancellation_residual(k: KernelSpec, m: DiscreteMeasure, b1: Ball,
                          b2: Ball, delta: float, eps: float
                          ) -> tuple[float, float]:
    """Double sum of k(x,y) w(x) w(y) over (B1 cap B2)^2 in the open band.

    Canonical pair ordering: each unordered pair contributes
    k(x,y)w(x)w(y) + k(y,x)w(y)w(x), which cancels bit-exactly for
    antisymmetric kernels. Returns (residual, sum of term magnitudes).
    """
    if not 0.0 < delta < eps:
        raise InputError("need 0 < delta < eps")
    both = b1.members(m.cloud) & b2.members(m.cloud)
    rows = np.nonzero(both)[0]
    if rows.size < 2:
        return 0.0, 0.0
    km = kernel_rows(k, m.cloud, rows)[:, rows]
    d = np.stack([m.cloud.distances_from(int(x))[rows] for x in rows])
    ww = np.outer(m.weights[rows], m.weights[rows])
    band = (d > delta) & (d < eps)
    upper = np.triu(np.ones_like(band, dtype=bool), k=1)
    t_upper = np.where(band & upper, km * ww, 0.0)
    t_lower = np.where(band & upper, km.T * ww.T, 0.0)
    residual = pairwise_sum((t_upper + t_lower).ravel())
    scale = pairwise_sum(np.abs(t_upper).ravel()) \
        + pairwise_sum(np.abs(t_lower).ravel())
    return residual, scale


@dataclass(frozen=True)
class PairingDifferenceReport:
    lhs: float
    rhs: float
    per_ball_terms: dict
    scale: float
    ok: bool


def pairing_difference_bound(k: KernelSpec, m: DiscreteMeasure,
                             f: SimpleFunction, g: SimpleFunction,
                             delta: float, eps: float
                             ) -> PairingDifferenceReport:
    """|<T_eps f, g> - <T_delta f, g>| against the four-term boundary bound:
    sum_ij |a_i b_j| (boundary(B_i) + 2 boundary(S_j)) over the open band.
    """
    if not 0.0 < delta < eps:
        raise InputError("need 0 < delta < eps")
    lhs = abs(pairing(k, m, f, g, eps) - pairing(k, m, f, g, delta))
    per_ball: dict = {}
    for _, ball in f.terms + g.terms:
        key = (ball.center, ball.radius)
        if key not in per_ball:
            per_ball[key] = boundary_term(k, m, ball, delta, eps)
    rhs = 0.0
    for a_i, b_i in f.terms:
        for b_j, s_j in g.terms:
            rhs += abs(a_i * b_j) * (per_ball[(b_i.center, b_i.radius)]
                                     + 2.0 * per_ball[(s_j.center, s_j.radius)])
    scale = _pairing_scale(k, m, f, g, delta, eps)
    ok = lhs <= rhs + 1e-12 * scale
    if not ok:
        raise AssertionError(
            f"four-term bound violated: lhs={lhs!r} > rhs={rhs!r}")
    return PairingDifferenceReport(lhs=lhs, rhs=rhs, per_ball_terms=per_ball,
                                   scale=scale, ok=ok)


def _pairing_scale(k, m, f, g, delta, eps) -> float:
    fvals = np.abs(f.values(m.cloud))
    gvals = np.abs(g.values(m.cloud))
    rows = np.arange(m.n_atoms)
    km = np.abs(kernel_rows(k, m.cloud, rows))
    d = np.stack([m.cloud.distances_from(int(x)) for x in rows])
    mask = (d > delta) & (d <= eps)
    terms = np.where(mask, km * (fvals * m.weights)[None, :], 0.0)
    return pairwise_sum(_fold_rows(terms) * gvals * m.weights)


@dataclass(frozen=True)
class AnnulusRecord:
    atom: int
    gap: float       # radius - d(center, atom): inner distance to the sphere
    lhs: float       # integral of |k| over B(atom, 2) minus the ball
    n_annuli: int    # N(x) = floor(log2(3 / gap)) + 1
    rhs: float       # c * c_mu * 2^s * N(x)
    ok: bool


def annuli_log_bound_check(k: KernelSpec, m: DiscreteMeasure, ball: Ball,
                           s: float, c: float, c_mu: float
                           ) -> tuple[list[AnnulusRecord], list[int]]:
    """Per interior atom: dyadic-annuli bound on the outside |k| integral.

    d(x, boundary) is taken as the inner gap radius - d(center, x), which
    lower-bounds the distance to the complement. Atoms exactly on the sphere
    are excluded from the interior and returned separately.
    """
    dc = m.cloud.distances_from(ball.center)
    interior = np.nonzero(dc < ball.radius)[0]
    on_sphere = np.nonzero(dc == ball.radius)[0].tolist()
    if interior.size == 0:
        raise InputError("ball interior holds no atoms")
    outside = dc > ball.radius
    records = []
    for x in interior.tolist():
        gap = float(ball.radius - dc[x])
        d = m.cloud.distances_from(x)
        mask = outside & (d < 2.0)
        km = np.abs(kernel_rows(k, m.cloud, [x])[0])
        lhs = pairwise_sum(np.where(mask, km * m.weights, 0.0))
        n_x = int(math.floor(math.log2(3.0 / gap))) + 1
        rhs = c * c_mu * 2.0 ** s * n_x
        records.append(AnnulusRecord(atom=x, gap=gap, lhs=lhs, n_annuli=n_x,
                                     rhs=rhs, ok=lhs <= rhs))
    return records, on_sphere


@dataclass(frozen=True)
class ShellRecord:
    n: int
    mass: Fraction       # mu_z([r - lam^-3n, r + lam^-3n)), exact
    threshold: Fraction  # lam^-n
    ok: bool


@dataclass(frozen=True)
class ShellReport:
    records: tuple[ShellRecord, ...]
    tail_sum: float  # sum_{n<=depth} lam^-n * 3 (n+1) log(lam)

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.records)


def shell_mass_check(m: DiscreteMeasure, z: int, r, cert: GoodRadiusCertificate
                     ) -> ShellReport:
    """Exact shell masses of mu_z around a certified radius r.

    For each n <= depth: mu_z([r - lam^-3n, r + lam^-3n)) <= lam^-n. The
    certificate must be for r itself (I = [0,1], so the unpadded widths
    apply). Also reports the log-weighted tail sum of the shell bounds.
    """
    r = Fraction(r)
    if cert.t != r:
        raise InputError("certificate does not certify the given radius")
    mu_z = radial_pushforward(m, z)
    lam = cert.lam
    records = []
    for n in range(1, cert.depth + 1):
        w = Fraction(1, lam ** (3 * n))
        mass = interval_mass(mu_z, r - w, r + w, lo_closed=True,
                             hi_closed=False)
        thr = Fraction(1, lam ** n)
        records.append(ShellRecord(n=n, mass=mass, threshold=thr,
                                   ok=mass <= thr))
    tail = sum(lam ** (-n) * 3.0 * (n + 1) * math.log(lam)
               for n in range(1, cert.depth + 1))
    return ShellReport(records=tuple(records), tail_sum=tail)


@dataclass(frozen=True)
class LogBoundaryReport:
    value: float          # sum over interior atoms of w |log(gap)|
    bound: float          # shell-decomposed upper bound (exact shell masses)
    core_mass: float
    n_shells: int

    @property
    def ok(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.bound


def log_boundary_sum(m: DiscreteMeasure, ball: Ball, lam: int
                     ) -> LogBoundaryReport:
    """Integral of |log d(x, boundary)| over the ball interior, with the
    shell-decomposed upper bound: the core B(z, r - lam^-3) contributes
    3 log(lam) per unit mass, and the shell [r - lam^-3n, r - lam^-3(n+1))
    contributes 3 (n+1) log(lam) per unit mass. Shells extend past the
    certificate depth until they are empty, so the bound covers every atom.
    """
    dc = m.cloud.distances_from(ball.center)
    interior = np.nonzero((dc < ball.radius) & (m.weights > 0))[0]
    if interior.size == 0:
        raise InputError("ball interior holds no atoms")
    gaps = ball.radius - dc[interior]
    value = pairwise_sum(m.weights[interior] * np.abs(np.log(gaps)))

    mu_z = radial_pushforward(m, ball.center)
    r = Fraction(ball.radius)
    loglam = math.log(lam)
    core_mass = interval_mass(mu_z, Fraction(0), r - Fraction(1, lam ** 3),
                              lo_closed=True, hi_closed=False)
    bound = float(core_mass) * 3.0 * loglam
    n = 1
    while True:
        lo = r - Fraction(1, lam ** (3 * n))
        hi = r - Fraction(1, lam ** (3 * (n + 1)))
        shell_mass = interval_mass(mu_z, lo, hi, lo_closed=True,
                                   hi_closed=False)
        bound += float(shell_mass) * 3.0 * (n + 1) * loglam
        # remaining interior mass beyond this shell
        rest = interval_mass(mu_z, hi, r, lo_closed=True, hi_closed=False)
        if rest == 0:
            break
        n += 1
    return LogBoundaryReport(value=value, bound=bound,
                             core_mass=float(core_mass), n_shells=n)


@dataclass(frozen=True)
class PairingTrace:
    eps_grid: tuple[float, ...]
    values: tuple[float, ...]
    cauchy_diffs: tuple[float, ...]   # |value_j - value_{j+1}|
    bound_values: tuple[float, ...]   # four-term bound for each consecutive pair

    def __post_init__(self):
        for d, b in zip(self.cauchy_diffs, self.bound_values):
            if d > b + 1e-12 * max(1.0, abs(b)):
                raise AssertionError("Cauchy difference exceeds its bound")


def compute_pairing_trace(k: KernelSpec, m: DiscreteMeasure,
                          f: SimpleFunction, g: SimpleFunction, eps_grid,
                          workers: int = 1) -> PairingTrace:
    """Pairings along a decreasing eps grid with the four-term bound per
    consecutive pair (the proof's Cauchy estimate, testable exactly)."""
    grid = [float(e) for e in eps_grid]
    if any(e <= 0.0 for e in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
        raise InputError("eps grid must be positive and strictly decreasing")
    values = [pairing(k, m, f, g, e, workers=workers) for e in grid]
    diffs = []
    bounds = []
    for j in range(len(grid) - 1):
        rep = pairing_difference_bound(k, m, f, g, grid[j + 1], grid[j])
        diffs.append(abs(values[j] - values[j + 1]))
        bounds.append(rep.rhs + 1e-12 * rep.scale)
    return PairingTrace(eps_grid=tuple(grid), values=tuple(values),
                        cauchy_diffs=tuple(diffs), bound_values=tuple(bounds))
