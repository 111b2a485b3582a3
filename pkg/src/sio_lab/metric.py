"""Finite metric spaces: point clouds with descriptor-driven distances.

Metrics are a closed enumeration (p-metrics, snowflakes of them, or an
explicit distance table) so that every experiment is serializable and
reproducible. Clouds are immutable; distances are pure functions of the
descriptor and the coordinates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetError, DegenerateInputError, InputError

EUCLIDEAN_P = "euclidean_p"
SNOWFLAKE = "snowflake"
CUSTOM_TABLE = "custom_table"


@dataclass(frozen=True)
class MetricDescriptor:
    """Which distance the cloud carries.

    family:
      - "euclidean_p": d_p metric with exponent p in [1, inf] (p=math.inf ok)
      - "snowflake":   (d_p)^alpha with 0 < alpha <= 1
      - "custom_table": explicit N x N distance matrix (escape hatch for
        arbitrary finite metric spaces)
    """

    family: str
    dimension: int
    p: float = 2.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in (EUCLIDEAN_P, SNOWFLAKE, CUSTOM_TABLE):
            raise InputError(f"unknown metric family {self.family!r}")
        if self.dimension < 1:
            raise InputError("dimension must be a positive integer")
        if self.family in (EUCLIDEAN_P, SNOWFLAKE):
            if not (self.p >= 1.0):
                raise InputError("p must satisfy p >= 1 (math.inf allowed)")
        if self.family == SNOWFLAKE and not (0.0 < self.alpha <= 1.0):
            raise InputError("snowflake exponent must lie in (0, 1]")


@dataclass(frozen=True)
class PointCloud:
    """Immutable finite metric space: coordinates plus a metric descriptor.

    Point ids are the row indices 0..N-1. `table` is only set for the
    custom_table family. The full distance matrix is cached lazily for
    clouds up to _DMAT_LIMIT points.
    """

    coords: np.ndarray
    metric: MetricDescriptor
    diameter: float
    table: np.ndarray | None = field(default=None, repr=False, compare=False)
    _dmat: list = field(default_factory=list, repr=False, compare=False)

    _DMAT_LIMIT = 5000

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def check_id(self, i: int) -> None:
        if not (0 <= int(i) < self.n_points):
            raise InputError(f"unknown point id {i} (cloud has {self.n_points})")

    def distances_from(self, i: int) -> np.ndarray:
        """Distance row d(i, .); bit-symmetric with distances_from(j)[i]."""
        self.check_id(i)
        return _distance_rows(self, np.asarray([i]))[0]

    def distance_matrix(self) -> np.ndarray:
        if not self._dmat:
            if self.n_points > self._DMAT_LIMIT:
                raise BudgetError(
                    f"distance matrix for {self.n_points} points exceeds the "
                    f"cache limit {self._DMAT_LIMIT}; use distances_from")
            self._dmat.append(_distance_rows(self, np.arange(self.n_points)))
        return self._dmat[0]


def _distance_rows(cloud: PointCloud, rows: np.ndarray) -> np.ndarray:
    md = cloud.metric
    if md.family == CUSTOM_TABLE:
        return cloud.table[rows]
    diff = np.abs(cloud.coords[rows, None, :] - cloud.coords[None, :, :])
    p = md.p
    if math.isinf(p):
        d = diff.max(axis=2)
    elif p == 2.0:
        d = np.sqrt((diff * diff).sum(axis=2))
    elif p == 1.0:
        d = diff.sum(axis=2)
    else:
        d = (diff ** p).sum(axis=2) ** (1.0 / p)
    if md.family == SNOWFLAKE:
        d = d ** md.alpha
    return d


def make_cloud(coords, metric: MetricDescriptor, table=None) -> PointCloud:
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != metric.dimension:
        raise InputError(
            f"coords must be (N, {metric.dimension}), got {coords.shape}")
    if metric.family == CUSTOM_TABLE:
        table = np.asarray(table, dtype=np.float64)
        n = coords.shape[0]
        if table.shape != (n, n):
            raise InputError("custom table must be N x N")
    cloud = PointCloud(coords=coords, metric=metric, diameter=0.0, table=table)
    diam = 0.0
    for start in range(0, cloud.n_points, 2048):
        rows = np.arange(start, min(start + 2048, cloud.n_points))
        diam = max(diam, float(_distance_rows(cloud, rows).max()))
    return replace(cloud, diameter=diam)


def distance(cloud: PointCloud, i: int, j: int) -> float:
    """d(i, j); canonical argument order makes it bit-exactly symmetric."""
    cloud.check_id(i)
    cloud.check_id(j)
    a, b = (i, j) if i <= j else (j, i)
    return float(cloud.distances_from(a)[b])


@dataclass(frozen=True)
class MetricReport:
    symmetry_ok: bool
    identity_ok: bool
    triangle_ok: bool
    worst_triple: tuple[int, int, int] | None
    worst_violation: float

    @property
    def all_ok(self) -> bool:
        return self.symmetry_ok and self.identity_ok and self.triangle_ok


def validate_metric(cloud: PointCloud, seed: int = 0,
                    sample_triples: int = 10 ** 6) -> MetricReport:
    """Check the metric axioms; exhaustive up to 1000 points, sampled above.

    Failures are reported, never raised: this guards user-supplied tables.
    """
    n = cloud.n_points
    if n == 0:
        raise DegenerateInputError("empty cloud")
    if n <= 1000:
        dmat = cloud.distance_matrix()
        symmetry_ok = bool(np.array_equal(dmat, dmat.T))
        identity_ok = bool(np.all(np.diag(dmat) == 0.0))
        if n > 1:
            mask = ~np.eye(n, dtype=bool)
            identity_ok = identity_ok and bool(np.all(dmat[mask] > 0.0))
        worst = 0.0
        worst_triple = None
        for y in range(n):
            viol = dmat - (dmat[:, y, None] + dmat[None, y, :])
            m = float(viol.max())
            if m > worst:
                worst = m
                x, z = np.unravel_index(int(viol.argmax()), viol.shape)
                worst_triple = (int(x), y, int(z))
        triangle_ok = worst <= 0.0
        return MetricReport(symmetry_ok, identity_ok, triangle_ok,
                            worst_triple, worst)
    rng = np.random.default_rng(seed)
    xs, ys, zs = rng.integers(0, n, size=(3, sample_triples))
    worst = 0.0
    worst_triple = None
    symmetry_ok = True
    identity_ok = True
    for x, y, z in zip(xs[:2000], ys[:2000], zs[:2000]):
        if distance(cloud, x, y) != distance(cloud, y, x):
            symmetry_ok = False
        if x != y and distance(cloud, x, y) == 0.0:
            identity_ok = False
    for start in range(0, sample_triples, 10 ** 5):
        sl = slice(start, start + 10 ** 5)
        dxz = _pair_distances(cloud, xs[sl], zs[sl])
        dxy = _pair_distances(cloud, xs[sl], ys[sl])
        dyz = _pair_distances(cloud, ys[sl], zs[sl])
        viol = dxz - (dxy + dyz)
        m = float(viol.max())
        if m > worst:
            worst = m
            k = start + int(viol.argmax())
            worst_triple = (int(xs[k]), int(ys[k]), int(zs[k]))
    return MetricReport(symmetry_ok, identity_ok, worst <= 0.0,
                        worst_triple, worst)


def _pair_distances(cloud: PointCloud, ii, jj) -> np.ndarray:
    md = cloud.metric
    if md.family == CUSTOM_TABLE:
        return cloud.table[ii, jj]
    diff = np.abs(cloud.coords[ii] - cloud.coords[jj])
    p = md.p
    if math.isinf(p):
        d = diff.max(axis=1)
    elif p == 2.0:
        d = np.sqrt((diff * diff).sum(axis=1))
    else:
        d = (diff ** p).sum(axis=1) ** (1.0 / p)
    if md.family == SNOWFLAKE:
        d = d ** md.alpha
    return d


def rescale_to_unit_diameter(cloud: PointCloud) -> tuple[PointCloud, float]:
    """Scale so the diameter becomes 1; returns the divisor applied to d."""
    if cloud.n_points < 2 or cloud.diameter <= 0.0:
        raise DegenerateInputError("need at least two distinct points")
    scale = cloud.diameter
    md = cloud.metric
    if md.family == CUSTOM_TABLE:
        new = make_cloud(cloud.coords, md, table=cloud.table / scale)
    elif md.family == SNOWFLAKE:
        # distances scale as (base distance)^alpha
        new = make_cloud(cloud.coords / scale ** (1.0 / md.alpha), md)
    else:
        new = make_cloud(cloud.coords / scale, md)
    new = replace(new, diameter=1.0)
    return new, scale


def cloud_to_json(cloud: PointCloud) -> dict:
    out = {
        "metric": {"family": cloud.metric.family,
                   "dimension": cloud.metric.dimension,
                   "p": "inf" if math.isinf(cloud.metric.p) else cloud.metric.p,
                   "alpha": cloud.metric.alpha},
        "points": [{"id": i, "coords": list(map(float, c))}
                   for i, c in enumerate(cloud.coords)],
    }
    if cloud.table is not None:
        out["distances"] = [list(map(float, row)) for row in cloud.table]
    return out


def cloud_from_json(obj: dict) -> PointCloud:
    m = obj["metric"]
    p = m.get("p", 2.0)
    if p in ("inf", "Infinity"):
        p = math.inf
    md = MetricDescriptor(family=m["family"], dimension=int(m["dimension"]),
                          p=float(p), alpha=float(m.get("alpha", 1.0)))
    pts = sorted(obj["points"], key=lambda q: q["id"])
    ids = [q["id"] for q in pts]
    if ids != list(range(len(ids))):
        raise InputError("point ids must be unique and contiguous from 0")
    coords = [q["coords"] for q in pts]
    return make_cloud(coords, md, table=obj.get("distances"))


def load_cloud(path: str) -> PointCloud:
    with open(path) as fh:
        return cloud_from_json(json.load(fh))


def save_cloud(cloud: PointCloud, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(cloud_to_json(cloud), fh, sort_keys=True)
