"""Discrete measures on point clouds and their radial pushforwards.

DiscreteMeasure lives in float64 on a cloud; StepMeasure is the exact-rational
atomic measure on the line that all multiscale interval arithmetic runs on.
Every float position or mass is lifted to the rational it denotes exactly, so
interval queries and the good-radius machinery never see round-off.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateInputError, InputError
from .metric import PointCloud, cloud_from_json, cloud_to_json, load_cloud
from .sums import pairwise_sum

# slack for float-derived totals: normalized weights can exceed 1 by ulps
TOTAL_MASS_SLACK = Fraction(1, 2 ** 40)


@dataclass(frozen=True)
class DiscreteMeasure:
    cloud: PointCloud
    weights: np.ndarray
    total_mass: float

    @property
    def n_atoms(self) -> int:
        return self.weights.size


def make_measure(cloud: PointCloud, weights) -> DiscreteMeasure:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (cloud.n_points,):
        raise InputError("weights must align with the cloud's points")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise InputError("weights must be finite and nonnegative")
    return DiscreteMeasure(cloud=cloud, weights=w,
                           total_mass=pairwise_sum(w))


def normalize(m: DiscreteMeasure) -> tuple[DiscreteMeasure, float]:
    """Scale to total mass 1; returns the divisor so callers can undo."""
    if m.total_mass <= 0.0:
        raise DegenerateInputError("cannot normalize the zero measure")
    scale = m.total_mass
    if scale == 1.0:
        return m, 1.0
    return make_measure(m.cloud, m.weights / scale), scale


def ball_mass(m: DiscreteMeasure, z: int, r: float) -> float:
    """Mass of the closed ball B(z, r)."""
    if r < 0.0:
        raise InputError("radius must be nonnegative")
    d = m.cloud.distances_from(z)
    return pairwise_sum(np.where(d <= r, m.weights, 0.0))


def growth_constant(m: DiscreteMeasure, s: float, r_min: float
                    ) -> tuple[float, tuple[int, float]]:
    """Smallest c with mu(B(x,r)) <= c r^s for all atoms x and all r >= r_min.

    Candidate radii are r_min and the pairwise distances >= r_min: ball mass
    is a right-continuous step function of r, so the ratio is maximized
    there. Ties break to the smallest point id, then the smallest radius.
    """
    if m.n_atoms == 0 or m.total_mass <= 0.0:
        raise DegenerateInputError("empty measure")
    if r_min <= 0.0:
        raise InputError("r_min must be positive")
    best = -1.0
    witness = (0, r_min)
    for x in range(m.n_atoms):
        d = m.cloud.distances_from(x)
        order = np.argsort(d, kind="stable")
        ds = d[order]
        cum = np.cumsum(m.weights[order])
        cand = np.unique(ds[ds >= r_min])
        if cand.size == 0 or cand[0] > r_min:
            cand = np.concatenate([[r_min], cand])
        masses = cum[np.searchsorted(ds, cand, side="right") - 1]
        ratios = masses / cand ** s
        k = int(np.argmax(ratios))
        if ratios[k] > best:
            best = float(ratios[k])
            witness = (x, float(cand[k]))
    return best, witness


@dataclass(frozen=True)
class StepMeasure:
    """Purely atomic measure on the line with exact rational atoms."""

    positions: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]
    total: Fraction

    @property
    def n_atoms(self) -> int:
        return len(self.positions)


def make_step_measure(pairs) -> StepMeasure:
    """Build from (position, mass) pairs; equal positions merge exactly."""
    acc: dict[Fraction, Fraction] = {}
    for pos, mass in pairs:
        pos = Fraction(pos)
        mass = Fraction(mass)
        if mass < 0:
            raise InputError("atom masses must be nonnegative")
        if pos < 0:
            raise InputError("atom positions must be nonnegative")
        acc[pos] = acc.get(pos, Fraction(0)) + mass
    positions = tuple(sorted(acc))
    masses = tuple(acc[p] for p in positions)
    return StepMeasure(positions=positions, masses=masses, total=sum(masses, Fraction(0)))


def radial_pushforward(m: DiscreteMeasure, z: int) -> StepMeasure:
    """Distribution of d(z, .) under m, with exact merging of equal floats.

    Requires a (re)scaled cloud: diameter <= 1 up to float round-off, so the
    pushforward lives on [0, 1] (positions may exceed 1 by ulps).
    """
    if m.cloud.diameter > 1.0 + 1e-12:
        raise InputError(
            "cloud diameter exceeds 1; rescale_to_unit_diameter first")
    d = m.cloud.distances_from(z)
    vals, inverse = np.unique(d, return_inverse=True)
    masses = [Fraction(0)] * vals.size
    for k, w in zip(inverse, m.weights):
        masses[k] += Fraction(float(w))
    return StepMeasure(positions=tuple(Fraction(float(v)) for v in vals),
                       masses=tuple(masses),
                       total=sum(masses, Fraction(0)))


def interval_mass(v: StepMeasure, lo, hi, lo_closed: bool = True,
                  hi_closed: bool = True) -> Fraction:
    """Exact mass of the interval with the given endpoint inclusion."""
    lo = Fraction(lo)
    hi = Fraction(hi)
    if lo > hi:
        raise InputError("need lo <= hi")
    i = bisect_left(v.positions, lo) if lo_closed else bisect_right(v.positions, lo)
    j = bisect_right(v.positions, hi) if hi_closed else bisect_left(v.positions, hi)
    return sum(v.masses[i:j], Fraction(0))


def measure_to_json(m: DiscreteMeasure) -> dict:
    return {"cloud": cloud_to_json(m.cloud),
            "weights": [float(w) for w in m.weights]}


def measure_from_json(obj: dict, base_dir: str = ".") -> DiscreteMeasure:
    cloud = obj["cloud"]
    if isinstance(cloud, str):
        import os
        cloud = load_cloud(os.path.join(base_dir, cloud))
    else:
        cloud = cloud_from_json(cloud)
    return make_measure(cloud, obj["weights"])


def load_measure(path: str) -> DiscreteMeasure:
    import os
    with open(path) as fh:
        return measure_from_json(json.load(fh), base_dir=os.path.dirname(path))


def save_measure(m: DiscreteMeasure, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(measure_to_json(m), fh, sort_keys=True)
