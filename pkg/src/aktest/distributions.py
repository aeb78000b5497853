"""Discrete grid-supported measures, labeled samples, and the rank transform.

A DiscreteGridDistribution is a nonnegative measure on a finite product grid:
per-axis sorted coordinate arrays plus a sparse map from index tuples to mass.
Total mass 1 is not required (hard instances are measures with mass Theta(1));
``normalized()`` reports whether it holds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInput
from .geometry import AxisRectangle, Point

P_LABEL = "P"
Q_LABEL = "Q"

_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteGridDistribution:
    """Sparse nonnegative measure on a product grid.

    axes: per-axis strictly increasing coordinate tuples.
    mass: index tuple -> weight; indices must be in range, weights finite
    and >= 0. The mass dict is owned by the instance; don't mutate it.
    """

    axes: tuple[tuple[float, ...], ...]
    mass: dict[tuple[int, ...], float]

    def __init__(
        self,
        axes: Sequence[Sequence[float]],
        mass: Mapping[Sequence[int], float],
    ):
        axes_t = tuple(tuple(float(v) for v in ax) for ax in axes)
        if not axes_t or any(not ax for ax in axes_t):
            raise InvalidInput("need at least one axis, each with coordinates")
        for j, ax in enumerate(axes_t):
            if any(a >= b for a, b in zip(ax, ax[1:])):
                raise InvalidInput(f"axis {j} is not strictly increasing")
        d = len(axes_t)
        mass_t: dict[tuple[int, ...], float] = {}
        for idx, w in mass.items():
            idx_t = tuple(int(i) for i in idx)
            if len(idx_t) != d:
                raise InvalidInput(f"index {idx_t} has wrong dimension (expected {d})")
            if any(i < 0 or i >= len(axes_t[j]) for j, i in enumerate(idx_t)):
                raise InvalidInput(f"index {idx_t} out of range for the axes")
            w = float(w)
            if not np.isfinite(w) or w < 0:
                raise InvalidInput(f"mass at {idx_t} must be finite and >= 0, got {w}")
            mass_t[idx_t] = mass_t.get(idx_t, 0.0) + w
        object.__setattr__(self, "axes", axes_t)
        object.__setattr__(self, "mass", mass_t)

    @classmethod
    def from_atoms(cls, atoms: Mapping[Sequence[float], float]) -> "DiscreteGridDistribution":
        """Build axes from the atom coordinates themselves."""
        pts = [tuple(float(v) for v in p) for p in atoms]
        if not pts:
            raise InvalidInput("no atoms")
        d = len(pts[0])
        axes = [sorted({p[j] for p in pts}) for j in range(d)]
        lookup = [{v: i for i, v in enumerate(ax)} for ax in axes]
        mass = {
            tuple(lookup[j][p[j]] for j in range(d)): w
            for p, w in zip(pts, atoms.values())
        }
        return cls(axes, mass)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def total_mass(self) -> float:
        return float(sum(self.mass.values()))

    def normalized(self, tol: float = _NORMALIZATION_TOL) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def point_of(self, idx: Sequence[int]) -> Point:
        return tuple(self.axes[j][i] for j, i in enumerate(idx))

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(points (n, d), weights (n,)) in lexicographic index order."""
        items = sorted(self.mass.items())
        pts = np.array([self.point_of(idx) for idx, _ in items], dtype=float)
        w = np.array([w for _, w in items], dtype=float)
        return pts.reshape(len(items), self.dim), w

    def mass_of(self, rect: AxisRectangle) -> float:
        """Measure of a closed rectangle (exact comparisons)."""
        if rect.dim != self.dim:
            raise InvalidInput("rectangle dimension mismatch")
        pts, w = self._arrays
        if len(w) == 0:
            return 0.0
        inside = np.ones(len(w), dtype=bool)
        for j in range(self.dim):
            inside &= (pts[:, j] >= rect.lo[j]) & (pts[:, j] <= rect.hi[j])
        return float(w[inside].sum())

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n iid draws from the normalized measure, shape (n, d)."""
        pts, w = self._arrays
        total = w.sum()
        if total <= 0:
            raise InvalidInput("cannot sample from a zero measure")
        if n == 0:
            return np.empty((0, self.dim))
        idx = rng.choice(len(w), size=n, p=w / total)
        return pts[idx]


def mixture_half(
    p: DiscreteGridDistribution, q: DiscreteGridDistribution
) -> DiscreteGridDistribution:
    """The measure (p + q) / 2 on the union grid, matching atoms by coordinates."""
    if p.dim != q.dim:
        raise InvalidInput("mixture of distributions with different dimensions")
    atoms: dict[Point, float] = {}
    for dist in (p, q):
        for idx, w in dist.mass.items():
            pt = dist.point_of(idx)
            atoms[pt] = atoms.get(pt, 0.0) + 0.5 * w
    return DiscreteGridDistribution.from_atoms(atoms)


def sample_poisson(
    dist: DiscreteGridDistribution, m: float, rng: np.random.Generator
) -> np.ndarray:
    """Poissonized sampling: N ~ Poi(m * ||mu||_1), then N iid draws, shape (N, d)."""
    if m <= 0:
        raise InvalidInput(f"Poisson budget must be positive, got {m}")
    n = int(rng.poisson(m * dist.total_mass))
    return dist.sample(n, rng)


@dataclass(frozen=True)
class LabeledSample:
    """A point with its source tag (P or Q)."""

    point: Point
    label: str

    def __post_init__(self):
        if self.label not in (P_LABEL, Q_LABEL):
            raise InvalidInput(f"label must be {P_LABEL!r} or {Q_LABEL!r}")
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))


@dataclass(frozen=True)
class RankedSampleSet:
    """Samples with coordinates replaced by per-axis ranks 1..m.

    Per axis, the coordinates are exactly a permutation of 1..m (validated),
    so the point set is generic by construction. ``provenance`` records the
    tie-breaking seed when the caller has one.
    """

    samples: tuple[LabeledSample, ...]
    provenance: int | None = None

    def __post_init__(self):
        m = len(self.samples)
        if m == 0:
            raise InvalidInput("empty ranked sample set")
        d = len(self.samples[0].point)
        for j in range(d):
            coords = sorted(s.point[j] for s in self.samples)
            if coords != [float(r) for r in range(1, m + 1)]:
                raise InvalidInput(f"axis {j} ranks are not a permutation of 1..{m}")

    @property
    def dim(self) -> int:
        return len(self.samples[0].point)

    def __len__(self) -> int:
        return len(self.samples)

    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.samples], dtype=float)

    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.samples)


def rank_transform(
    samples: Sequence[LabeledSample],
    rng: np.random.Generator,
    provenance: int | None = None,
) -> RankedSampleSet:
    """Replace coordinates by per-axis ranks, breaking ties uniformly.

    Ties are broken with an independent uniformly random permutation per
    axis (secondary sort key), so tied samples receive each relative order
    with equal probability. Sample order and labels are preserved; the
    output coordinates on every axis are exactly {1, ..., m}.
    """
    if not samples:
        raise InvalidInput("rank_transform of an empty sample list")
    coords = np.array([s.point for s in samples], dtype=float)
    m, d = coords.shape
    ranked = np.empty((m, d), dtype=float)
    for j in range(d):
        tiebreak = rng.permutation(m)
        order = np.lexsort((tiebreak, coords[:, j]))
        ranks = np.empty(m, dtype=float)
        ranks[order] = np.arange(1, m + 1)
        ranked[:, j] = ranks
    out = tuple(
        LabeledSample(tuple(ranked[i]), samples[i].label) for i in range(m)
    )
    return RankedSampleSet(out, provenance=provenance)


def load_distribution_spec(path: str) -> DiscreteGridDistribution:
    """Read the distribution-spec file format.

    Structure: {"dim": d, "axes": [[...], ...], "mass": [{"idx": [...],
    "w": ...}, ...], "normalized": bool}. Coordinates and weights are
    decimal strings in the file and parse to binary64 (plain JSON floats).
    A true "normalized" flag is validated against the actual total mass.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read distribution spec {path}: {exc}") from exc
    try:
        dim = int(raw["dim"])
        axes = raw["axes"]
        rows = raw["mass"]
        normalized = bool(raw["normalized"])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed distribution spec {path}: {exc}") from exc
    if len(axes) != dim:
        raise InvalidInput(f"spec says dim={dim} but has {len(axes)} axes")
    mass = {}
    for row in rows:
        try:
            idx = tuple(int(i) for i in row["idx"])
            w = float(row["w"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed mass row {row!r}: {exc}") from exc
        mass[idx] = mass.get(idx, 0.0) + w
    dist = DiscreteGridDistribution(axes, mass)
    if normalized and not dist.normalized():
        raise InvalidInput(
            f"spec {path} claims normalized=true but total mass is {dist.total_mass!r}"
        )
    return dist


def save_distribution_spec(
    dist: DiscreteGridDistribution, path: str, *, normalized: bool | None = None
) -> None:
    """Write the distribution spec format with a deterministic row order."""
    if normalized is None:
        normalized = dist.normalized()
    doc = {
        "dim": dist.dim,
        "axes": [list(ax) for ax in dist.axes],
        "mass": [
            {"idx": list(idx), "w": w} for idx, w in sorted(dist.mass.items())
        ],
        "normalized": normalized,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
