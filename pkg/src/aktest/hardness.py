"""Lower-bound machinery: edge gadgets, order tuples, hard instances, maps.

The basic gadget is a 45-degree square (diamond) with vertices at
center +- radius * e1 and center +- radius * e2. Variant T is uniform on
the upper-left and lower-right edges, variant R on the lower-left and
upper-right edges, MIX on all four. For any point a on the diamond, T and
R put exactly equal mass on each open quadrant at a, which is what makes
pairs built from them hard to tell apart from few samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import DiscreteGridDistribution, LabeledSample
from .errors import InvalidInput
from .geometry import AxisRectangle
from .oracle import RectangleFamily

VARIANT_T = "T"
VARIANT_R = "R"
VARIANT_MIX = "MIX"

_EDGE_NAMES = ("UL", "LR", "LL", "UR")
# Unit offsets of each edge's endpoints from the center: UL runs from the
# left vertex to the top vertex, and so on; every edge is traversed with
# increasing x.
_DIR_A = np.array([(-1.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (0.0, 1.0)])
_DIR_B = np.array([(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (1.0, 0.0)])

_VARIANT_EDGES = {
    VARIANT_T: (0, 1),
    VARIANT_R: (2, 3),
    VARIANT_MIX: (0, 1, 2, 3),
}

_ON_SUPPORT_TOL = 1e-9

# Quadrant sign conventions at a base point: 1 = {x > ax, y > ay},
# 2 = {x < ax, y < ay}, 3 = {x > ax, y < ay}, 4 = {x < ax, y > ay}.
_QUADRANT_SIGNS = {1: (1, 1), 2: (-1, -1), 3: (1, -1), 4: (-1, 1)}


@dataclass(frozen=True)
class SquareEdgeGadget:
    """Uniform measure on two or four edges of a diamond."""

    center: tuple[float, float]
    radius: float
    variant: str

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidInput(f"radius must be positive, got {self.radius}")
        if self.variant not in _VARIANT_EDGES:
            raise InvalidInput(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    def edges(self) -> list[tuple[str, tuple[float, float], tuple[float, float], float]]:
        """(name, start, end, weight) per edge of this variant."""
        cx, cy = self.center
        out = []
        idxs = _VARIANT_EDGES[self.variant]
        w = 1.0 / len(idxs)
        for e in idxs:
            ax, ay = _DIR_A[e]
            bx, by = _DIR_B[e]
            out.append(
                (
                    _EDGE_NAMES[e],
                    (cx + self.radius * ax, cy + self.radius * ay),
                    (cx + self.radius * bx, cy + self.radius * by),
                    w,
                )
            )
        return out

    def on_support(self, a: Sequence[float], tol: float = _ON_SUPPORT_TOL) -> bool:
        dx = abs(float(a[0]) - self.center[0])
        dy = abs(float(a[1]) - self.center[1])
        return abs(dx + dy - self.radius) <= tol * max(1.0, self.radius)

    def rect_mass(self, rect: AxisRectangle) -> float:
        """Exact mass inside a closed rectangle (arc-length fractions).

        Edges are never axis-parallel, so open and closed boundaries give
        the same measure.
        """
        if rect.dim != 2:
            raise InvalidInput("gadgets live in the plane")
        total = 0.0
        for _, a, b, w in self.edges():
            total += w * _edge_fraction_in_rect(a, b, rect)
        return total

    def quadrant_mass(self, a: Sequence[float], quadrant: int) -> float:
        """Exact mass of one open quadrant at a point a on the support."""
        if quadrant not in _QUADRANT_SIGNS:
            raise InvalidInput(f"quadrant must be 1..4, got {quadrant}")
        if not self.on_support(a):
            raise InvalidInput(f"point {tuple(a)} is not on the gadget support")
        sx, sy = _QUADRANT_SIGNS[quadrant]
        ax, ay = float(a[0]), float(a[1])
        inf = math.inf
        lo = (ax if sx > 0 else -inf, ay if sy > 0 else -inf)
        hi = (inf if sx > 0 else ax, inf if sy > 0 else ay)
        return self.rect_mass(AxisRectangle(lo, hi))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n iid points, shape (n, 2)."""
        centers = np.broadcast_to(np.asarray(self.center), (n, 2))
        codes = np.full(n, _variant_code(self.variant))
        return _gadget_points(centers, self.radius, codes, rng)


def _edge_fraction_in_rect(
    a: tuple[float, float], b: tuple[float, float], rect: AxisRectangle
) -> float:
    u_lo, u_hi = 0.0, 1.0
    for j in range(2):
        c0, dc = a[j], b[j] - a[j]
        lo, hi = rect.lo[j], rect.hi[j]
        if dc == 0.0:
            if not lo <= c0 <= hi:
                return 0.0
            continue
        t1, t2 = (lo - c0) / dc, (hi - c0) / dc
        if dc < 0:
            t1, t2 = t2, t1
        u_lo = max(u_lo, t1)
        u_hi = min(u_hi, t2)
    return max(0.0, u_hi - u_lo)


def _variant_code(variant: str) -> int:
    return {VARIANT_T: 0, VARIANT_R: 1, VARIANT_MIX: 2}[variant]


def _gadget_points(
    centers: np.ndarray, radius, codes: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized gadget sampling.

    codes: 0 = T, 1 = R, 2 = MIX per point. Three rng draws of size n are
    consumed regardless of the variant mix, keeping the stream shape
    data-independent.
    """
    n = len(codes)
    coin = rng.integers(2, size=n)
    hi_bit = rng.integers(2, size=n)
    u = rng.random(n)
    edge = np.where(codes == 0, coin, np.where(codes == 1, 2 + coin, 2 * hi_bit + coin))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (n,))
    a = centers + radius[:, None] * _DIR_A[edge]
    b = centers + radius[:, None] * _DIR_B[edge]
    return a + u[:, None] * (b - a)


# ---- order tuples ----------------------------------------------------------


@dataclass(frozen=True)
class OrderTuple:
    """Per-axis rank vectors plus source labels of a labeled planar sample."""

    sigma_x: tuple[int, ...]
    sigma_y: tuple[int, ...]
    labels: tuple[str, ...]


def order_tuple(samples: Sequence[LabeledSample]) -> OrderTuple:
    """Ranks (1-based) of each sample on each axis, plus labels.

    Tied coordinates have no well-defined order and raise InvalidInput.
    """
    if not samples:
        raise InvalidInput("empty sample list")
    xs = [s.point[0] for s in samples]
    ys = [s.point[1] for s in samples]
    if any(len(s.point) != 2 for s in samples):
        raise InvalidInput("order tuples are defined for planar samples")
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise InvalidInput("tied coordinates have no order tuple")
    rank_x = {v: i + 1 for i, v in enumerate(sorted(xs))}
    rank_y = {v: i + 1 for i, v in enumerate(sorted(ys))}
    return OrderTuple(
        tuple(rank_x[v] for v in xs),
        tuple(rank_y[v] for v in ys),
        tuple(s.label for s in samples),
    )


@dataclass(frozen=True)
class TvEstimate:
    """Bias-corrected empirical total variation between two sampled laws."""

    estimate: float
    stderr: float
    raw: float
    cells: int


def _debiased_tv(
    counts1: np.ndarray, counts2: np.ndarray, n1: int, n2: int
) -> TvEstimate:
    """Plug-in TV with its null expectation subtracted cell by cell.

    Under the null (both samples from one law) the plug-in TV concentrates
    around sum_c sqrt(2 var_c / pi) / 2, not zero; subtracting that (with
    the pooled variance estimate) makes "consistent with zero" testable.
    The stderr is the delta-method normal approximation.
    """
    f1 = counts1 / n1
    f2 = counts2 / n2
    diff = np.abs(f1 - f2)
    raw = 0.5 * float(diff.sum())
    pooled = (counts1 + counts2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    bias = np.sqrt(2.0 * var / math.pi)
    estimate = 0.5 * float((diff - bias).sum())
    stderr = 0.5 * math.sqrt(float(var.sum()) * (1.0 - 2.0 / math.pi))
    return TvEstimate(estimate=estimate, stderr=stderr, raw=raw, cells=len(f1))


def order_tuple_distribution_distance(
    m: int,
    trials: int,
    rng: np.random.Generator,
    *,
    center: tuple[float, float] = (0.5, 0.5),
    radius: float = 0.5,
) -> TvEstimate:
    """Monte-Carlo TV between order-tuple laws of the two worlds.

    World one draws every point from the even gadget mixture; world two
    flips one fair coin per tuple and assigns variant T to one source label
    and R to the other. For m <= 3 points the two order-tuple laws agree
    exactly, so the debiased estimate is consistent with zero; at m = 4
    they separate.
    """
    if not 1 <= m <= 8:
        raise InvalidInput(f"tuple size m must be in 1..8, got {m}")
    if trials < 1000:
        raise InvalidInput("need at least 1000 trials for a stable estimate")
    centers = np.broadcast_to(np.asarray(center, dtype=float), (trials * m, 2))

    labels = rng.integers(2, size=(trials, m))  # 0 = P, 1 = Q
    yes_codes = np.full(trials * m, 2)
    yes_pts = _gadget_points(centers, radius, yes_codes, rng).reshape(trials, m, 2)
    yes_cells = _encode_tuples(yes_pts, labels, m)

    labels2 = rng.integers(2, size=(trials, m))
    orient = rng.integers(2, size=(trials, 1))
    # orient 0: P draws T, Q draws R; orient 1: the swap.
    no_codes = (labels2 ^ orient).reshape(-1)
    no_pts = _gadget_points(centers, radius, no_codes, rng).reshape(trials, m, 2)
    no_cells = _encode_tuples(no_pts, labels2, m)

    union = np.union1d(yes_cells, no_cells)
    c1 = np.zeros(len(union), dtype=np.int64)
    c2 = np.zeros(len(union), dtype=np.int64)
    uid, cnt = np.unique(yes_cells, return_counts=True)
    c1[np.searchsorted(union, uid)] = cnt
    uid, cnt = np.unique(no_cells, return_counts=True)
    c2[np.searchsorted(union, uid)] = cnt
    return _debiased_tv(c1, c2, trials, trials)


def _encode_tuples(pts: np.ndarray, labels: np.ndarray, m: int) -> np.ndarray:
    """Encode (sigma_x, sigma_y, labels) of each tuple as one int64."""
    trials = pts.shape[0]
    ranks = np.empty((trials, m, 2), dtype=np.int64)
    seq = np.broadcast_to(np.arange(m, dtype=np.int64), (trials, m))
    for axis in range(2):
        order = np.argsort(pts[:, :, axis], axis=1)
        np.put_along_axis(ranks[:, :, axis], order, seq, axis=1)
    code = np.zeros(trials, dtype=np.int64)
    for t in range(m):
        code = code * m + ranks[:, t, 0]
    for t in range(m):
        code = code * m + ranks[:, t, 1]
    for t in range(m):
        code = code * 2 + labels[:, t]
    return code


# ---- hard instances --------------------------------------------------------


@dataclass(frozen=True)
class SquareSpec:
    """One diagonal square of a hard instance."""

    index: int
    heavy: bool
    p_variant: str
    q_variant: str
    mass: float  # per-side mass carried by this square


@dataclass(frozen=True)
class HardInstance:
    """A planted pair of edge-gadget measures on diagonal squares.

    Square i occupies [i/r, (i+1)/r]^2 with an inscribed diamond gadget.
    Heavy squares (probability m/k each, mass 1/m) carry the even mixture
    on both sides; light squares (mass eps/k) carry the even mixture on
    both sides in the equal case and opposite pure variants in the far
    case. Both sides always have identical total mass.
    """

    k: int
    m: int
    eps: float
    r: int
    equal_case: bool
    squares: tuple[SquareSpec, ...]

    @property
    def radius(self) -> float:
        return 0.5 / self.r

    def gadget(self, square: SquareSpec, side: str) -> SquareEdgeGadget:
        c = (square.index + 0.5) / self.r
        variant = square.p_variant if side == "p" else square.q_variant
        return SquareEdgeGadget((c, c), self.radius, variant)

    @property
    def total_mass(self) -> float:
        return float(sum(sq.mass for sq in self.squares))

    def _side_arrays(self, side: str):
        centers = np.array(
            [[(sq.index + 0.5) / self.r] * 2 for sq in self.squares], dtype=float
        )
        codes = np.array(
            [
                _variant_code(sq.p_variant if side == "p" else sq.q_variant)
                for sq in self.squares
            ]
        )
        masses = np.array([sq.mass for sq in self.squares], dtype=float)
        return centers, codes, masses

    def sampler(self, side: str):
        """A sample access drawing iid points from this side, normalized."""
        if side not in ("p", "q"):
            raise InvalidInput("side must be 'p' or 'q'")
        centers, codes, masses = self._side_arrays(side)
        weights = masses / masses.sum()

        def access(n: int, rng: np.random.Generator) -> np.ndarray:
            if n == 0:
                return np.empty((0, 2))
            comp = rng.choice(len(weights), size=n, p=weights)
            return _gadget_points(centers[comp], self.radius, codes[comp], rng)

        return access

    def sample_poisson(self, side: str, budget: float, rng: np.random.Generator):
        """Poissonized draw: N ~ Poi(budget * total mass), then N iid points."""
        n = int(rng.poisson(budget * self.total_mass))
        return self.sampler(side)(n, rng)

    def light_squares(self) -> list[SquareSpec]:
        return [sq for sq in self.squares if not sq.heavy]

    def ak_lower_bound(self) -> tuple[float, RectangleFamily]:
        """Certified A_k discrepancy of the normalized pair.

        Sums the exact per-quadrant one-sided discrepancies over the light
        squares (four sub-rectangles each) and normalizes by the common
        total mass. Only as many squares as fit within k rectangles are
        counted, which keeps the bound valid for any k. Zero in the equal
        case.
        """
        rects: list[AxisRectangle] = []
        total = 0.0
        budget = self.k // 4
        for sq in self.light_squares():
            if sq.p_variant == sq.q_variant:
                continue
            if budget == 0:
                break
            budget -= 1
            c = (sq.index + 0.5) / self.r
            rad = self.radius
            gp = self.gadget(sq, "p")
            gq = self.gadget(sq, "q")
            for lo, hi in (
                ((c - rad, c), (c, c + rad)),  # upper-left quadrant
                ((c, c), (c + rad, c + rad)),  # upper-right
                ((c - rad, c - rad), (c, c)),  # lower-left
                ((c, c - rad), (c + rad, c)),  # lower-right
            ):
                box = AxisRectangle(lo, hi)
                diff = abs(gp.rect_mass(box) - gq.rect_mass(box)) * sq.mass
                if diff > 0:
                    rects.append(box)
                    total += diff
        mass = self.total_mass
        bound = total / mass if mass > 0 else 0.0
        return bound, RectangleFamily(tuple(rects), disjoint=True)

    def to_distributions(
        self, cells_per_square: int = 8
    ) -> tuple[DiscreteGridDistribution, DiscreteGridDistribution, dict]:
        """Exact lattice rounding to the discrete spec format.

        Each edge of each gadget is a 45-degree segment; on the per-square
        c x c sub-lattice (c even) it crosses exactly c/2 cells with equal
        arc mass, and each cell's mass moves to the cell's top-left vertex.
        This is an exact pushforward of the measure, not a sample.
        """
        c = int(cells_per_square)
        if c < 2 or c % 2:
            raise InvalidInput("cells_per_square must be an even number >= 2")
        denom = self.r * c
        atoms_p: dict[tuple[int, int], float] = {}
        atoms_q: dict[tuple[int, int], float] = {}
        for sq in self.squares:
            base = sq.index * c
            mid = base + c // 2
            anchors = {  # lattice coordinates of each edge's left endpoint
                "UL": (base, mid),
                "LR": (mid, base),
                "LL": (base, mid),
                "UR": (mid, base + c),
            }
            slopes = {"UL": 1, "LR": 1, "LL": -1, "UR": -1}
            for side, atoms in (("p", atoms_p), ("q", atoms_q)):
                gadget = self.gadget(sq, side)
                for name, _, _, w in gadget.edges():
                    cell_mass = sq.mass * w / (c // 2)
                    ax, ay = anchors[name]
                    slope = slopes[name]
                    for t in range(c // 2):
                        ix = ax + t
                        iy = ay + t + 1 if slope > 0 else ay - t
                        key = (ix, iy)
                        atoms[key] = atoms.get(key, 0.0) + cell_mass
        def to_dist(atoms: dict[tuple[int, int], float]) -> DiscreteGridDistribution:
            return DiscreteGridDistribution.from_atoms(
                {(ix / denom, iy / denom): w for (ix, iy), w in atoms.items()}
            )
        meta = {
            "equal_case": self.equal_case,
            "k": self.k,
            "m": self.m,
            "eps": self.eps,
            "r": self.r,
            "cells_per_square": c,
            "total_mass": self.total_mass,
            "squares": [
                {
                    "index": sq.index,
                    "heavy": sq.heavy,
                    "p_variant": sq.p_variant,
                    "q_variant": sq.q_variant,
                    "mass": sq.mass,
                }
                for sq in self.squares
            ],
        }
        return to_dist(atoms_p), to_dist(atoms_q), meta


def gen_hard_instance(
    k: int,
    m: int,
    eps: float,
    equal_case: bool,
    rng: np.random.Generator,
    *,
    square_fraction: float = 0.125,
) -> HardInstance:
    """Draw a hard instance with r = ceil(square_fraction * k) squares.

    Requires m < k/2 so heavy squares stay a minority and the light-square
    witness family (four rectangles each) fits within k rectangles.
    """
    if k < 1 or m < 1:
        raise InvalidInput(f"k and m must be positive, got k={k} m={m}")
    if not 0 < eps <= 1:
        raise InvalidInput(f"eps must be in (0, 1], got {eps}")
    if not m < k / 2:
        raise InvalidInput(f"need m < k/2 for a valid instance, got m={m} k={k}")
    r = math.ceil(square_fraction * k)
    squares = []
    for i in range(r):
        heavy = bool(rng.random() < m / k)
        if heavy:
            p_var = q_var = VARIANT_MIX
            mass = 1.0 / m
        else:
            mass = eps / k
            if equal_case:
                p_var = q_var = VARIANT_MIX
            elif rng.random() < 0.5:
                p_var, q_var = VARIANT_T, VARIANT_R
            else:
                p_var, q_var = VARIANT_R, VARIANT_T
        squares.append(SquareSpec(i, heavy, p_var, q_var, mass))
    return HardInstance(k, m, float(eps), r, equal_case, tuple(squares))


# ---- monotone obfuscation maps ---------------------------------------------

_MIN_W = math.exp(math.e)


@dataclass(frozen=True)
class MonotoneMap:
    """x -> exp(x * exp(lam1)) * exp(lam2) + lam3 on the domain [0, 1].

    lam3 is stored as its logarithm: its sampling range [0, exp(2 log^3 W)]
    exceeds float range for W beyond about 1200, so the map is evaluated in
    log space wherever possible and materializing f(x) itself raises
    OverflowError with the offending magnitude.
    """

    lam1: float
    lam2: float
    log_lam3: float
    scale: float  # the W the parameters were drawn for

    def _g(self, x: float) -> float:
        if not 0.0 <= x <= 1.0:
            raise InvalidInput(f"map domain is [0, 1], got {x}")
        return x * math.exp(self.lam1) + self.lam2

    def apply(self, x: float) -> float:
        g = self._g(x)
        if g > math.log(np.finfo(float).max):
            raise OverflowError(f"exp({g:.6g}) exceeds float range")
        if self.log_lam3 > math.log(np.finfo(float).max):
            raise OverflowError(
                f"additive term exp({self.log_lam3:.6g}) exceeds float range"
            )
        return math.exp(g) + math.exp(self.log_lam3)

    def log_gap(self, x: float, y: float) -> float:
        """log(f(y) - f(x)) for x < y, stable at any scale."""
        gx, gy = self._g(x), self._g(y)
        if not gx < gy:
            raise InvalidInput(f"need x < y, got {x} >= {y}")
        return gy + math.log1p(-math.exp(gx - gy))

    def triple_coords(self, a: float, b: float, c: float) -> tuple[float, float, float]:
        """(log log A, log B, log C) for the gap ratio A, gap B, offset C.

        A = (f(c) - f(a)) / (f(b) - f(a)) > 1, B = f(b) - f(a), C = f(a).
        All three are computed in log space; TV comparisons between maps
        are invariant under these per-coordinate monotone changes.
        """
        if not a < b < c:
            raise InvalidInput(f"need a < b < c, got {(a, b, c)}")
        gab = self.log_gap(a, b)
        gac = self.log_gap(a, c)
        log_ratio = gac - gab
        if log_ratio <= 0:
            raise InvalidInput("gap ratio rounded to <= 1; triple too degenerate")
        return math.log(log_ratio), gab, float(np.logaddexp(self._g(a), self.log_lam3))


def sample_monotone_map(scale: float, rng: np.random.Generator) -> MonotoneMap:
    """Draw map parameters for obfuscation strength W = scale.

    lam1 ~ U[log log W, 2 log log W], lam2 ~ U[0, log^3 W],
    lam3 ~ U[0, exp(2 log^3 W)] (stored in log space). Requires W > e^e.
    """
    if not scale > _MIN_W:
        raise InvalidInput(f"scale must exceed e^e = {_MIN_W:.4f}, got {scale}")
    loglog = math.log(math.log(scale))
    log3 = math.log(scale) ** 3
    lam1 = float(rng.uniform(loglog, 2 * loglog))
    lam2 = float(rng.uniform(0.0, log3))
    u = float(rng.random())
    log_lam3 = -math.inf if u == 0.0 else 2.0 * log3 + math.log(u)
    return MonotoneMap(lam1, lam2, log_lam3, float(scale))


def obfuscation_coords(
    scale: float,
    triple: tuple[float, float, float],
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized triple_coords over n freshly drawn maps, shape (n, 3)."""
    a, b, c = triple
    if not 0 <= a < b < c <= 1:
        raise InvalidInput(f"need 0 <= a < b < c <= 1, got {triple}")
    if not scale > _MIN_W:
        raise InvalidInput(f"scale must exceed e^e, got {scale}")
    loglog = math.log(math.log(scale))
    log3 = math.log(scale) ** 3
    lam1 = rng.uniform(loglog, 2 * loglog, size=n)
    lam2 = rng.uniform(0.0, log3, size=n)
    with np.errstate(divide="ignore"):  # u == 0 -> lam3 == 0 is legal
        log_lam3 = 2.0 * log3 + np.log(rng.random(n))
    e1 = np.exp(lam1)
    ga = a * e1 + lam2
    gb = b * e1 + lam2
    gc = c * e1 + lam2
    gab = gb + np.log1p(-np.exp(ga - gb))
    gac = gc + np.log1p(-np.exp(ga - gc))
    coords = np.empty((n, 3))
    coords[:, 0] = np.log(gac - gab)
    coords[:, 1] = gab
    coords[:, 2] = np.logaddexp(ga, log_lam3)
    return coords


def obfuscation_tv(
    scale: float,
    triple_one: tuple[float, float, float],
    triple_two: tuple[float, float, float],
    n: int,
    rng: np.random.Generator,
    *,
    bins: int = 8,
) -> TvEstimate:
    """Binned TV between the coordinate laws of two triples at one scale.

    The joint (log log A, log B, log C) histogram over bins^3 cells (edges
    from the pooled per-coordinate ranges) feeds the debiased TV estimator.
    Larger scales obfuscate harder, so the estimate shrinks as W grows.
    """
    c1 = obfuscation_coords(scale, triple_one, n, rng)
    c2 = obfuscation_coords(scale, triple_two, n, rng)
    pooled = np.vstack([c1, c2])
    cells1 = np.zeros(len(c1), dtype=np.int64)
    cells2 = np.zeros(len(c2), dtype=np.int64)
    for j in range(3):
        lo, hi = pooled[:, j].min(), pooled[:, j].max()
        edges = np.linspace(lo, hi, bins + 1)
        b1 = np.clip(np.searchsorted(edges, c1[:, j], side="right") - 1, 0, bins - 1)
        b2 = np.clip(np.searchsorted(edges, c2[:, j], side="right") - 1, 0, bins - 1)
        cells1 = cells1 * bins + b1
        cells2 = cells2 * bins + b2
    union = np.union1d(cells1, cells2)
    h1 = np.zeros(len(union), dtype=np.int64)
    h2 = np.zeros(len(union), dtype=np.int64)
    uid, cnt = np.unique(cells1, return_counts=True)
    h1[np.searchsorted(union, uid)] = cnt
    uid, cnt = np.unique(cells2, return_counts=True)
    h2[np.searchsorted(union, uid)] = cnt
    return _debiased_tv(h1, h2, n, n)
