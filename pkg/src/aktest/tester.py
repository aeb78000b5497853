"""The end-to-end A_k closeness tester and its two reduction front-ends.

Pipeline: draw a Poissonized batch from the even mixture of the two
accesses, move to rank space (where the batch plus synthetic padding is
the integer ladder 1..2^a + 1), build the dyadic cover of that grid, map
fresh samples to induced cover-rectangle outcomes, and hand the resulting
discrete pair to the flattening closeness test at accuracy sqrt(kappa).

Everything after the batch draw consumes only comparisons against batch
coordinates, so strictly monotone per-axis transforms of all inputs leave
the verdict bit-for-bit unchanged for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Callable

import numpy as np

from .covering import CoverFamily, SamplePointGrid
from .errors import InvalidInput
from .flatten import (
    DEFAULT_FLATTEN_CONST,
    DEFAULT_ROBUST_CONST,
    flatten_closeness,
)

PointAccess = Callable[[int, np.random.Generator], np.ndarray]

_PRACTICAL_FILE = "practical_constants.json"
_BUDGET_CAP = 1 << 40


@dataclass(frozen=True)
class TesterConfig:
    """Instance parameters plus the constants profile of one test run.

    In paper mode the accuracy exponent alpha defaults to
    alpha_const * d^2 * 2^(2^(d+1)) and the budget/kappa consistency
    condition is enforced (it fails for every desk-scale input; paper mode
    is for formula inspection unless alpha is overridden). Practical mode
    uses the calibrated constants shipped in practical_constants.json.
    """

    k: int
    d: int
    eps: float
    mode: str = "practical"
    c_prime: float = 1.0
    c_kappa: float = 1.0
    alpha: float | None = None
    alpha_const: float = 1.0
    consistency_const: float = 1.0
    s_multiplier: float = 1.0
    budget_multiplier: float = 1.0
    robust_const: float = DEFAULT_ROBUST_CONST
    flatten_const: float = DEFAULT_FLATTEN_CONST
    seed: int | None = None

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise InvalidInput(f"k must be an integer >= 2, got {self.k}")
        if not isinstance(self.d, int) or self.d < 1:
            raise InvalidInput(f"d must be an integer >= 1, got {self.d}")
        if not (isinstance(self.eps, (int, float)) and 0 < self.eps <= 2):
            raise InvalidInput(f"eps must be in (0, 2], got {self.eps}")
        if self.mode not in ("paper", "practical"):
            raise InvalidInput(f"mode must be paper or practical, got {self.mode!r}")
        for name in ("c_prime", "c_kappa", "s_multiplier", "budget_multiplier"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidInput(f"{name} must be a positive real, got {v}")

    @property
    def alpha_d(self) -> float:
        """The accuracy exponent in effect."""
        if self.alpha is not None:
            return self.alpha
        if self.mode == "practical":
            return 1.0
        try:
            tower = math.ldexp(1.0, 2 ** (self.d + 1))
        except OverflowError:
            raise InvalidInput(
                f"default exponent exceeds float range at d={self.d}; "
                "pass an explicit alpha"
            ) from None
        return self.alpha_const * self.d * self.d * tower

    @classmethod
    def paper(cls, k: int, d: int, eps: float, **overrides) -> "TesterConfig":
        return cls(k=k, d=d, eps=eps, mode="paper", **overrides)

    @classmethod
    def practical(cls, k: int, d: int, eps: float, **overrides) -> "TesterConfig":
        profile = load_practical_constants()
        profile.update(overrides)
        return cls(k=k, d=d, eps=eps, mode="practical", **profile)


def load_practical_constants(path=None) -> dict:
    """The calibrated constants profile (checked-in JSON, or a file)."""
    if path is None:
        text = resources.files("aktest").joinpath(_PRACTICAL_FILE).read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    profile = json.loads(text)
    if not isinstance(profile, dict):
        raise InvalidInput("constants profile must be a JSON object")
    allowed = {
        "c_prime",
        "c_kappa",
        "alpha",
        "s_multiplier",
        "budget_multiplier",
        "robust_const",
        "flatten_const",
    }
    unknown = set(profile) - allowed
    if unknown:
        raise InvalidInput(f"unknown constants in profile: {sorted(unknown)}")
    return {k: float(v) for k, v in profile.items()}


@dataclass(frozen=True)
class AkTestResult:
    """Verdict plus the run's derived quantities.

    reject holds iff statistic >= threshold; samples_used counts every
    point drawn from the two accesses (batch, flattening, and test draws).
    """

    accept: bool
    statistic: float
    threshold: float
    samples_used: int
    kappa: float
    budget: int
    batch_size: int
    grid_values: int
    flatten_sets: int

    @property
    def decision(self) -> str:
        return "accept" if self.accept else "reject"


def sample_budget(config: TesterConfig) -> int:
    """Batch size m = ceil(C' k^(6/7) eps^(-2a/3) (log2 k)^d 2^(d/3))."""
    a = config.alpha_d
    value = (
        config.budget_multiplier
        * config.c_prime
        * config.k ** (6.0 / 7.0)
        * config.eps ** (-2.0 * a / 3.0)
        * math.log2(config.k) ** config.d
        * 2.0 ** (config.d / 3.0)
    )
    if not math.isfinite(value) or value > _BUDGET_CAP:
        raise InvalidInput(
            f"sample budget {value:.3g} is not usable; lower alpha or the "
            "constants (paper-mode exponents are astronomical by design)"
        )
    return max(1, math.ceil(value))


def kappa(config: TesterConfig, m: int) -> float:
    """Accuracy target kappa = c 2^(-d) (log2 k)^(-3d) (eps/4)^(2a) m^2/k^3."""
    if m < 1:
        raise InvalidInput(f"budget m must be >= 1, got {m}")
    a = config.alpha_d
    return (
        config.c_kappa
        * 2.0 ** (-config.d)
        * math.log2(config.k) ** (-3.0 * config.d)
        * (config.eps / 4.0) ** (2.0 * a)
        * float(m)
        * float(m)
        / float(config.k) ** 3
    )


def consistency_satisfied(config: TesterConfig, m: int, kap: float) -> bool:
    """Whether m >= C max(kappa^(-2/3), kappa^(-1)/sqrt(k)) holds."""
    if kap <= 0:
        return False
    bound = config.consistency_const * max(
        kap ** (-2.0 / 3.0), 1.0 / (kap * math.sqrt(config.k))
    )
    return m >= bound


def flatten_set_count(config: TesterConfig, m: int) -> int:
    """Light-element parameter s = ceil(k (log2 m)^d), with its multiplier."""
    if m < 1:
        raise InvalidInput(f"budget m must be >= 1, got {m}")
    return max(
        1, math.ceil(config.s_multiplier * config.k * math.log2(m) ** config.d)
    )


def _padded_size(n: int) -> int:
    """Smallest (power of two) + 1 that is >= max(3, n)."""
    size = 3
    while size < n:
        size = 2 * size - 1
    return size


def _encoded_access(
    side_access: PointAccess,
    ladders: list[np.ndarray],
    cover: CoverFamily,
    d: int,
) -> Callable[[int, np.random.Generator], np.ndarray]:
    """Wrap a point access to emit induced cover-rectangle codes.

    A fresh coordinate's rank position among the n batch values is its
    strictly-smaller count plus a uniform draw over its ties (the draw is
    consumed even when there are no ties, so the rng stream depends only
    on sizes). Position 0 is below the grid and any gap beyond the padded
    ladder is above it; both map to the empty outcome.
    """
    top_gap = cover.m - 1

    def access(n: int, rng: np.random.Generator) -> np.ndarray:
        pts = np.asarray(side_access(n, rng), dtype=float)
        if pts.shape != (n, d):
            raise InvalidInput(
                f"access returned shape {pts.shape}, expected {(n, d)}"
            )
        gaps = np.empty((n, d), dtype=np.int64)
        for j, ladder in enumerate(ladders):
            x = pts[:, j]
            left = np.searchsorted(ladder, x, side="left")
            right = np.searchsorted(ladder, x, side="right")
            pos = left + rng.integers(0, right - left + 1)
            gap = pos - 1
            gap[(pos == 0) | (gap > top_gap)] = -1
            gaps[:, j] = gap
        return cover.sample_ids_encoded(gaps, rng)

    return access


def ak_closeness_test(
    p_access: PointAccess,
    q_access: PointAccess,
    config: TesterConfig,
    rng: np.random.Generator | None = None,
) -> AkTestResult:
    """Decide p = q versus A_k distance >= eps from sample access alone.

    Accepts with probability >= 2/3 when p = q; rejects with probability
    >= 2/3 when the A_k distance is at least eps (paper-mode guarantee;
    practical mode trades the guarantee's constants for desk-scale budgets
    and is validated empirically on planted families).
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    m = sample_budget(config)
    kap = kappa(config, m)
    if config.mode == "paper" and not consistency_satisfied(config, m, kap):
        raise InvalidInput(
            "paper-mode consistency condition m >= C max(kappa^(-2/3), "
            f"kappa^(-1)/sqrt(k)) fails at m={m}, kappa={kap:.3g}; override "
            "alpha or the constants, or use practical mode"
        )
    d = config.d
    n_p = int(rng.poisson(m / 2.0))
    n_q = int(rng.poisson(m / 2.0))
    pts_p = np.asarray(p_access(n_p, rng), dtype=float)
    pts_q = np.asarray(q_access(n_q, rng), dtype=float)
    if pts_p.shape != (n_p, d) or pts_q.shape != (n_q, d):
        raise InvalidInput(
            f"accesses must return (n, {d}) arrays, got {pts_p.shape} "
            f"and {pts_q.shape}"
        )
    batch = np.vstack([pts_p, pts_q])
    n = len(batch)
    if n == 0:
        raise InvalidInput(
            "the mixture batch came back empty; the accesses produce no "
            "samples at this budget"
        )
    size = _padded_size(n)
    ladder_axis = tuple(float(v) for v in range(1, size + 1))
    grid = SamplePointGrid((ladder_axis,) * d)
    cover = CoverFamily(grid)
    ladders = [np.sort(batch[:, j]) for j in range(d)]
    s = flatten_set_count(config, m)
    verdict = flatten_closeness(
        _encoded_access(p_access, ladders, cover, d),
        _encoded_access(q_access, ladders, cover, d),
        s,
        math.sqrt(kap),
        rng,
        c_f=config.flatten_const,
        c_r=config.robust_const,
    )
    return AkTestResult(
        accept=verdict.accept,
        statistic=verdict.statistic,
        threshold=verdict.threshold,
        samples_used=verdict.samples_used + n,
        kappa=kap,
        budget=m,
        batch_size=n,
        grid_values=size,
        flatten_sets=s,
    )


def tv_histogram_test(
    p_access: PointAccess,
    q_access: PointAccess,
    config: TesterConfig,
    rng: np.random.Generator | None = None,
) -> AkTestResult:
    """Total-variation closeness for k-histograms on a shared partition.

    When both distributions are piecewise constant over one unknown
    partition into k rectangles, d_TV = half the A_k distance, so testing
    at accuracy 2 eps_tv decides d_TV <= 0 versus >= eps_tv. config.eps is
    read as eps_tv. Values above 1 are vacuous for a total variation, but
    the delegate still runs at the capped accuracy 2.
    """
    inner = replace(config, eps=min(2.0 * config.eps, 2.0))
    return ak_closeness_test(p_access, q_access, inner, rng)


LabeledPointAccess = Callable[
    [int, np.random.Generator], tuple[np.ndarray, np.ndarray]
]


def _label_pushforward(h_access: LabeledPointAccess, d: int) -> PointAccess:
    sentinel = -1.0

    def access(n: int, rng: np.random.Generator) -> np.ndarray:
        x, labels = h_access(n, rng)
        x = np.asarray(x, dtype=float)
        labels = np.asarray(labels)
        if x.shape != (n, d) or labels.shape != (n,):
            raise InvalidInput(
                f"labeled access must return ((n, {d}), (n,)) arrays, got "
                f"{x.shape} and {labels.shape}"
            )
        return np.where(labels[:, None].astype(bool), x, sentinel)

    return access


def hypothesis_equivalence_test(
    h1_access: LabeledPointAccess,
    h2_access: LabeledPointAccess,
    config: TesterConfig,
    rng: np.random.Generator | None = None,
) -> AkTestResult:
    """Equivalence of two k-rectangle-union hypotheses from labeled draws.

    Each access yields (x, label) with x uniform on the cube; positive
    points pass through, negative ones collapse to the sentinel at
    (-1, ..., -1). Disagreement mass eps between the hypotheses leaves an
    A_k gap of at least eps/2 between the pushforwards, so the delegate
    runs at accuracy config.eps / 2.
    """
    inner = replace(config, eps=config.eps / 2.0)
    return ak_closeness_test(
        _label_pushforward(h1_access, config.d),
        _label_pushforward(h2_access, config.d),
        inner,
        rng,
    )
