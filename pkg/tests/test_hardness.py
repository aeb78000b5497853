"""Lower-bound machinery: gadgets, order tuples, hard instances, obfuscation."""

import math

import numpy as np
import pytest

from aktest import (
    AxisRectangle,
    HardInstance,
    InvalidInput,
    LabeledSample,
    MonotoneMap,
    ak_distance_bruteforce,
    gen_hard_instance,
    obfuscation_tv,
    order_tuple,
    order_tuple_distribution_distance,
    sample_monotone_map,
)
from aktest.distributions import P_LABEL, Q_LABEL
from aktest.hardness import (
    VARIANT_MIX,
    VARIANT_R,
    VARIANT_T,
    SquareEdgeGadget,
    SquareSpec,
    obfuscation_coords,
)

UNIT = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_T)


def test_edge_inventory():
    t_edges = {name: w for name, _, _, w in UNIT.edges()}
    assert t_edges == {"UL": 0.5, "LR": 0.5}
    r_edges = {name: w for name, _, _, w in SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_R).edges()}
    assert r_edges == {"LL": 0.5, "UR": 0.5}
    mix = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_MIX)
    assert {w for _, _, _, w in mix.edges()} == {0.25}
    assert len(mix.edges()) == 4


def test_gadget_validation():
    with pytest.raises(InvalidInput):
        SquareEdgeGadget((0.0, 0.0), 0.0, VARIANT_T)
    with pytest.raises(InvalidInput):
        SquareEdgeGadget((0.0, 0.0), 1.0, "diag")


def test_rect_mass_hand_values():
    whole = AxisRectangle((-1.0, -1.0), (1.0, 1.0))
    left = AxisRectangle((-1.0, -1.0), (0.0, 1.0))
    upper_left = AxisRectangle((-1.0, 0.0), (0.0, 1.0))
    for variant in (VARIANT_T, VARIANT_R, VARIANT_MIX):
        g = SquareEdgeGadget((0.0, 0.0), 1.0, variant)
        assert g.rect_mass(whole) == pytest.approx(1.0)
        assert g.rect_mass(left) == pytest.approx(0.5)
    assert UNIT.rect_mass(upper_left) == pytest.approx(0.5)  # the whole UL edge
    r = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_R)
    assert r.rect_mass(upper_left) == pytest.approx(0.0)


def test_on_support():
    assert UNIT.on_support((-0.5, 0.5))
    assert UNIT.on_support((0.25, -0.75))
    assert not UNIT.on_support((0.0, 0.0))
    assert not UNIT.on_support((0.5, 0.6))


def test_quadrant_masses_on_the_upper_right_edge():
    r = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_R)
    a = (0.5, 0.5)
    assert UNIT.quadrant_mass(a, 1) == 0.0
    assert r.quadrant_mass(a, 1) == 0.0
    # T and R agree on every quadrant of every support point
    for quad in (1, 2, 3, 4):
        assert UNIT.quadrant_mass(a, quad) == pytest.approx(r.quadrant_mass(a, quad))


def test_quadrant_masses_at_the_top_vertex():
    r = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_R)
    top = (0.0, 1.0)
    assert UNIT.quadrant_mass(top, 2) == pytest.approx(0.5)
    assert r.quadrant_mass(top, 2) == pytest.approx(0.5)


def test_quadrant_equality_sweep():
    r = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_R)
    mix = SquareEdgeGadget((0.0, 0.0), 1.0, VARIANT_MIX)
    for _, a, b, _ in mix.edges():
        for u in np.linspace(0.0, 1.0, 26)[:-1]:
            pt = (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))
            for quad in (1, 2, 3, 4):
                assert abs(UNIT.quadrant_mass(pt, quad) - r.quadrant_mass(pt, quad)) <= 1e-12


def test_quadrant_mass_guards():
    with pytest.raises(InvalidInput):
        UNIT.quadrant_mass((0.2, 0.2), 1)  # off support
    with pytest.raises(InvalidInput):
        UNIT.quadrant_mass((0.5, 0.5), 5)


def test_gadget_sampling():
    rng = np.random.default_rng(3)
    mix = SquareEdgeGadget((0.5, 0.5), 0.5, VARIANT_MIX)
    pts = mix.sample(20_000, rng)
    assert pts.shape == (20_000, 2)
    dist = np.abs(pts[:, 0] - 0.5) + np.abs(pts[:, 1] - 0.5)
    assert np.abs(dist - 0.5).max() < 1e-12
    upper_left = ((pts[:, 0] < 0.5) & (pts[:, 1] > 0.5)).mean()
    assert abs(upper_left - 0.25) < 0.02
    assert mix.sample(0, rng).shape == (0, 2)


def test_order_tuple_example():
    samples = [
        LabeledSample((1.0, 5.0), P_LABEL),
        LabeledSample((3.0, 2.0), Q_LABEL),
    ]
    ot = order_tuple(samples)
    assert ot.sigma_x == (1, 2)
    assert ot.sigma_y == (2, 1)
    assert ot.labels == (P_LABEL, Q_LABEL)


def test_order_tuple_guards():
    with pytest.raises(InvalidInput):
        order_tuple([])
    tied = [LabeledSample((1.0, 2.0), P_LABEL), LabeledSample((1.0, 3.0), P_LABEL)]
    with pytest.raises(InvalidInput):
        order_tuple(tied)
    with pytest.raises(InvalidInput):
        order_tuple([LabeledSample((1.0, 2.0, 3.0), P_LABEL)])


def test_order_tuple_invariant_under_monotone_maps():
    # small additive terms keep apply() faithful to the order at float
    # precision (huge sampled lam3 values would collapse nearby points)
    rng = np.random.default_rng(5)
    gadget = SquareEdgeGadget((0.5, 0.5), 0.5, VARIANT_MIX)
    fx = MonotoneMap(lam1=1.2, lam2=3.0, log_lam3=math.log(7.0), scale=16.0)
    fy = MonotoneMap(lam1=0.4, lam2=0.1, log_lam3=-math.inf, scale=16.0)
    for _ in range(25):
        pts = gadget.sample(5, rng)
        labels = [P_LABEL if i % 2 else Q_LABEL for i in range(5)]
        plain = order_tuple(
            [LabeledSample(tuple(p), l) for p, l in zip(pts, labels)]
        )
        mapped = order_tuple(
            [
                LabeledSample((fx.apply(p[0]), fy.apply(p[1])), l)
                for p, l in zip(pts, labels)
            ]
        )
        assert mapped == plain


def test_order_tuple_distance_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidInput):
        order_tuple_distribution_distance(0, 2000, rng)
    with pytest.raises(InvalidInput):
        order_tuple_distribution_distance(9, 2000, rng)
    with pytest.raises(InvalidInput):
        order_tuple_distribution_distance(2, 999, rng)


def test_order_tuple_laws_match_then_split():
    # light version of the m <= 3 match / m = 4 gap; the acceptance test
    # runs the full 10^6-trial suite
    rng = np.random.default_rng(7)
    small = order_tuple_distribution_distance(1, 20_000, rng)
    assert abs(small.estimate) <= max(0.01, 3 * small.stderr)
    gap = order_tuple_distribution_distance(4, 50_000, rng)
    assert gap.estimate > 5 * gap.stderr


def test_gen_hard_instance_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidInput):
        gen_hard_instance(8, 4, 1.0, False, rng)  # m >= k/2
    with pytest.raises(InvalidInput):
        gen_hard_instance(8, 2, 1.5, False, rng)
    with pytest.raises(InvalidInput):
        gen_hard_instance(0, 1, 1.0, False, rng)


def test_gen_hard_instance_structure():
    rng = np.random.default_rng(11)
    inst = gen_hard_instance(64, 4, 0.5, False, rng)
    assert inst.r == 8 == len(inst.squares)
    assert inst.radius == 0.5 / 8
    expected_total = 0.0
    for sq in inst.squares:
        if sq.heavy:
            assert sq.mass == 1.0 / 4
            assert sq.p_variant == sq.q_variant == VARIANT_MIX
        else:
            assert sq.mass == 0.5 / 64
            assert {sq.p_variant, sq.q_variant} == {VARIANT_T, VARIANT_R}
        expected_total += sq.mass
    assert inst.total_mass == pytest.approx(expected_total)

    equal = gen_hard_instance(64, 4, 0.5, True, rng)
    assert all(
        sq.p_variant == sq.q_variant == VARIANT_MIX
        for sq in equal.squares
        if not sq.heavy
    )


def test_hard_instance_sampler_stays_on_square_edges():
    rng = np.random.default_rng(13)
    inst = gen_hard_instance(32, 2, 1.0, False, rng)
    for side in ("p", "q"):
        pts = inst.sampler(side)(2000, rng)
        idx = np.floor(pts[:, 0] * inst.r).astype(int)
        centers = (idx + 0.5) / inst.r
        dist = np.abs(pts[:, 0] - centers) + np.abs(pts[:, 1] - centers)
        assert np.abs(dist - inst.radius).max() < 1e-12
    with pytest.raises(InvalidInput):
        inst.sampler("r")


def test_hard_instance_poisson_budget():
    rng = np.random.default_rng(17)
    inst = gen_hard_instance(16, 1, 1.0, True, rng)
    counts = [len(inst.sample_poisson("p", 30.0, rng)) for _ in range(300)]
    mean_target = 30.0 * inst.total_mass
    assert abs(np.mean(counts) - mean_target) < 3 * math.sqrt(mean_target / 300)


def one_light_instance():
    return HardInstance(
        k=8,
        m=1,
        eps=1.0,
        r=2,
        equal_case=False,
        squares=(
            SquareSpec(0, True, VARIANT_MIX, VARIANT_MIX, 1.0),
            SquareSpec(1, False, VARIANT_T, VARIANT_R, 0.125),
        ),
    )


def test_ak_lower_bound_hand_instance():
    # One oriented light square of mass eps/k = 1/8: each of its four
    # quadrant boxes sees a one-sided discrepancy of mass/2, so the raw
    # total is 2 * mass = 1/4, normalized by M = 9/8 to 2/9.
    inst = one_light_instance()
    bound, family = inst.ak_lower_bound()
    assert bound == pytest.approx(2.0 / 9.0)
    assert len(family) == 4
    assert family.disjoint


def test_ak_lower_bound_is_zero_for_equal():
    rng = np.random.default_rng(19)
    inst = gen_hard_instance(16, 1, 1.0, True, rng)
    bound, family = inst.ak_lower_bound()
    assert bound == 0.0
    assert len(family) == 0


def test_ak_lower_bound_respects_the_rectangle_budget():
    squares = tuple(
        SquareSpec(i, False, VARIANT_T, VARIANT_R, 1.0 / 16) for i in range(4)
    )
    inst = HardInstance(k=8, m=1, eps=1.0, r=4, equal_case=False, squares=squares)
    bound, family = inst.ak_lower_bound()
    assert len(family) == 8  # k // 4 = 2 squares x 4 boxes
    assert bound == pytest.approx((2.0 / 16) * 2 / inst.total_mass)


def test_discretized_instance_matches_the_bound():
    # coarsest lattice: the exact brute-force A_8 equals the light square's
    # l1 mass 1/4, which the four witness boxes already achieve
    inst = one_light_instance()
    p, q, meta = inst.to_distributions(cells_per_square=2)
    assert p.total_mass == q.total_mass == inst.total_mass
    value, _ = ak_distance_bruteforce(p, q, 8)
    assert value == 0.25
    bound, _ = inst.ak_lower_bound()
    assert bound * inst.total_mass <= value


def test_to_distributions_equal_case_sides_agree():
    rng = np.random.default_rng(23)
    inst = gen_hard_instance(16, 1, 0.5, True, rng)
    p, q, meta = inst.to_distributions()
    assert p.axes == q.axes
    assert p.mass == q.mass
    assert meta["equal_case"] is True
    assert meta["total_mass"] == inst.total_mass
    assert len(meta["squares"]) == inst.r
    assert p.total_mass == pytest.approx(inst.total_mass)


def test_to_distributions_validates_cell_count():
    inst = one_light_instance()
    with pytest.raises(InvalidInput):
        inst.to_distributions(cells_per_square=3)
    with pytest.raises(InvalidInput):
        inst.to_distributions(cells_per_square=0)


def test_monotone_map_closed_form():
    f = MonotoneMap(lam1=0.0, lam2=1.0, log_lam3=math.log(2.0), scale=20.0)
    # f(x) = exp(x e^0 + 1) + 2
    assert f.apply(0.0) == pytest.approx(math.e + 2.0)
    assert f.apply(1.0) == pytest.approx(math.exp(2.0) + 2.0)
    with pytest.raises(InvalidInput):
        f.apply(-0.1)
    with pytest.raises(InvalidInput):
        f.apply(1.5)


def test_monotone_map_is_strictly_increasing():
    # materialized values can collapse when lam3 dwarfs exp(g) in binary64,
    # so strict monotonicity is witnessed in log space: a finite log_gap
    # certifies f(y) > f(x) exactly
    rng = np.random.default_rng(29)
    for _ in range(5):
        f = sample_monotone_map(20.0, rng)
        xs = np.sort(rng.random(200))
        gaps = [f.log_gap(float(a), float(b)) for a, b in zip(xs, xs[1:])]
        assert all(math.isfinite(g) for g in gaps)
    # with a modest additive term the materialized values are ordered too
    small = MonotoneMap(lam1=1.2, lam2=3.0, log_lam3=math.log(7.0), scale=16.0)
    ys = [small.apply(x / 200.0) for x in range(201)]
    assert all(a < b for a, b in zip(ys, ys[1:]))


def test_monotone_map_overflow_reporting():
    huge_slope = MonotoneMap(lam1=0.0, lam2=800.0, log_lam3=-math.inf, scale=1e12)
    with pytest.raises(OverflowError):
        huge_slope.apply(1.0)
    huge_offset = MonotoneMap(lam1=0.0, lam2=0.0, log_lam3=800.0, scale=1e12)
    with pytest.raises(OverflowError, match="additive"):
        huge_offset.apply(0.0)
    # log-space accessors still work where apply cannot
    assert huge_slope.log_gap(0.0, 1.0) > 700


def test_log_gap_matches_direct_computation():
    f = MonotoneMap(lam1=1.0, lam2=0.5, log_lam3=0.0, scale=20.0)
    direct = math.log(f.apply(0.8) - f.apply(0.3))
    assert f.log_gap(0.3, 0.8) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(InvalidInput):
        f.log_gap(0.8, 0.3)


def test_triple_coords_match_materialized_values():
    f = MonotoneMap(lam1=0.5, lam2=1.5, log_lam3=math.log(3.0), scale=20.0)
    a, b, c = 0.1, 0.5, 0.9
    fa, fb, fc = f.apply(a), f.apply(b), f.apply(c)
    got = f.triple_coords(a, b, c)
    assert got[0] == pytest.approx(math.log(math.log((fc - fa) / (fb - fa))), rel=1e-9)
    assert got[1] == pytest.approx(math.log(fb - fa), rel=1e-12)
    assert got[2] == pytest.approx(math.log(fa), rel=1e-12)
    with pytest.raises(InvalidInput):
        f.triple_coords(0.5, 0.5, 0.9)


def test_sample_monotone_map_parameter_ranges():
    rng = np.random.default_rng(31)
    w = 50.0
    loglog = math.log(math.log(w))
    log3 = math.log(w) ** 3
    for _ in range(100):
        f = sample_monotone_map(w, rng)
        assert loglog <= f.lam1 <= 2 * loglog
        assert 0.0 <= f.lam2 <= log3
        assert f.log_lam3 <= 2 * log3
    with pytest.raises(InvalidInput):
        sample_monotone_map(10.0, rng)  # below e^e


def test_obfuscation_coords_match_scalar_path():
    seed = 37
    triple = (0.1, 0.5, 0.9)
    scalar = sample_monotone_map(1e6, np.random.default_rng(seed))
    vector = obfuscation_coords(1e6, triple, 1, np.random.default_rng(seed))
    assert vector.shape == (1, 3)
    expected = scalar.triple_coords(*triple)
    assert np.allclose(vector[0], expected, rtol=1e-10)


def test_obfuscation_coords_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidInput):
        obfuscation_coords(1e6, (0.5, 0.4, 0.9), 10, rng)
    with pytest.raises(InvalidInput):
        obfuscation_coords(1e6, (0.1, 0.5, 1.1), 10, rng)
    with pytest.raises(InvalidInput):
        obfuscation_coords(2.0, (0.1, 0.5, 0.9), 10, rng)


def test_obfuscation_tv_shrinks_with_scale():
    # The binned TV between two triples with different gap ratios decays
    # like O(log log log W / log log W), so it must fall as W sweeps
    # 10^3 -> 10^12.
    rng = np.random.default_rng(41)
    t1, t2 = (0.0, 0.2, 0.9), (0.0, 0.7, 0.9)
    estimates = [
        obfuscation_tv(w, t1, t2, 4000, rng).estimate for w in (1e3, 1e6, 1e12)
    ]
    assert estimates[0] > estimates[1] > estimates[2]
    assert estimates[0] - estimates[2] > 0.1


def test_obfuscation_tv_separated_triples_near_zero_at_scale():
    # gaps 0.4 satisfy the separation condition at W >= 10^6; at W = 10^12
    # the laws are nearly indistinguishable
    rng = np.random.default_rng(43)
    est = obfuscation_tv(1e12, (0.0, 0.4, 1.0), (0.0, 0.6, 1.0), 4000, rng)
    assert est.estimate < 0.15
    assert est.cells <= 8**3
