from fractions import Fraction

import numpy as np
import pytest

from oracles import distance_mp, evolve_mp

from anosovlab import mpspec
from anosovlab.errors import OffLeaf
from anosovlab.flow import SuspensionFlow, wrap_unit
from anosovlab.roof import RoofFunction, birkhoff_sum


class TestEvolve:
    def test_time_zero_is_identity(self, cat_flow):
        p = cat_flow.make_point([0.3, 0.55], 0.2)
        assert cat_flow.distance(cat_flow.evolve(p, 0.0), p) == 0.0

    def test_constant_roof_single_crossing(self, cat_map):
        flow = SuspensionFlow(cat_map, RoofFunction.constant(1.0, 2))
        p = flow.make_point([0.3, 0.7], 0.0)
        q = flow.evolve(p, 1.0)
        expected = flow.base_apply(np.array([0.3, 0.7]))
        assert np.allclose(q.base(), expected, atol=1e-14)
        assert q.s == pytest.approx(0.0, abs=1e-14)

    def test_additivity_forward(self, cat_flow):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            p = cat_flow.make_point(rng.random(2), 0.0)
            t1, t2 = rng.uniform(0.0, 100.0, 2)
            a = cat_flow.evolve(cat_flow.evolve(p, t1), t2)
            b = cat_flow.evolve(p, t1 + t2)
            worst = max(worst, cat_flow.distance(a, b))
        assert worst <= 1e-9

    def test_additivity_shallow_mixed_signs(self, cat_flow):
        # deep backward-then-forward excursions amplify double rounding at
        # the Lyapunov rate, so the additivity check keeps excursions short
        rng = np.random.default_rng(43)
        worst = 0.0
        for _ in range(100):
            p = cat_flow.make_point(rng.random(2), 0.0)
            t1, t2 = rng.uniform(-8.0, 8.0, 2)
            a = cat_flow.evolve(cat_flow.evolve(p, t1), t2)
            b = cat_flow.evolve(p, t1 + t2)
            worst = max(worst, cat_flow.distance(a, b))
        assert worst <= 1e-9

    def test_roof_crossing_consistency(self, cat_flow, cat_map):
        x0 = np.array([0.123, 0.456])
        for n in range(1, 21):
            t = birkhoff_sum(cat_flow.roof, cat_map, tuple(x0), n)
            q = cat_flow.evolve(cat_flow.make_point(x0, 0.0), t)
            xn = x0.copy()
            for _ in range(n):
                xn = cat_flow.base_apply(xn)
            assert cat_flow.distance(q, cat_flow.make_point(xn, 0.0)) <= 1e-8

    def test_rejects_huge_time(self, cat_flow):
        with pytest.raises(ValueError):
            cat_flow.evolve(cat_flow.make_point([0.1, 0.1], 0.0), 2e6)


class TestDistance:
    def test_identification_straddling(self, cat_flow):
        x = np.array([0.37, 0.21])
        r = cat_flow.roof(x)
        below = cat_flow.make_point(x, r - 1e-6)
        above = cat_flow.evolve(below, 2e-6)
        assert cat_flow.distance(below, above) <= 1e-5


class TestTimeAdjustment:
    def test_constant_roof_vanishes(self, cat_map):
        flow = SuspensionFlow(cat_map, RoofFunction.constant(1.0, 2))
        sdir = flow.stable_frame()[:, 0]
        x = np.array([0.3, 0.55])
        assert flow.time_adjustment(x, x + 0.03 * sdir, "stable") == 0.0

    def test_same_point_vanishes(self, cat_flow):
        x = np.array([0.3, 0.55])
        assert cat_flow.time_adjustment(x, x, "stable") == 0.0
        assert cat_flow.time_adjustment(x, x, "unstable") == 0.0

    def test_off_leaf_rejection(self, cat_flow):
        x = np.array([0.3, 0.55])
        with pytest.raises(OffLeaf):
            cat_flow.time_adjustment(x, x + np.array([0.01, 0.0]), "stable")

    def test_defining_property_stable(self, cat_flow, cat_map):
        # the adjusted point must track (x, 0) forward in time: distance at
        # t = 30 below 1e-6 with the adjustment, above 1e-2 without
        split = mpspec.splitting(cat_map)
        x = [Fraction(3, 10), Fraction(11, 20)]
        w_fr = split.project_fractions(0.04 * cat_flow.stable_frame()[:, 0], "stable")
        y_fr = [a + b for a, b in zip(x, w_fr)]
        delta = cat_flow.time_adjustment(
            [float(v) for v in x], [float(v) for v in y_fr], "stable"
        )
        a30 = evolve_mp(cat_flow, x, 0.0, 30.0)
        b30 = evolve_mp(cat_flow, y_fr, delta, 30.0)
        b30_bare = evolve_mp(cat_flow, y_fr, 0.0, 30.0)
        assert distance_mp(cat_flow, a30, b30) < 1e-6
        assert distance_mp(cat_flow, a30, b30_bare) > 1e-2

    def test_defining_property_unstable(self, cat_flow, cat_map):
        split = mpspec.splitting(cat_map)
        x = [Fraction(3, 10), Fraction(11, 20)]
        u_fr = split.project_fractions(
            0.04 * cat_flow.unstable_frame()[:, 0], "unstable"
        )
        y_fr = [a + b for a, b in zip(x, u_fr)]
        delta = cat_flow.time_adjustment(
            [float(v) for v in x], [float(v) for v in y_fr], "unstable"
        )
        a = evolve_mp(cat_flow, x, 0.0, -30.0)
        b = evolve_mp(cat_flow, y_fr, delta, -30.0)
        assert distance_mp(cat_flow, a, b) < 1e-6

    def test_companion3_unstable_series_converges(self, companion3_flow):
        x = np.array([0.21, 0.47, 0.83])
        u = companion3_flow.unstable_frame() @ np.array([0.02, 0.013])
        value = companion3_flow.time_adjustment(x, x + u, "unstable")
        assert np.isfinite(value) and abs(value) < 0.1


class TestStrongManifoldPoint:
    def test_zero_displacement(self, cat_flow):
        p = cat_flow.make_point([0.3, 0.55], 0.1)
        assert cat_flow.strong_manifold_point(p, np.zeros(2)) == p

    def test_constant_roof_keeps_fiber(self, cat_map):
        flow = SuspensionFlow(cat_map, RoofFunction.constant(1.0, 2))
        p = flow.make_point([0.3, 0.55], 0.4)
        v = 0.03 * flow.stable_frame()[:, 0]
        q = flow.strong_manifold_point(p, v)
        assert np.allclose(q.base(), (p.base() + v) % 1.0, atol=1e-14)
        assert q.s == pytest.approx(0.4, abs=1e-14)

    def test_asymptotic_contraction_monotone(self, cat_flow, cat_map):
        split = mpspec.splitting(cat_map)
        x = [Fraction(3, 10), Fraction(11, 20)]
        w_fr = split.project_fractions(0.04 * cat_flow.stable_frame()[:, 0], "stable")
        y_fr = [a + b for a, b in zip(x, w_fr)]
        q = cat_flow.strong_manifold_point(
            cat_flow.make_point([float(v) for v in x], 0.0),
            np.array([float(v) for v in w_fr]),
        )
        dists = [
            distance_mp(
                cat_flow, evolve_mp(cat_flow, x, 0.0, t), evolve_mp(cat_flow, y_fr, q.s, t)
            )
            for t in (10.0, 20.0, 30.0)
        ]
        assert dists[0] > dists[1] > dists[2]

    def test_off_leaf(self, cat_flow):
        p = cat_flow.make_point([0.3, 0.55], 0.0)
        with pytest.raises(OffLeaf):
            cat_flow.strong_manifold_point(p, np.array([0.01, 0.013]))

    def test_chart_radius_enforced(self, cat_flow):
        p = cat_flow.make_point([0.3, 0.55], 0.0)
        with pytest.raises(OffLeaf, match="chart"):
            cat_flow.strong_manifold_point(p, 0.2 * cat_flow.stable_frame()[:, 0])

    def test_weak_leaf_consistency(self, cat_flow, cat_map):
        # flowing then displacing along the image leaf agrees with
        # displacing first and flowing, once displacements are matched by
        # the base derivative
        x0 = np.array([0.123, 0.456])
        v = 0.01 * cat_flow.stable_frame()[:, 0]
        n = 3
        t = birkhoff_sum(cat_flow.roof, cat_map, tuple(x0), n)
        p = cat_flow.make_point(x0, 0.0)
        lhs = cat_flow.evolve(cat_flow.strong_manifold_point(p, v), t)
        xn = x0.copy()
        vn = v.copy()
        lin = cat_map.as_array()
        for _ in range(n):
            xn = cat_flow.base_apply(xn)
            vn = lin @ vn
        rhs = cat_flow.strong_manifold_point(cat_flow.evolve(p, t), vn)
        assert cat_flow.distance(lhs, rhs) <= 1e-8


class TestExactOrbits:
    def test_rational_orbit_matches_float(self, companion3_flow):
        pt = companion3_flow.rationalize([0.3, 0.6, 0.1])
        exact = companion3_flow.base_apply_exact(pt)
        floats = companion3_flow.base_apply(np.array([0.3, 0.6, 0.1]))
        assert np.allclose([float(v) for v in exact], floats, atol=1e-14)

    def test_inverse_round_trip(self, companion3_flow):
        pt = companion3_flow.rationalize([0.31, 0.62, 0.13])
        back = companion3_flow.base_apply_inv_exact(
            companion3_flow.base_apply_exact(pt)
        )
        assert back == pt

    def test_birkhoff_exact_matches_module_sum(self, cat_flow, cat_map):
        # the float orbit drifts from the exact one at the Lyapunov rate, so
        # the horizon stays short of the double-precision shadowing limit
        x = (0.37, 0.91)
        direct = birkhoff_sum(cat_flow.roof, cat_map, x, 10)
        assert cat_flow.birkhoff_exact(x, 10) == pytest.approx(direct, abs=1e-11)


def test_trajectory_rows(cat_flow):
    p = cat_flow.make_point([0.2, 0.8], 0.0)
    rows = cat_flow.trajectory_rows(p, [0.0, 0.5, 1.0])
    assert len(rows) == 3 and len(rows[0]) == 4
    assert rows[0][0] == 0.0


def test_wrap_unit():
    assert np.allclose(wrap_unit(np.array([0.75, -0.75])), [-0.25, 0.25])
