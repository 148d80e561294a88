from fractions import Fraction

import numpy as np
import pytest

from anosovlab import pcf
from anosovlab.errors import DegenerateGradients, NoIntersection, OffLeaf
from anosovlab.flow import SuspensionFlow
from anosovlab.roof import RoofFunction, TrigPolynomial

SEED = 20260808


def small_amp_flow(companion3, amplitude):
    return SuspensionFlow(
        companion3,
        RoofFunction(
            TrigPolynomial.constant(1.0, 3)
            + TrigPolynomial.cosine(amplitude, (1, 0, 0), 3)
        ),
    )


class TestTemporalDistanceSeries:
    def test_constant_roof_vanishes(self, companion3_const_flow):
        quads = pcf.sample_quadrilaterals(companion3_const_flow, 25, seed=SEED)
        worst = max(
            abs(pcf.temporal_distance_series(companion3_const_flow, q)) for q in quads
        )
        assert worst <= 1e-10

    def test_zero_unstable_displacement(self, companion3_flow):
        a = companion3_flow.make_point([0.3, 0.4, 0.5], 0.1)
        w = 0.02 * companion3_flow.stable_frame()[:, 0]
        quad = pcf.Quadrilateral.build(companion3_flow, a, w, np.zeros(3))
        assert pcf.temporal_distance_series(companion3_flow, quad) == 0.0

    def test_zero_stable_displacement(self, companion3_flow):
        a = companion3_flow.make_point([0.3, 0.4, 0.5], 0.1)
        u = companion3_flow.unstable_frame() @ np.array([0.015, -0.01])
        quad = pcf.Quadrilateral.build(companion3_flow, a, np.zeros(3), u)
        assert pcf.temporal_distance_series(companion3_flow, quad) == 0.0

    def test_antisymmetry_under_corner_exchange(self, companion3_flow):
        # moving the corner to b and negating the stable displacement
        # transports the quadrilateral and flips the sign
        rng = np.random.default_rng(5)
        flow = companion3_flow
        for _ in range(10):
            a = flow.make_point(rng.random(3), 0.0)
            w = flow.stable_frame() @ (rng.uniform(-1, 1, 1) * 0.02)
            u = flow.unstable_frame() @ (rng.uniform(-1, 1, 2) * 0.015)
            quad = pcf.Quadrilateral.build(flow, a, w, u)
            value = pcf.temporal_distance_series(flow, quad)
            b = flow.make_point((a.base() + w) % 1.0, 0.0)
            mirrored = pcf.Quadrilateral.build(flow, b, -w, u)
            assert pcf.temporal_distance_series(flow, mirrored) == pytest.approx(
                -value, abs=1e-8
            )

    def test_independent_of_corner_fiber(self, companion3_flow):
        flow = companion3_flow
        w = flow.stable_frame() @ [0.02]
        u = flow.unstable_frame() @ [0.015, -0.01]
        values = []
        for fiber in (0.0, 0.3, 0.8):
            a = flow.make_point([0.3, 0.4, 0.5], fiber)
            quad = pcf.Quadrilateral.build(flow, a, w, u)
            values.append(pcf.temporal_distance_series(flow, quad))
        assert max(values) - min(values) <= 1e-12


class TestQuadrilateral:
    def test_rejects_off_subspace_displacements(self, companion3_flow):
        a = companion3_flow.make_point([0.1, 0.2, 0.3], 0.0)
        with pytest.raises(OffLeaf):
            pcf.Quadrilateral.build(
                companion3_flow, a, np.array([0.01, 0.0, 0.0]), np.zeros(3)
            )

    def test_rejects_oversized(self, companion3_flow):
        a = companion3_flow.make_point([0.1, 0.2, 0.3], 0.0)
        with pytest.raises(NoIntersection):
            pcf.Quadrilateral.build(
                companion3_flow, a, 0.4 * companion3_flow.stable_frame()[:, 0],
                np.zeros(3),
            )


class TestTemporalDistanceGeometric:
    def test_constant_roof(self, companion3_const_flow):
        quads = pcf.sample_quadrilaterals(companion3_const_flow, 5, seed=3)
        for quad in quads:
            assert abs(
                pcf.temporal_distance_geometric(companion3_const_flow, quad)
            ) <= 1e-8

    def test_dual_oracle_agreement(self, companion3_flow):
        quads = pcf.sample_quadrilaterals(companion3_flow, 25, seed=SEED)
        worst = 0.0
        for quad in quads:
            sample = pcf.temporal_distance_sample(companion3_flow, quad)
            worst = max(worst, sample.discrepancy)
        assert worst <= 1e-6

    def test_oversized_displacement_raises(self, companion3_flow):
        a = companion3_flow.make_point([0.3, 0.4, 0.5], 0.0)
        big = 0.4 * companion3_flow.stable_frame()[:, 0]
        quad = pcf.Quadrilateral.build(
            companion3_flow, a, big, np.zeros(3), chart_radius=0.5
        )
        with pytest.raises(NoIntersection):
            pcf.temporal_distance_geometric(companion3_flow, quad)

    def test_tol_floor(self, companion3_flow):
        quad = pcf.sample_quadrilaterals(companion3_flow, 1, seed=1)[0]
        with pytest.raises(ValueError):
            pcf.temporal_distance_geometric(companion3_flow, quad, tol=1e-12)


class TestPcfGradient:
    def test_constant_roof_zero(self, companion3_const_flow):
        flow = companion3_const_flow
        a = flow.make_point([0.1, 0.2, 0.3], 0.0)
        g = pcf.pcf_gradient(
            flow, a, 0.01 * flow.stable_frame()[:, 0],
            flow.unstable_frame() @ [0.01, 0.0],
        )
        assert np.allclose(g, 0.0)

    def test_matches_finite_differences(self, companion3):
        flow = small_amp_flow(companion3, 0.02)
        rng = np.random.default_rng(11)
        u_frame = flow.unstable_frame()
        s_frame = flow.stable_frame()
        h = 4e-6

        def rho(a, w, c):
            quad = pcf.Quadrilateral.build(flow, a, w, u_frame @ c)
            return pcf.temporal_distance_series(flow, quad)

        worst = 0.0
        for _ in range(50):
            a = flow.make_point(rng.random(3), 0.0)
            w = s_frame @ (rng.uniform(-1, 1, 1) * 0.006)
            c = rng.uniform(-1, 1, 2) * 0.01
            grad = pcf.pcf_gradient(flow, a, w, u_frame @ c)
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                fd = (rho(a, w, c + e) - rho(a, w, c - e)) / (2 * h)
                worst = max(worst, abs(fd - grad[j]))
        assert worst <= 1e-7

    def test_nonzero_gradient_found_quickly(self, companion3_flow):
        rng = np.random.default_rng(2)
        flow = companion3_flow
        for draw in range(20):
            a = flow.make_point(rng.random(3), 0.0)
            w = flow.stable_frame() @ (rng.uniform(-1, 1, 1) * 0.02)
            u = flow.unstable_frame() @ (rng.uniform(-1, 1, 2) * 0.015)
            if np.linalg.norm(pcf.pcf_gradient(flow, a, w, u)) > 1e-4:
                return
        pytest.fail("no nonzero gradient within 20 draws")

    def test_cat_map_rejected(self, cat_flow):
        a = cat_flow.make_point([0.3, 0.5], 0.0)
        with pytest.raises(ValueError, match="bunching"):
            pcf.pcf_gradient(
                cat_flow, a, 0.01 * cat_flow.stable_frame()[:, 0],
                0.01 * cat_flow.unstable_frame()[:, 0],
            )


class TestMatchingKernel:
    def test_constant_roof_full_kernel(self, companion3_const_flow):
        flow = companion3_const_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        report = pcf.matching_kernel_dimension(
            flow, bp, [(bp, tuple(0.01 * flow.stable_frame()[:, 0]))]
        )
        assert report.kernel_dim == flow.dim_unstable == 2
        assert report.kernel_basis.shape == (3, 2)

    def test_single_nonzero_gradient(self, companion3_flow):
        flow = companion3_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = pcf.find_independent_pairs(flow, bp, count=1, seed=5)
        report = pcf.matching_kernel_dimension(flow, bp, pairs)
        assert report.kernel_dim == flow.dim_unstable - 1 == 1
        grad = np.array(report.gradients[0])
        kern = np.linalg.lstsq(flow.unstable_frame(), report.kernel_basis, rcond=None)[0]
        assert np.max(np.abs(grad @ kern)) <= 1e-9

    def test_two_independent_gradients_kill_kernel(self, companion3_flow):
        flow = companion3_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = pcf.find_independent_pairs(flow, bp, count=2, seed=5, budget=200)
        report = pcf.matching_kernel_dimension(flow, bp, pairs)
        assert report.kernel_dim == 0

    def test_kernel_dim_invariant_under_stable_transport(self, companion3_flow):
        flow = companion3_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = pcf.find_independent_pairs(flow, bp, count=2, seed=5)
        before = pcf.matching_kernel_dimension(flow, bp, pairs).kernel_dim
        shift = 0.004 * flow.stable_frame()[:, 0]
        bp2 = flow.make_point(bp.base() + shift, 0.0)
        pairs2 = [
            (flow.make_point(a.base() + shift, a.s), w) for a, w in pairs
        ]
        after = pcf.matching_kernel_dimension(flow, bp2, pairs2).kernel_dim
        assert before == after == 0

    def test_budget_exhaustion(self, companion3_const_flow):
        flow = companion3_const_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        with pytest.raises(DegenerateGradients):
            pcf.find_independent_pairs(flow, bp, count=1, seed=0, budget=5)


class TestConjugacy:
    def test_pushforward_intertwines_evolution(self, companion3_flow):
        flow2, conj = pcf.translate_flow(
            companion3_flow, (Fraction(1, 7), Fraction(2, 7), Fraction(3, 7))
        )
        p = companion3_flow.make_point([0.21, 0.84, 0.37], 0.2)
        for t in (0.7, 3.3):
            lhs = conj.apply(flow2, companion3_flow.evolve(p, t))
            rhs = flow2.evolve(conj.apply(flow2, p), t)
            assert flow2.distance(lhs, rhs) <= 1e-10

    def test_identity_conjugacy_exact(self, companion3_flow):
        flow2, conj = pcf.translate_flow(companion3_flow, (0, 0, 0))
        quads = pcf.sample_quadrilaterals(companion3_flow, 10, seed=4)
        assert pcf.conjugacy_invariance_check(
            companion3_flow, flow2, conj, quads
        ) <= 1e-12

    def test_translation_invariance(self, companion3_flow):
        flow2, conj = pcf.translate_flow(
            companion3_flow, (Fraction(1, 7), Fraction(2, 7), Fraction(3, 7))
        )
        quads = pcf.sample_quadrilaterals(companion3_flow, 20, seed=9)
        assert pcf.conjugacy_invariance_check(
            companion3_flow, flow2, conj, quads
        ) <= 1e-6

    def test_time_shift_invariance(self, companion3_flow):
        # composing the conjugacy with a short flow keeps PCF values: they
        # depend on the leaves only, not on the section. Corner fibers stay
        # at zero and t0 below the roof floor, so no crossing remaps the
        # displacement data.
        flow = companion3_flow
        flow2, conj = pcf.translate_flow(
            flow, (Fraction(1, 7), Fraction(2, 7), Fraction(3, 7))
        )
        t0 = 0.21
        rng = np.random.default_rng(10)
        worst = 0.0
        for _ in range(15):
            a = flow.make_point(rng.random(3), 0.0)
            w = flow.stable_frame() @ (rng.uniform(-1, 1, 1) * 0.02)
            u = flow.unstable_frame() @ (rng.uniform(-1, 1, 2) * 0.02)
            quad = pcf.Quadrilateral.build(flow, a, w, u)
            rho1 = pcf.temporal_distance_series(flow, quad)
            moved = pcf.Quadrilateral(
                a=flow2.evolve(conj.apply(flow2, quad.a), t0),
                s_disp=quad.s_disp,
                u_disp=quad.u_disp,
            )
            rho2 = pcf.temporal_distance_series(flow2, moved)
            worst = max(worst, abs(rho1 - rho2))
        assert worst <= 1e-6


class TestReconstruction:
    def test_identity_recovers_identity(self, companion3_flow):
        flow = companion3_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = pcf.find_independent_pairs(flow, bp, count=2, seed=5)
        flow2, conj = pcf.translate_flow(flow, (0, 0, 0))
        rec = pcf.reconstruct_conjugacy_patch(
            flow, flow2, conj, bp, pairs, patch_radius=0.008, grid_n=2
        )
        assert rec.sup_error <= 1e-8

    def test_translation_recovered(self, companion3_flow):
        flow = companion3_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = pcf.find_independent_pairs(flow, bp, count=2, seed=5)
        flow2, conj = pcf.translate_flow(
            flow, (Fraction(1, 7), Fraction(2, 7), Fraction(3, 7))
        )
        rec = pcf.reconstruct_conjugacy_patch(
            flow, flow2, conj, bp, pairs, patch_radius=0.008, grid_n=3
        )
        assert rec.sup_error <= 1e-4

    def test_constant_roof_degenerate(self, companion3_const_flow):
        flow = companion3_const_flow
        bp = flow.make_point([0.37, 0.61, 0.22], 0.0)
        pairs = [
            (bp, tuple(0.01 * flow.stable_frame()[:, 0])),
            (bp, tuple(0.005 * flow.stable_frame()[:, 0])),
        ]
        flow2, conj = pcf.translate_flow(flow, (0, 0, 0))
        with pytest.raises(DegenerateGradients):
            pcf.reconstruct_conjugacy_patch(flow, flow2, conj, bp, pairs)


class TestSampleExports:
    def test_csv_shapes(self, companion3_flow):
        quads = pcf.sample_quadrilaterals(companion3_flow, 3, seed=0)
        samples = [pcf.temporal_distance_sample(companion3_flow, q) for q in quads]
        header = pcf.sample_csv_header(3)
        rows = pcf.sample_csv_rows(samples)
        assert len(rows) == 3
        assert all(len(r) == len(header) for r in rows)
        for s, row in zip(samples, rows):
            assert row[-1] == s.discrepancy <= 1e-6
