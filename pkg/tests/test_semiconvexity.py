"""Separately convex integrands, Jensen defect, residual ratio,
semicontinuity experiment."""

import numpy as np
import pytest

from haarriesz.fields import haar_polynomial
from haarriesz.grid import GridFunction, embed
from haarriesz.semiconvexity import (
    Integrand,
    VectorField,
    a0_apply,
    a0_max_entry,
    check_separately_convex,
    contrast_sequence,
    jensen_range_check,
    oscillation_sequence,
    registry_integrands,
    residual_ratio,
    semicontinuity_experiment,
)


def random_haar_vector(J: int, seed: int, index: int, max_level=None) -> VectorField:
    top = (J - 1) if max_level is None else max_level
    return VectorField(
        [haar_polynomial(2, J, seed, index=2 * index + c, max_level=top) for c in (0, 1)]
    )


class TestSeparateConvexity:
    def test_registry_members_pass(self):
        for f in registry_integrands():
            assert check_separately_convex(f), f.name

    def test_rejects_concave(self):
        bad = Integrand("neg_sq", lambda a: -(a[..., 0] ** 2), 2, 2.0, 1.0)
        assert not check_separately_convex(bad)

    def test_accepts_product(self):
        ab = Integrand("ab", lambda a: a[..., 0] * a[..., 1], 2, 2.0, 1.0)
        assert check_separately_convex(ab)

    def test_rejects_saddle_in_single_axis(self):
        # convex in a, concave in b
        bad = Integrand("mixed", lambda a: a[..., 0] ** 2 - a[..., 1] ** 2, 2, 2.0, 1.0)
        assert not check_separately_convex(bad)


class TestA0:
    def test_single_variable_components_vanish(self):
        v1 = embed(lambda x, y: np.sin(2 * np.pi * x) + x * 0, 2, 5, quad_order=5)
        v2 = embed(lambda x, y: np.cos(2 * np.pi * y) + y * 0, 2, 5, quad_order=5)
        v = VectorField([v1, v2])
        assert a0_max_entry(v) <= 1e-10

    def test_cross_entry_spectral_derivative(self):
        v1 = embed(lambda x, y: np.sin(2 * np.pi * y), 2, 6, quad_order=5)
        v = VectorField([v1, GridFunction.zeros(2, 6)])
        entries = a0_apply(v)
        expect = embed(lambda x, y: 2 * np.pi * np.cos(2 * np.pi * y), 2, 6, quad_order=5)
        assert np.abs(entries[(2, 1)].values - expect.values).max() <= 1e-8
        assert entries[(1, 2)].lp_norm(2) <= 1e-12

    def test_constant_vanishes(self):
        v = VectorField([GridFunction.constant(2, 4, 3.0), GridFunction.constant(2, 4, -1.0)])
        assert a0_max_entry(v) <= 1e-14


class TestJensen:
    def test_product_of_independent_blocks_is_tight(self):
        from haarriesz.fields import single_haar_block

        regs = {f.name: f for f in registry_integrands()}
        v = VectorField(
            [single_haar_block(2, 4, 0, (0, 0), (1, 0)),
             single_haar_block(2, 4, 0, (0, 0), (0, 1))]
        )
        defect = jensen_range_check(v, regs["ab"], 0)
        assert defect == pytest.approx(0.0, abs=1e-12)

    def test_convex_quadratic(self):
        quad = Integrand("sq", lambda a: a[..., 0] ** 2 + a[..., 1] ** 2, 2, 2.0, 2.0)
        v = random_haar_vector(4, seed=60, index=0)
        assert jensen_range_check(v, quad, 1) >= -1e-9

    @pytest.mark.parametrize("M", [0, 1, 2, 3])
    def test_registry_over_random_fields(self, M):
        regs = registry_integrands()
        for i in range(50):
            v = random_haar_vector(4, seed=61, index=i)
            for f in regs:
                assert jensen_range_check(v, f, M) >= -1e-9

    def test_rejects_non_convex_integrand(self):
        bad = Integrand("neg_sq", lambda a: -(a[..., 0] ** 2), 2, 2.0, 1.0)
        v = random_haar_vector(4, seed=62, index=0)
        with pytest.raises(ValueError, match="convex"):
            jensen_range_check(v, bad, 1)

    def test_three_component_integrand(self):
        f3 = Integrand(
            "abc_mix",
            lambda a: a[..., 0] * a[..., 1] + a[..., 1] * a[..., 2] + a[..., 0] ** 2,
            3,
            2.0,
            2.0,
        )
        assert check_separately_convex(f3, box=2.0, step=0.25)
        v = VectorField(
            [haar_polynomial(3, 3, seed=65, index=i, max_level=2) for i in range(3)]
        )
        for M in (0, 1, 2):
            assert jensen_range_check(v, f3, M) >= -1e-9


class TestResidualRatio:
    def test_exact_zero_case(self):
        v1 = embed(lambda x, y: np.sin(2 * np.pi * x) + 0 * x, 2, 6, quad_order=5)
        v2 = embed(lambda x, y: np.sin(2 * np.pi * y) + 0 * y, 2, 6, quad_order=5)
        assert residual_ratio(VectorField([v1, v2]), 2.0) == 0.0

    def test_block_case_finite(self):
        from haarriesz.fields import single_haar_block

        v = VectorField(
            [single_haar_block(2, 5, 0, (0, 0), (0, 1)), GridFunction.zeros(2, 5)]
        )
        r = residual_ratio(v, 2.0)
        assert np.isfinite(r) and r > 0

    def test_rejects_p_below_two(self):
        v = random_haar_vector(4, seed=63, index=0)
        with pytest.raises(ValueError):
            residual_ratio(v, 1.5)

    def test_stability_under_refinement(self):
        # same Haar-polynomial family at J = 6 and J = 7
        def max_ratio(J: int) -> float:
            best = 0.0
            for i in range(40):
                v = random_haar_vector(J, seed=64, index=i, max_level=3)
                best = max(best, residual_ratio(v, 2.0))
            return best

        r6, r7 = max_ratio(6), max_ratio(7)
        assert abs(r7 - r6) <= 0.2 * r6


class TestSemicontinuity:
    def setup_method(self):
        self.regs = {f.name: f for f in registry_integrands()}
        self.phi = GridFunction.constant(2, 8, 1.0)

    def test_compliant_product_sequence(self):
        rows = semicontinuity_experiment(
            self.regs["ab"], self.phi, [1, 2, 3, 4],
            lambda r: oscillation_sequence(2, 8, r),
        )
        for row in rows:
            assert row.compliant
            assert abs(row.I_r) <= 1e-10
            assert row.I_r >= row.I_limit - 1e-8

    def test_convex_integrand_classical(self):
        quad = Integrand("sq", lambda a: a[..., 0] ** 2 + a[..., 1] ** 2, 2, 2.0, 2.0)
        rows = semicontinuity_experiment(
            quad, self.phi, [1, 2, 3], lambda r: oscillation_sequence(2, 8, r)
        )
        for row in rows:
            assert row.I_r >= row.I_limit - 1e-9

    def test_contrast_violates(self):
        rows = semicontinuity_experiment(
            self.regs["ab"], self.phi, [2, 3],
            lambda r: contrast_sequence(2, 8, r),
        )
        for row in rows:
            assert not row.compliant
            assert row.a0_norm > 1e-8
        assert max(r.I_limit - r.I_r for r in rows) >= 0.4

    def test_positively_correlated_contrast_converges_upward(self):
        # same-sign components: the product integrand converges to 1/2, not
        # to the weak-limit value 0
        rows = semicontinuity_experiment(
            self.regs["ab"], self.phi, [3],
            lambda r: contrast_sequence(2, 8, r, amplitudes=(1.0, 1.0)),
        )
        assert rows[0].I_r == pytest.approx(0.5, abs=5e-3)
        assert not rows[0].compliant

    def test_rejects_negative_test_function(self):
        phi = GridFunction.constant(2, 8, -1.0)
        with pytest.raises(ValueError, match="nonnegative"):
            semicontinuity_experiment(
                self.regs["ab"], phi, [1], lambda r: oscillation_sequence(2, 8, r)
            )

    def test_nonconstant_test_function(self):
        phi = embed(lambda x, y: 1.0 + 0.5 * np.cos(2 * np.pi * x), 2, 8, quad_order=3)
        rows = semicontinuity_experiment(
            self.regs["quad_cross"], phi, [2, 3, 4],
            lambda r: oscillation_sequence(2, 8, r),
        )
        for row in rows:
            assert row.I_r >= row.I_limit - 1e-8
