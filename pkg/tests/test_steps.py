import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharp_subgrad.core import ParameterInconsistencyError, StepKind, ZeroGradientError
from sharp_subgrad.rng import SplitMix64
from sharp_subgrad.steps import (
    ContractionParams,
    RateVariant,
    baseline_steps,
    constraint_step,
    contraction_factor,
    gamma_update_cond,
    gamma_update_eps,
    polyak_step,
    v_f,
)


class TestVf:
    def test_zero_gradient_branch(self):
        assert v_f(np.zeros(3), np.ones(3), np.zeros(3)) == 0.0

    def test_coincident_points(self):
        x = np.array([1.0, 2.0])
        assert v_f(np.array([0.3, 0.4]), x, x) == 0.0

    def test_norm_objective_case(self):
        # f = ||.||_2 at x = (3, 4), y = 0: gradient (0.6, 0.8), v_f = 5
        assert v_f(np.array([0.6, 0.8]), np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(5.0)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=200, deadline=None)
    def test_positive_scaling_invariance(self, t):
        grad = np.array([0.3, -1.2, 0.5])
        x = np.array([1.0, 2.0, -0.5])
        y = np.array([0.0, 1.0, 0.25])
        assert v_f(t * grad, x, y) == pytest.approx(v_f(grad, x, y), rel=1e-9)


class TestPolyakStep:
    def test_hand_value(self):
        assert polyak_step(2.0, 1.0, 2.0, 1.0) == pytest.approx(0.5)

    def test_zero_numerator(self):
        assert polyak_step(1.0, 1.0, 1.0, 1.0) == 0.0

    def test_negative_numerator_flags_as_zero_step(self):
        assert polyak_step(0.5, 1.0, 1.0, 1.0) == 0.0

    def test_one_step_exact_convergence_on_abs(self):
        # f = |x| at x = 1, f_bar = 0, M_f = 1: h = 1 and x - h f'(x) = 0
        h = polyak_step(1.0, 0.0, 1.0, 1.0)
        assert h == 1.0
        assert 1.0 - h * 1.0 == 0.0

    def test_zero_gradient_raises(self):
        with pytest.raises(ZeroGradientError):
            polyak_step(2.0, 1.0, 1.0, 1e-13)


class TestConstraintStep:
    def test_hand_values(self):
        assert constraint_step(0.5, 1.0) == pytest.approx(0.5)
        assert constraint_step(1.0, 2.0) == pytest.approx(0.25)

    def test_continuity_at_boundary(self):
        assert constraint_step(1e-14, 1.0) == pytest.approx(0.0, abs=1e-13)

    def test_zero_gradient_raises(self):
        with pytest.raises(ZeroGradientError):
            constraint_step(0.5, 1e-13)


class TestBaselineSteps:
    def test_hand_values(self):
        h_f, h_g = baseline_steps(0.1, 2.0, 1.0)
        assert h_f == pytest.approx(0.025)
        assert h_g == pytest.approx(1.0)

    def test_small_epsilon(self):
        h_f, _ = baseline_steps(1e-3, 1.0, 1.0)
        assert h_f == pytest.approx(1e-3)

    def test_zero_gradient_raises(self):
        with pytest.raises(ZeroGradientError):
            baseline_steps(0.1, 0.0, 1.0)
        with pytest.raises(ZeroGradientError):
            baseline_steps(0.1, 1.0, 0.0)


class TestGammaUpdates:
    def test_eps_productive_saturates_to_zero(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=1.0)
        assert gamma_update_eps(0.5, StepKind.PRODUCTIVE, params) == 0.0

    def test_eps_nonproductive_hand_value(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=1.0)
        out = gamma_update_eps(0.5, StepKind.NONPRODUCTIVE, params, grad_g_norm=2.0)
        assert out == pytest.approx(0.5 * math.sqrt(1.0 - 0.5 / 4.0))
        assert out == pytest.approx(0.467707, abs=1e-6)

    def test_eps_productive_hand_value(self):
        params = ContractionParams(alpha=1.0, m_f=2.0, big_c=1.0)
        out = gamma_update_eps(0.8, StepKind.PRODUCTIVE, params)
        assert out == pytest.approx(0.8 * math.sqrt(0.75))
        assert out == pytest.approx(0.692820, abs=1e-6)

    def test_cond_productive_saturates(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=1.0)
        assert gamma_update_cond(0.5, StepKind.PRODUCTIVE, params) == 0.0

    def test_cond_matches_eps_at_c_equal_one(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=1.0)
        a = gamma_update_cond(0.5, StepKind.NONPRODUCTIVE, params, grad_g_norm=2.0)
        b = gamma_update_eps(0.5, StepKind.NONPRODUCTIVE, params, grad_g_norm=2.0)
        assert a == b == pytest.approx(0.467707, abs=1e-6)

    def test_cond_productive_hand_value(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=0.5)
        out = gamma_update_cond(0.9, StepKind.PRODUCTIVE, params)
        assert out == pytest.approx(0.9 * math.sqrt(1.0 - 1.0 / 3.0))
        assert out == pytest.approx(0.734847, abs=1e-6)

    def test_negative_radicand_raises(self):
        params = ContractionParams(alpha=2.0, m_f=1.0, big_c=1.0)
        with pytest.raises(ParameterInconsistencyError):
            gamma_update_eps(0.5, StepKind.NONPRODUCTIVE, params, grad_g_norm=0.5)

    @pytest.mark.parametrize("update", [gamma_update_eps, gamma_update_cond])
    def test_strictly_decreasing_when_radicand_interior(self, update):
        params = ContractionParams(alpha=0.5, m_f=2.0, big_c=0.8)
        stream = SplitMix64(5)
        for _ in range(200):
            gamma = 0.05 + 0.9 * stream.uniform()
            for kind, gn in ((StepKind.PRODUCTIVE, None), (StepKind.NONPRODUCTIVE, 2.0)):
                out = update(gamma, kind, params, grad_g_norm=gn)
                assert 0.0 < out < gamma


class TestContractionFactor:
    def test_eps_saturated(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, big_c=1.0)
        assert contraction_factor(params, RateVariant.EPS_PRODUCTIVE) == 0.0

    def test_cond_hand_value(self):
        params = ContractionParams(alpha=1.0, m_f=2.0, big_c=1.0)
        assert contraction_factor(params, RateVariant.COND_PRODUCTIVE) == pytest.approx(0.75)

    def test_uniform_hand_value(self):
        params = ContractionParams(alpha=1.0, m_f=1.0, m_g=2.0, big_c=0.5)
        assert contraction_factor(params, RateVariant.UNIFORM_REMARK) == pytest.approx(0.9375)

    def test_out_of_range_raises(self):
        params = ContractionParams(alpha=3.0, m_f=1.0, big_c=1.0)
        with pytest.raises(ParameterInconsistencyError):
            contraction_factor(params, RateVariant.EPS_PRODUCTIVE)

    def test_productive_factors_coincide_at_c_one(self):
        c = 1.0
        assert 2.0 * c - c * c == c / (2.0 - c) == 1.0


class TestNormalizedGapInequality:
    """f(x) - f* <= M_f * v_f(grad f(x), x, x_*) for quasiconvex Lipschitz f."""

    def test_equality_for_distance_objective(self):
        stream = SplitMix64(21)
        x_star = np.array([0.5, -1.0, 2.0])
        for _ in range(1000):
            x = x_star + stream.normals(3)
            d = float(np.linalg.norm(x - x_star))
            if d < 1e-9:
                continue
            grad = (x - x_star) / d
            assert d == pytest.approx(1.0 * v_f(grad, x, x_star), rel=1e-12)

    def test_max_affine_objective(self):
        # rows engineered so 0 lies in their convex hull: the minimum of
        # f(x) = max_i <a_i, x - x_star> is 0, attained at x_star
        stream = SplitMix64(22)
        for trial in range(1000):
            n, m = 4, 5
            rows = np.vstack([stream.normals(n) for _ in range(m)])
            rows = np.vstack([rows, -rows.mean(axis=0)])
            x_star = stream.normals(n)
            m_f = max(float(np.linalg.norm(r)) for r in rows)
            x = x_star + stream.normals(n)
            vals = rows @ (x - x_star)
            i = int(np.argmax(vals))
            f_gap = float(vals[i])
            bound = m_f * v_f(rows[i], x, x_star)
            assert f_gap <= bound + 1e-12 * max(1.0, abs(f_gap))
