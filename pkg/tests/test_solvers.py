import numpy as np
import pytest

from sharp_subgrad.core import (
    Aggregation,
    Algorithm,
    FBarModel,
    GroundTruth,
    SolverConfig,
    StepKind,
    ZeroGradientError,
    vector,
)
from sharp_subgrad.problems import Family, generate
from sharp_subgrad.solvers import (
    run_baseline_switching,
    run_conditional_switching,
    run_eps_switching,
    select_constraint,
)

from conftest import affine_1d, desk_spec, one_d_instance


def _config(algorithm, *, eps=0.1, f_bar=0.0, iters=10, big_c=1.0, **kwargs):
    return SolverConfig(
        algorithm=algorithm,
        epsilon=eps,
        fbar=FBarModel(f_bar=f_bar, big_c=big_c),
        max_iters=iters,
        **kwargs,
    )


class TestSelectConstraint:
    def test_all_feasible(self):
        d = select_constraint([-1.0, -2.0], 0.0, Aggregation.MAX_OF_CONSTRAINTS)
        assert d.kind is StepKind.PRODUCTIVE
        assert d.aggregated_g == -1.0

    def test_first_violated_picks_smallest_index(self):
        d = select_constraint([-1.0, 0.2, 0.3], 0.1, Aggregation.FIRST_VIOLATED)
        assert d.kind is StepKind.NONPRODUCTIVE
        assert d.constraint_index == 1
        assert d.aggregated_g == 0.2

    def test_max_mode_picks_argmax(self):
        d = select_constraint([-1.0, 0.2, 0.3], 0.1, Aggregation.MAX_OF_CONSTRAINTS)
        assert d.kind is StepKind.NONPRODUCTIVE
        assert d.constraint_index == 2
        assert d.aggregated_g == 0.3

    def test_tie_goes_to_lowest_index(self):
        d = select_constraint([0.3, 0.3], 0.1, Aggregation.MAX_OF_CONSTRAINTS)
        assert d.constraint_index == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_constraint([], 0.0, Aggregation.MAX_OF_CONSTRAINTS)


class TestEpsSwitchingHandSimulations:
    def test_one_step_to_optimum(self):
        # f = |x|, g = x - 10, x0 = 1: g(1) = -9 <= eps, productive, h = 1
        problem = one_d_instance([affine_1d(1.0, 10.0)])
        cfg = _config(Algorithm.EPS_SWITCHING, iters=1, start_point=vector([1.0]))
        trace = run_eps_switching(problem, cfg)
        assert trace.productive_set == (0,)
        rec = trace.records[0]
        assert rec.kind is StepKind.PRODUCTIVE
        assert rec.step_size == 1.0
        assert trace.final_point[0] == 0.0

    def test_nonproductive_then_productive(self):
        # f = |x|, g = x - 0.5, x0 = 1: g = 0.5 > eps, h = 0.5, x1 = 0.5
        problem = one_d_instance([affine_1d(1.0, 0.5)])
        cfg = _config(Algorithm.EPS_SWITCHING, iters=2, start_point=vector([1.0]))
        trace = run_eps_switching(problem, cfg)
        assert trace.nonproductive_set == (0,)
        assert trace.productive_set == (1,)
        assert trace.records[0].step_size == pytest.approx(0.5)
        assert trace.records[1].point is None
        assert trace.records[1].f_value == pytest.approx(0.5)
        assert trace.records[1].g_value == pytest.approx(0.0)

    def test_zero_iterations(self):
        problem = one_d_instance([affine_1d(1.0, 10.0)])
        cfg = _config(Algorithm.EPS_SWITCHING, iters=0, start_point=vector([1.0]))
        trace = run_eps_switching(problem, cfg)
        assert len(trace) == 0
        assert trace.final_point[0] == 1.0

    def test_wrong_algorithm_rejected(self):
        problem = one_d_instance([affine_1d(1.0, 10.0)])
        with pytest.raises(ValueError):
            run_eps_switching(problem, _config(Algorithm.BASELINE_SWITCHING))


class TestConditionalSwitchingHandSimulations:
    def test_productive_when_gap_dominates(self):
        # f - f_bar = 1 >= g = -9: productive, lands on 0
        problem = one_d_instance([affine_1d(1.0, 10.0)])
        cfg = _config(Algorithm.CONDITIONAL_SWITCHING, iters=1, start_point=vector([1.0]))
        trace = run_conditional_switching(problem, cfg)
        assert trace.productive_set == (0,)
        assert trace.final_point[0] == 0.0

    def test_nonproductive_when_constraint_dominates(self):
        # f - f_bar = 1 < g = 2*1 - 0.5 = 1.5: nonproductive,
        # h = 1.5/4, x1 = 1 - h * 2 = 0.25 (lands on the boundary g = 0)
        problem = one_d_instance([affine_1d(2.0, 0.5)])
        cfg = _config(Algorithm.CONDITIONAL_SWITCHING, iters=1, start_point=vector([1.0]))
        trace = run_conditional_switching(problem, cfg)
        assert trace.nonproductive_set == (0,)
        assert trace.records[0].step_size == pytest.approx(1.5 / 4.0)
        assert trace.final_point[0] == pytest.approx(0.25)
        assert 2.0 * trace.final_point[0] - 0.5 == pytest.approx(0.0)

    def test_zero_iterations(self):
        problem = one_d_instance([affine_1d(2.0, 0.5)])
        cfg = _config(Algorithm.CONDITIONAL_SWITCHING, iters=0, start_point=vector([1.0]))
        assert len(run_conditional_switching(problem, cfg)) == 0


class TestBaselineSwitchingHandSimulations:
    def test_single_step(self):
        # g == -1 always feasible: productive h = eps / 1 = 0.1, x1 = 0.9
        problem = one_d_instance([affine_1d(0.0, 1.0)])
        cfg = _config(Algorithm.BASELINE_SWITCHING, iters=1, start_point=vector([1.0]))
        trace = run_baseline_switching(problem, cfg)
        assert trace.records[0].step_size == pytest.approx(0.1)
        assert trace.final_point[0] == pytest.approx(0.9)

    def test_linear_descent_without_overshoot(self):
        problem = one_d_instance([affine_1d(0.0, 1.0)])
        cfg = _config(Algorithm.BASELINE_SWITCHING, iters=10, start_point=vector([1.0]))
        trace = run_baseline_switching(problem, cfg)
        for rec in trace.records:
            assert rec.f_value == pytest.approx(1.0 - 0.1 * rec.iteration)
        assert trace.final_point[0] == pytest.approx(0.0, abs=1e-12)

    def test_zero_iterations(self):
        problem = one_d_instance([affine_1d(0.0, 1.0)])
        cfg = _config(Algorithm.BASELINE_SWITCHING, iters=0, start_point=vector([1.0]))
        assert len(run_baseline_switching(problem, cfg)) == 0


class TestBranchFidelity:
    @pytest.mark.parametrize("seed", range(5))
    def test_eps_branches_match_threshold(self, seed):
        gen = generate(desk_spec(Family.SYNTHETIC_SHARP, seed))
        cfg = _config(Algorithm.EPS_SWITCHING, eps=1e-3, iters=150)
        trace = run_eps_switching(gen.instance, cfg)
        for rec in trace.records:
            if rec.kind is StepKind.PRODUCTIVE:
                assert rec.g_value <= cfg.epsilon
            else:
                assert rec.g_value > cfg.epsilon

    @pytest.mark.parametrize("seed", range(5))
    def test_conditional_branches_match_test(self, seed):
        gen = generate(desk_spec(Family.SYNTHETIC_SHARP, seed))
        cfg = _config(Algorithm.CONDITIONAL_SWITCHING, eps=1e-3, iters=150)
        trace = run_conditional_switching(gen.instance, cfg)
        for rec in trace.records:
            gap = rec.f_value - cfg.fbar.f_bar
            if rec.kind is StepKind.PRODUCTIVE:
                assert gap >= rec.g_value
            else:
                assert gap < rec.g_value


class TestDistanceMonotonicity:
    """With exact f_bar the distance to X_* never increases (both schemes)."""

    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize(
        "runner, algorithm",
        [
            (run_eps_switching, Algorithm.EPS_SWITCHING),
            (run_conditional_switching, Algorithm.CONDITIONAL_SWITCHING),
        ],
    )
    def test_nonincreasing_distance(self, runner, algorithm, seed):
        gen = generate(desk_spec(Family.SYNTHETIC_SHARP, seed))
        cfg = _config(algorithm, eps=1e-6, iters=100)
        trace = runner(gen.instance, cfg)
        dists = [rec.dist_to_solution for rec in trace.records]
        dists.append(gen.instance.ground_truth.distance(trace.final_point))
        for prev, nxt in zip(dists, dists[1:]):
            assert nxt <= prev + 1e-10


class TestAggregationModes:
    @pytest.mark.parametrize("seed", range(5))
    def test_both_modes_reach_eps_solution(self, seed):
        gen = generate(desk_spec(Family.SYNTHETIC_SHARP, seed))
        eps = 1e-4
        hits = {}
        evals = {}
        for mode in Aggregation:
            cfg = _config(Algorithm.EPS_SWITCHING, eps=eps, iters=400, aggregation=mode)
            trace = run_eps_switching(gen.instance, cfg)
            hits[mode] = trace.first_eps_solution(0.0, eps)
            evals[mode] = trace.constraint_evaluations
        assert hits[Aggregation.MAX_OF_CONSTRAINTS] is not None
        assert hits[Aggregation.FIRST_VIOLATED] is not None
        assert evals[Aggregation.FIRST_VIOLATED] <= evals[Aggregation.MAX_OF_CONSTRAINTS]

    def test_first_violated_early_exit_counts(self):
        calls = []

        def counting(idx, slope, offset):
            def oracle(x):
                calls.append(idx)
                return affine_1d(slope, offset)(x)

            return oracle

        problem = one_d_instance(
            [counting(0, 1.0, -0.5), counting(1, 1.0, 10.0)]  # first always violated
        )
        cfg = _config(
            Algorithm.EPS_SWITCHING,
            iters=1,
            start_point=vector([1.0]),
            aggregation=Aggregation.FIRST_VIOLATED,
        )
        trace = run_eps_switching(problem, cfg)
        assert calls == [0]  # second oracle never evaluated
        assert trace.constraint_evaluations == 1


class TestDeterminism:
    def test_identical_configs_identical_traces(self):
        gen_a = generate(desk_spec(Family.GEOMETRIC_PROGRAM, 3))
        gen_b = generate(desk_spec(Family.GEOMETRIC_PROGRAM, 3))
        cfg = _config(Algorithm.EPS_SWITCHING, eps=1e-3, iters=200, record_points=True)
        tr_a = run_eps_switching(gen_a.instance, cfg)
        tr_b = run_eps_switching(gen_b.instance, cfg)
        assert len(tr_a) == len(tr_b)
        for ra, rb in zip(tr_a.records, tr_b.records):
            assert ra.f_value == rb.f_value
            assert ra.g_value == rb.g_value
            assert ra.step_size == rb.step_size
            assert ra.grad_norm == rb.grad_norm
            assert ra.gamma == rb.gamma
            assert np.array_equal(ra.point, rb.point)
        assert np.array_equal(tr_a.final_point, tr_b.final_point)


class TestErrorsAndTermination:
    def test_zero_gradient_error_carries_iteration(self):
        # constraint violated with exactly zero slope
        problem = one_d_instance([affine_1d(0.0, -5.0)])  # g == 5 > eps, grad 0
        cfg = _config(Algorithm.EPS_SWITCHING, iters=3, start_point=vector([1.0]))
        with pytest.raises(ZeroGradientError) as err:
            run_eps_switching(problem, cfg)
        assert err.value.iteration == 0

    def test_early_stop_certificate(self):
        problem = one_d_instance([affine_1d(1.0, 10.0)])
        cfg = _config(
            Algorithm.EPS_SWITCHING, iters=50, start_point=vector([1.0]), early_stop=True
        )
        trace = run_eps_switching(problem, cfg)
        assert trace.terminated_early
        assert "certificate" in trace.termination_reason
        assert len(trace) < 50

    def test_gamma_recursion_tracked_with_known_alpha(self):
        gen = generate(desk_spec(Family.SYNTHETIC_SHARP, 0))
        cfg = _config(Algorithm.CONDITIONAL_SWITCHING, eps=1e-6, iters=5)
        trace = run_conditional_switching(gen.instance, cfg)
        gammas = [rec.gamma for rec in trace.records]
        assert gammas[0] == cfg.gamma0
        # alpha = M_f = 1 and C = 1 saturate the productive factor
        if trace.records[0].kind is StepKind.PRODUCTIVE:
            assert gammas[1] == 0.0
