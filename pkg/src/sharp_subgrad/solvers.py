"""The three iterative schemes.

* ``run_eps_switching``: the switching scheme whose productive test is the
  fixed tolerance g(x_k) <= eps, with the Polyak-type productive step
  (f(x_k) - f_bar) / (M_f ||grad f||) and constraint step g/||grad g||^2.
* ``run_conditional_switching``: same loop, productive when
  f(x_k) - f_bar >= g(x_k).
* ``run_baseline_switching``: the comparator with productive step
  eps/||grad f||^2 and normalized constraint step 1/||grad g||.

A run performs exactly ``max_iters`` iterations unless the optional
early-stop certificate (f - f_bar <= 0 and g <= eps) fires.  Every new
point passes through the projector; iterates therefore always live in Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Aggregation,
    Algorithm,
    OracleError,
    OracleOutput,
    ProblemInstance,
    RunTrace,
    SolverConfig,
    StepKind,
    StepRecord,
    Vector,
    ZeroGradientError,
)
from .geometry import project
from .steps import (
    ContractionParams,
    baseline_constraint_step,
    baseline_objective_step,
    constraint_step,
    gamma_update_cond,
    gamma_update_eps,
    polyak_step,
)


@dataclass(frozen=True)
class SwitchDecision:
    """Outcome of the constraint test at one iterate."""

    kind: StepKind
    constraint_index: Optional[int]
    aggregated_g: float


def select_constraint(g_values, threshold: float, mode: Aggregation) -> SwitchDecision:
    """Pure switching rule on a list of constraint values.

    MAX_OF_CONSTRAINTS: nonproductive iff max g_i > threshold, index =
    argmax (lowest index on ties).  FIRST_VIOLATED: nonproductive iff any
    g_i > threshold, index = the smallest violating i; the aggregated value
    is then g_i itself, otherwise the max of all values.
    """
    values = list(g_values)
    if not values:
        raise ValueError("constraint value list must be nonempty")
    if mode is Aggregation.FIRST_VIOLATED:
        for i, v in enumerate(values):
            if v > threshold:
                return SwitchDecision(StepKind.NONPRODUCTIVE, i, v)
        return SwitchDecision(StepKind.PRODUCTIVE, None, max(values))
    best = max(values)
    if best > threshold:
        return SwitchDecision(StepKind.NONPRODUCTIVE, values.index(best), best)
    return SwitchDecision(StepKind.PRODUCTIVE, None, best)


def default_start(dimension: int) -> Vector:
    return np.full(dimension, 1.0 / math.sqrt(dimension))


def _call(oracle, x: Vector, what: str, k: int, dim: int) -> OracleOutput:
    try:
        out = oracle(x)
    except OracleError as err:
        raise OracleError(f"{what}: {err}", iteration=k) from None
    if out.subgradient.size != dim:
        raise OracleError(f"{what} subgradient dimension mismatch", iteration=k)
    return out


def _evaluate_constraints(
    problem: ProblemInstance, x: Vector, threshold: float, mode: Aggregation, k: int
) -> tuple[SwitchDecision, Optional[OracleOutput], int]:
    """Constraint test with lazy evaluation under FIRST_VIOLATED.

    Returns the decision, the selected oracle's output when nonproductive,
    and the number of constraint oracles evaluated.
    """
    dim = problem.dimension
    if mode is Aggregation.FIRST_VIOLATED:
        running_max = -math.inf
        for i, oracle in enumerate(problem.constraints):
            out = _call(oracle, x, f"constraint {i}", k, dim)
            if out.value > threshold:
                return SwitchDecision(StepKind.NONPRODUCTIVE, i, out.value), out, i + 1
            running_max = max(running_max, out.value)
        m = len(problem.constraints)
        return SwitchDecision(StepKind.PRODUCTIVE, None, running_max), None, m
    outs = [
        _call(oracle, x, f"constraint {i}", k, dim)
        for i, oracle in enumerate(problem.constraints)
    ]
    decision = select_constraint([o.value for o in outs], threshold, mode)
    selected = outs[decision.constraint_index] if decision.constraint_index is not None else None
    return decision, selected, len(outs)


def _run(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    algo = config.algorithm
    fbar = config.fbar
    tol = config.grad_tolerance
    m_f = problem.lipschitz_f

    start = config.start_point if config.start_point is not None else default_start(problem.dimension)
    x = project(problem.projector, np.asarray(start, dtype=np.float64))

    gt = problem.ground_truth
    track_dist = gt is not None and gt.has_distance()
    alpha = gt.sharpness_alpha if gt is not None else None
    gamma_params = None
    if alpha is not None and algo is not Algorithm.BASELINE_SWITCHING:
        gamma_params = ContractionParams(alpha=alpha, m_f=m_f, m_g=problem.lipschitz_g,
                                         big_c=fbar.big_c)
    gamma_rule = gamma_update_eps if algo is Algorithm.EPS_SWITCHING else gamma_update_cond

    records: list[StepRecord] = []
    productive: list[int] = []
    nonproductive: list[int] = []
    gamma = config.gamma0
    gamma_frozen = False
    n_obj = 0
    n_cons = 0
    terminated = False
    reason = ""

    for k in range(config.max_iters):
        f_out = _call(problem.objective, x, "objective", k, problem.dimension)
        n_obj += 1

        if algo is Algorithm.CONDITIONAL_SWITCHING:
            threshold = f_out.value - fbar.f_bar
        else:
            threshold = config.epsilon
        decision, selected, used = _evaluate_constraints(
            problem, x, threshold, config.aggregation, k
        )
        n_cons += used

        if (
            config.early_stop
            and f_out.value - fbar.f_bar <= 0.0
            and decision.aggregated_g <= config.epsilon
        ):
            terminated = True
            reason = "f_bar certificate: f(x_k) <= f_bar and g(x_k) <= eps"
            break

        if decision.kind is StepKind.PRODUCTIVE:
            grad = f_out.subgradient
            grad_norm = f_out.grad_norm
            try:
                if algo is Algorithm.BASELINE_SWITCHING:
                    # a vanishing objective subgradient puts the iterate in
                    # X_* under the no-stationary-points assumption; the
                    # comparator has no f_bar signal to refute that, so it
                    # freezes instead of aborting
                    if grad_norm <= tol:
                        h = 0.0
                    else:
                        h = baseline_objective_step(config.epsilon, grad_norm, tol)
                else:
                    h = polyak_step(f_out.value, fbar.f_bar, m_f, grad_norm, tol)
            except ZeroGradientError as err:
                raise ZeroGradientError(str(err), iteration=k) from None
            productive.append(k)
        else:
            assert selected is not None
            grad = selected.subgradient
            grad_norm = selected.grad_norm
            try:
                if algo is Algorithm.BASELINE_SWITCHING:
                    h = baseline_constraint_step(grad_norm, tol)
                else:
                    h = constraint_step(selected.value, grad_norm, tol)
            except ZeroGradientError as err:
                raise ZeroGradientError(str(err), iteration=k) from None
            nonproductive.append(k)

        records.append(
            StepRecord(
                iteration=k,
                kind=decision.kind,
                f_value=f_out.value,
                g_value=decision.aggregated_g,
                step_size=h,
                grad_norm=grad_norm,
                gamma=gamma,
                dist_to_solution=gt.distance(x) if track_dist else None,
                point=x.copy() if config.record_points else None,
            )
        )

        if gamma_params is not None and not gamma_frozen:
            try:
                gamma = gamma_rule(
                    gamma,
                    decision.kind,
                    gamma_params,
                    grad_norm if decision.kind is StepKind.NONPRODUCTIVE else None,
                )
            except (ValueError, ZeroGradientError):
                gamma_frozen = True

        if h > 0.0:
            x = project(problem.projector, x - h * grad)
            if not np.all(np.isfinite(x)):
                raise OracleError("iterate became non-finite", iteration=k)

    return RunTrace(
        records=tuple(records),
        productive_set=tuple(productive),
        nonproductive_set=tuple(nonproductive),
        final_point=x,
        terminated_early=terminated,
        termination_reason=reason,
        objective_evaluations=n_obj,
        constraint_evaluations=n_cons,
    )


def run_eps_switching(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    """Switching scheme with the fixed-tolerance productive test g <= eps."""
    if config.algorithm is not Algorithm.EPS_SWITCHING:
        raise ValueError("config.algorithm must be EPS_SWITCHING")
    return _run(problem, config)


def run_conditional_switching(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    """Switching scheme with the productive test f(x_k) - f_bar >= g(x_k)."""
    if config.algorithm is not Algorithm.CONDITIONAL_SWITCHING:
        raise ValueError("config.algorithm must be CONDITIONAL_SWITCHING")
    return _run(problem, config)


def run_baseline_switching(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    """Comparator scheme: g <= eps test, steps eps/||grad f||^2 and 1/||grad g||."""
    if config.algorithm is not Algorithm.BASELINE_SWITCHING:
        raise ValueError("config.algorithm must be BASELINE_SWITCHING")
    return _run(problem, config)


_RUNNERS: dict[Algorithm, Callable[[ProblemInstance, SolverConfig], RunTrace]] = {
    Algorithm.EPS_SWITCHING: run_eps_switching,
    Algorithm.CONDITIONAL_SWITCHING: run_conditional_switching,
    Algorithm.BASELINE_SWITCHING: run_baseline_switching,
}


def run(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    """Dispatch on ``config.algorithm``."""
    return _RUNNERS[config.algorithm](problem, config)
