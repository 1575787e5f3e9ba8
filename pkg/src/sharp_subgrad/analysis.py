"""Post-hoc verification of the convergence inequalities along traces.

The checkers consume recorded scalars (gamma, gradient norms) rather than
re-running oracles, so a bound check is O(N) regardless of oracle cost;
only the projection-inequality replay touches oracles again, and it does
so through the same pure oracles the solver used.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    DegenerateValueError,
    FBarModel,
    ProblemInstance,
    RunTrace,
    StepKind,
    Vector,
    effective_c,
)
from .geometry import sample_point
from .rng import stream_for
from .steps import ContractionParams


class TheoremVariant(enum.Enum):
    EPS_SHARP = "eps-sharp"
    CONDITIONAL_SHARP = "conditional-sharp"


@dataclass(frozen=True)
class ProjectionCheck:
    ok: bool
    residual: float


def check_projection_inequality(x: Vector, x_next: Vector, x_ref: Vector,
                                h: float, grad: Vector, tol: float) -> ProjectionCheck:
    """Replay of the projected-step inequality

        ||x_next - x_ref||^2 <= ||x - x_ref||^2 - 2 h <grad, x - x_ref>
                                 + h^2 ||grad||^2 + tol

    for x_ref in Q and x_next = Pr_Q(x - h * grad).  Returns the signed
    residual (LHS - RHS without tol); nonpositive means the inequality
    holds with room to spare.
    """
    lhs = float(np.dot(x_next - x_ref, x_next - x_ref))
    diff = x - x_ref
    rhs = (
        float(np.dot(diff, diff))
        - 2.0 * h * float(np.dot(grad, diff))
        + h * h * float(np.dot(grad, grad))
    )
    residual = lhs - rhs
    return ProjectionCheck(ok=residual <= tol, residual=residual)


@dataclass(frozen=True)
class ReplayFailure:
    iteration: int
    reason: str
    residual: Optional[float] = None


@dataclass(frozen=True)
class ProjectionReplayReport:
    checked: int
    base_tol: float
    max_residual: Optional[float]
    failures: tuple[ReplayFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_payload(self) -> dict:
        return {
            "checked": self.checked,
            "tol": self.base_tol,
            "max_residual": self.max_residual,
            "failures": [
                {"k": f.iteration, "reason": f.reason, "residual": f.residual}
                for f in self.failures
            ],
        }


def replay_projection_inequalities(problem: ProblemInstance, trace: RunTrace,
                                   algorithm, epsilon: float, f_bar: float,
                                   aggregation, base_tol: float = 1e-9) -> ProjectionReplayReport:
    """Re-derive every step's oracle call from its recorded point and check
    the projected-step inequality against the recorded step size.

    Needs a trace with points (record_points on).  The reference point is
    the nearest listed ground-truth solution, falling back to the final
    iterate (always in Q).  The tolerance scales as base_tol *
    max(1, ||x_k||^2).  Recorded switch kinds are re-derived too; a
    mismatch is reported as a failure.
    """
    from .core import Algorithm
    from .solvers import _evaluate_constraints

    for rec in trace.records:
        if rec.point is None:
            raise ValueError("replay needs recorded points; rerun with record_points")
    refs = list(problem.ground_truth.solutions) if problem.ground_truth else []
    if not refs:
        refs = [trace.final_point]

    failures: list[ReplayFailure] = []
    max_residual: Optional[float] = None
    for idx, rec in enumerate(trace.records):
        x = rec.point
        x_next = (
            trace.records[idx + 1].point
            if idx + 1 < len(trace.records)
            else trace.final_point
        )
        f_out = problem.objective(x)
        if algorithm is Algorithm.CONDITIONAL_SWITCHING:
            threshold = f_out.value - f_bar
        else:
            threshold = epsilon
        decision, selected, _ = _evaluate_constraints(
            problem, x, threshold, aggregation, rec.iteration
        )
        if decision.kind is not rec.kind:
            failures.append(ReplayFailure(rec.iteration, "switch decision mismatch"))
            continue
        grad = (
            f_out.subgradient
            if decision.kind is StepKind.PRODUCTIVE
            else selected.subgradient
        )
        x_ref = min(refs, key=lambda r: float(np.linalg.norm(x - r)))
        tol = base_tol * max(1.0, float(x @ x))
        check = check_projection_inequality(x, x_next, x_ref, rec.step_size, grad, tol)
        if max_residual is None or check.residual > max_residual:
            max_residual = check.residual
        if not check.ok:
            failures.append(
                ReplayFailure(rec.iteration, "projection inequality", check.residual)
            )
    return ProjectionReplayReport(
        checked=len(trace.records),
        base_tol=base_tol,
        max_residual=max_residual,
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class BoundSequence:
    """Cumulative theorem right-hand sides, one entry per iteration.

    Entry k bounds dist^2(x_{k+1}, X_*).  An empty trace yields the single
    entry dist0_sq.  ``flagged`` lists iterations whose factor fell outside
    [0, 1] (parameters inconsistent with the trajectory); the sequence is
    nonincreasing whenever nothing is flagged.
    """

    per_iteration_bound: tuple[float, ...]
    params: ContractionParams
    variant: TheoremVariant
    flagged: tuple[int, ...] = ()


def _nonproductive_factor(variant: TheoremVariant, params: ContractionParams,
                          gamma: float, grad_norm: float) -> float:
    a2 = params.alpha * params.alpha
    gn2 = grad_norm * grad_norm
    if variant is TheoremVariant.EPS_SHARP:
        return 1.0 - (1.0 - gamma) * a2 / gn2
    c2 = params.big_c * params.big_c
    return 1.0 - c2 * (1.0 - gamma) * a2 / gn2


def _productive_factor(variant: TheoremVariant, params: ContractionParams) -> float:
    # same formulas as steps.contraction_factor but without the range
    # check: an out-of-range factor here is flagged, not raised, so the
    # checker can report inconsistent parameters instead of crashing
    a2 = params.alpha * params.alpha
    c = params.big_c
    if variant is TheoremVariant.EPS_SHARP:
        return 1.0 - (a2 / (params.m_f * params.m_f)) * (2.0 * c - c * c)
    return 1.0 - (c / (2.0 - c)) * a2 / (params.m_f * params.m_f)


def bound_sequence(trace: RunTrace, params: ContractionParams,
                   variant: TheoremVariant, dist0_sq: float) -> BoundSequence:
    """Per-iteration cumulative product of the theorem's contraction factors.

    Productive steps contribute the variant's closed-form factor;
    nonproductive steps use the recorded gamma_k and ||grad g(x_k)||.
    """
    if not trace.records:
        return BoundSequence((dist0_sq,), params, variant)
    productive_factor = _productive_factor(variant, params)
    bounds = []
    flagged = []
    acc = dist0_sq
    for rec in trace.records:
        if rec.kind is StepKind.PRODUCTIVE:
            factor = productive_factor
        else:
            factor = _nonproductive_factor(variant, params, rec.gamma, rec.grad_norm)
        if not (0.0 <= factor <= 1.0):
            flagged.append(rec.iteration)
        acc *= factor
        bounds.append(acc)
    return BoundSequence(tuple(bounds), params, variant, tuple(flagged))


@dataclass(frozen=True)
class AlternativeEntry:
    iteration: int
    eps_solution: bool
    dist_sq: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class TheoremAlternativeReport:
    variant: TheoremVariant
    epsilon: float
    entries: tuple[AlternativeEntry, ...]
    flagged_factors: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> tuple[AlternativeEntry, ...]:
        return tuple(e for e in self.entries if not e.passed)

    def to_payload(self) -> dict:
        return {
            "variant": self.variant.value,
            "epsilon": self.epsilon,
            "ok": self.ok,
            "flagged_factors": list(self.flagged_factors),
            "entries": [
                {
                    "k": int(e.iteration),
                    "eps_solution": bool(e.eps_solution),
                    "dist_sq": float(e.dist_sq),
                    "bound": float(e.bound),
                    "passed": bool(e.passed),
                }
                for e in self.entries
            ],
        }


def verify_theorem_alternative(trace: RunTrace, problem: ProblemInstance,
                               params: ContractionParams, epsilon: float,
                               variant: TheoremVariant,
                               tol: float = 1e-9) -> TheoremAlternativeReport:
    """Check, at every iterate, the stated alternative:

    either the iterate is an eps-solution (f - f* <= eps and g <= eps), or
    its squared distance to X_* is below the cumulative theorem bound.

    Iterate k = 0..N: recorded iterates supply (f, g, dist); the final
    point is evaluated through the problem's oracles.  The check tolerance
    scales with dist0_sq.
    """
    gt = problem.ground_truth
    if gt is None or gt.f_star is None or not gt.has_distance():
        raise ValueError("theorem verification needs f_star and a distance to X_*")
    f_star = gt.f_star

    points: list[tuple[int, float, float, float]] = []
    for rec in trace.records:
        if rec.dist_to_solution is None:
            raise ValueError("trace records carry no distances; rerun with ground truth")
        points.append((rec.iteration, rec.f_value, rec.g_value, rec.dist_to_solution))
    final_f = problem.objective(trace.final_point).value
    final_g = problem.max_constraint(trace.final_point)
    final_d = gt.distance(trace.final_point)
    points.append((len(trace.records), final_f, final_g, final_d))

    dist0_sq = points[0][3] ** 2
    seq = bound_sequence(trace, params, variant, dist0_sq)
    slack = tol * max(1.0, dist0_sq)

    entries = []
    for k, f_val, g_val, d in points:
        bound = dist0_sq if k == 0 else seq.per_iteration_bound[k - 1]
        eps_sol = (f_val - f_star <= epsilon) and (g_val <= epsilon)
        d_sq = d * d
        passed = eps_sol or d_sq <= bound + slack
        entries.append(AlternativeEntry(k, eps_sol, d_sq, bound, passed))
    return TheoremAlternativeReport(
        variant=variant,
        epsilon=epsilon,
        entries=tuple(entries),
        flagged_factors=seq.flagged,
    )


def estimate_sharpness(problem: ProblemInstance, samples: int, seed: int) -> float:
    """Sampled lower estimate of the conditional sharpness constant:

        alpha_hat = min over sampled x in Q \\ X_* of
                    max(f(x) - f*, g(x)) / dist(x, X_*).

    Sample i depends only on (seed, i), so enlarging ``samples`` extends
    the sample set and can never increase the estimate.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    gt = problem.ground_truth
    if gt is None or gt.f_star is None or not gt.has_distance():
        raise ValueError("sharpness estimation needs f_star and a distance to X_*")
    stream = stream_for(seed, tag=17)
    best = math.inf
    for _ in range(samples):
        x = sample_point(problem.projector, stream)
        d = gt.distance(x)
        if d <= 1e-12 * max(1.0, float(np.linalg.norm(x))):
            continue  # x in X_*; the ratio is undefined there
        growth = max(problem.objective(x).value - gt.f_star, problem.max_constraint(x))
        best = min(best, growth / d)
    if not math.isfinite(best):
        raise ValueError("every sample landed in X_*; cannot estimate sharpness")
    return best


@dataclass(frozen=True)
class FBarWindowReport:
    """Which iterations satisfied c(x_k) in [C, 2 - C]."""

    c_values: tuple[Optional[float], ...]
    compliant: tuple[bool, ...]
    violations: tuple[int, ...]
    fraction_compliant: float

    def to_payload(self) -> dict:
        return {
            "c_values": [c for c in self.c_values],
            "compliant": list(self.compliant),
            "violations": list(self.violations),
            "fraction_compliant": self.fraction_compliant,
        }


def check_fbar_window(trace: RunTrace, fbar: FBarModel) -> FBarWindowReport:
    """Evaluate the realized inexactness ratio c(x_k) along a trace.

    Iterations where c falls outside [C, 2 - C] void the theorems'
    hypotheses and are reported; iterates at the optimal value (degenerate
    denominator) count as violations with c recorded as None.
    """
    if fbar.f_star is None:
        raise ValueError("window check needs fbar.f_star")
    lo, hi = fbar.big_c, 2.0 - fbar.big_c
    c_values: list[Optional[float]] = []
    compliant: list[bool] = []
    violations: list[int] = []
    for rec in trace.records:
        try:
            c = effective_c(rec.f_value, fbar.f_bar, fbar.f_star)
        except DegenerateValueError:
            c = None
        ok = c is not None and lo <= c <= hi
        c_values.append(c)
        compliant.append(ok)
        if not ok:
            violations.append(rec.iteration)
    total = len(trace.records)
    fraction = (sum(compliant) / total) if total else 1.0
    return FBarWindowReport(
        c_values=tuple(c_values),
        compliant=tuple(compliant),
        violations=tuple(violations),
        fraction_compliant=fraction,
    )
