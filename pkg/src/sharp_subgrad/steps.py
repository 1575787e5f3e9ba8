"""Step-size rules, the normalized-gradient gap v_f, and rate factors.

All functions are pure.  The two switching schemes share the same
constraint step g(x)/||grad g(x)||^2; they differ in the productive test
and in the gamma-sequence recursion that certifies the weakly convex
starting-ball condition along the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_GRAD_TOLERANCE,
    ParameterInconsistencyError,
    StepKind,
    Vector,
    ZeroGradientError,
)


@dataclass(frozen=True)
class ContractionParams:
    """Constants entering the per-step contraction factors."""

    alpha: float
    m_f: float
    m_g: Optional[float] = None
    big_c: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.m_f <= 0:
            raise ValueError("alpha and m_f must be positive")
        if self.m_g is not None and self.m_g <= 0:
            raise ValueError("m_g must be positive when given")
        if not (0.0 < self.big_c <= 1.0):
            raise ValueError("C must lie in (0, 1]")


class RateVariant(Enum):
    EPS_PRODUCTIVE = "eps-productive"
    COND_PRODUCTIVE = "cond-productive"
    UNIFORM_REMARK = "uniform-remark"


def v_f(grad_f: Vector, x: Vector, y: Vector,
        grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> float:
    """<grad_f/||grad_f||, x - y>, defined as 0 at a vanishing gradient."""
    if grad_f.shape != x.shape or x.shape != y.shape:
        raise ValueError("v_f arguments must share one dimension")
    norm = float(np.linalg.norm(grad_f))
    if norm <= grad_tolerance:
        return 0.0
    return float(np.dot(grad_f, x - y)) / norm


def polyak_step(f_x: float, f_bar: float, m_f: float, grad_norm: float,
                grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> float:
    """Productive step (f(x) - f_bar) / (M_f ||grad f(x)||).

    A nonpositive numerator means the estimate f_bar already certifies the
    iterate; the step is 0 and the caller keeps the point.  A vanishing
    gradient with a positive numerator contradicts the no-stationary-points
    assumption and raises :class:`ZeroGradientError`.
    """
    if m_f <= 0:
        raise ValueError("m_f must be positive")
    gap = f_x - f_bar
    if gap <= 0.0:
        return 0.0
    if grad_norm <= grad_tolerance:
        raise ZeroGradientError("objective gradient vanished with f(x) > f_bar")
    return gap / (m_f * grad_norm)


def constraint_step(g_x: float, grad_norm: float,
                    grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> float:
    """Nonproductive step g(x) / ||grad g(x)||^2 (fires only when g(x) > 0)."""
    if grad_norm <= grad_tolerance:
        raise ZeroGradientError(
            "constraint gradient vanished on a violated constraint; the "
            "starting-ball assumption of the weakly convex analysis fails"
        )
    return g_x / (grad_norm * grad_norm)


def baseline_objective_step(epsilon: float, grad_norm: float,
                            grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if grad_norm <= grad_tolerance:
        raise ZeroGradientError("objective gradient vanished in baseline step")
    return epsilon / (grad_norm * grad_norm)


def baseline_constraint_step(grad_norm: float,
                             grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> float:
    if grad_norm <= grad_tolerance:
        raise ZeroGradientError("constraint gradient vanished in baseline step")
    return 1.0 / grad_norm


def baseline_steps(epsilon: float, grad_f_norm: float, grad_g_norm: float,
                   grad_tolerance: float = DEFAULT_GRAD_TOLERANCE) -> tuple[float, float]:
    """Comparator steps: h_f = eps/||grad f||^2 and h_g = 1/||grad g||."""
    return (
        baseline_objective_step(epsilon, grad_f_norm, grad_tolerance),
        baseline_constraint_step(grad_g_norm, grad_tolerance),
    )


def _sqrt_factor(radicand: float, context: str) -> float:
    if radicand < 0.0:
        raise ParameterInconsistencyError(
            f"{context}: radicand {radicand!r} is negative; the supplied "
            "(alpha, M, C) are inconsistent with this trajectory"
        )
    return math.sqrt(radicand)


def gamma_update_eps(gamma: float, kind: StepKind, params: ContractionParams,
                     grad_g_norm: Optional[float] = None) -> float:
    """Gamma recursion of the eps-sharp scheme.

    Productive: gamma * sqrt(1 - (alpha^2/M_f^2)(2C - C^2)).
    Nonproductive: gamma * sqrt(1 - alpha^2 (1 - gamma) / ||grad g||^2).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    a2 = params.alpha * params.alpha
    if kind is StepKind.PRODUCTIVE:
        c = params.big_c
        rad = 1.0 - (a2 / (params.m_f * params.m_f)) * (2.0 * c - c * c)
        return gamma * _sqrt_factor(rad, "productive gamma update")
    if grad_g_norm is None:
        raise ValueError("nonproductive gamma update needs ||grad g||")
    rad = 1.0 - a2 * (1.0 - gamma) / (grad_g_norm * grad_g_norm)
    return gamma * _sqrt_factor(rad, "nonproductive gamma update")


def gamma_update_cond(gamma: float, kind: StepKind, params: ContractionParams,
                      grad_g_norm: Optional[float] = None) -> float:
    """Gamma recursion of the conditional-sharp scheme.

    Productive: gamma * sqrt(1 - (C/(2-C)) alpha^2/M_f^2).
    Nonproductive: gamma * sqrt(1 - (1 - gamma) C^2 alpha^2 / ||grad g||^2).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    a2 = params.alpha * params.alpha
    c = params.big_c
    if kind is StepKind.PRODUCTIVE:
        rad = 1.0 - (c / (2.0 - c)) * a2 / (params.m_f * params.m_f)
        return gamma * _sqrt_factor(rad, "productive gamma update")
    if grad_g_norm is None:
        raise ValueError("nonproductive gamma update needs ||grad g||")
    rad = 1.0 - (1.0 - gamma) * c * c * a2 / (grad_g_norm * grad_g_norm)
    return gamma * _sqrt_factor(rad, "nonproductive gamma update")


def contraction_factor(params: ContractionParams, variant: RateVariant) -> float:
    """Per-step squared-distance factor of the stated rate.

    EPS_PRODUCTIVE: 1 - (alpha^2/M_f^2)(2C - C^2).
    COND_PRODUCTIVE: 1 - (C/(2-C)) alpha^2/M_f^2.
    UNIFORM_REMARK: 1 - C^2 alpha^2/M^2 with M = max(M_f, M_g).
    """
    a2 = params.alpha * params.alpha
    c = params.big_c
    if variant is RateVariant.EPS_PRODUCTIVE:
        factor = 1.0 - (a2 / (params.m_f * params.m_f)) * (2.0 * c - c * c)
    elif variant is RateVariant.COND_PRODUCTIVE:
        factor = 1.0 - (c / (2.0 - c)) * a2 / (params.m_f * params.m_f)
    else:
        if params.m_g is None:
            raise ValueError("the uniform rate needs M_g")
        m = max(params.m_f, params.m_g)
        factor = 1.0 - c * c * a2 / (m * m)
    if not (0.0 <= factor < 1.0):
        raise ParameterInconsistencyError(
            f"{variant.value} factor {factor!r} outside [0, 1); parameters "
            "violate the implicit alpha <= M assumption"
        )
    return factor
