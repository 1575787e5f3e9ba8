"""Domain types shared by the solvers, generators and checkers.

Everything here is immutable after construction.  Oracles are pure
functions of the query point (no internal state), so any recorded step can
be replayed exactly by the verification tools in :mod:`sharp_subgrad.analysis`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TypeAlias

import numpy as np
from numpy.typing import NDArray

Vector: TypeAlias = NDArray[np.float64]

#: "zero gradient" threshold; the underlying model treats a vanishing
#: gradient as a set-membership condition with no numeric content.
DEFAULT_GRAD_TOLERANCE = 1e-12


class SharpSubgradError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(SharpSubgradError, ValueError):
    pass


class ZeroGradientError(SharpSubgradError, RuntimeError):
    """A step rule was asked to divide by a (numerically) zero gradient."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


class OracleError(SharpSubgradError, RuntimeError):
    """An oracle returned a non-finite value or subgradient."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


class DegenerateValueError(SharpSubgradError, ValueError):
    """f(x) is so close to f* that the inexactness model is inapplicable."""


class ParameterInconsistencyError(SharpSubgradError, ValueError):
    """Rate parameters produced a factor or radicand outside its range."""


def vector(values, dim: Optional[int] = None) -> Vector:
    """Validated dense vector: 1-D float64, finite entries, read-only."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size < 1:
        raise DimensionMismatchError("vectors must have dimension >= 1")
    if dim is not None and arr.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise OracleError("non-finite entries in vector")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class OracleOutput:
    """One oracle answer: function value and a Clarke subgradient."""

    value: float
    subgradient: Vector

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise OracleError(f"oracle value is not finite: {self.value}")
        if not np.all(np.isfinite(self.subgradient)):
            raise OracleError("oracle subgradient has non-finite entries")

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.subgradient))


Oracle: TypeAlias = Callable[[Vector], OracleOutput]


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Optional reference data: optimal value, solution set, sharpness.

    ``distance_fn`` takes precedence over the listed ``solutions`` when
    computing dist(x, X_*); with neither present distances are unavailable.
    """

    f_star: Optional[float] = None
    solutions: tuple[Vector, ...] = ()
    distance_fn: Optional[Callable[[Vector], float]] = None
    sharpness_alpha: Optional[float] = None

    def has_distance(self) -> bool:
        return self.distance_fn is not None or len(self.solutions) > 0

    def distance(self, x: Vector) -> float:
        if self.distance_fn is not None:
            return float(self.distance_fn(x))
        if not self.solutions:
            raise ValueError("ground truth has no solution set or distance function")
        return min(float(np.linalg.norm(x - s)) for s in self.solutions)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A constrained minimization instance: min f(x) s.t. g_i(x) <= 0, x in Q.

    ``objective`` and every entry of ``constraints`` map a point of Q to an
    :class:`OracleOutput`; ``projector`` is the single way solvers touch Q.
    ``lipschitz_f`` is the objective's Lipschitz constant M_f used by the
    Polyak-type step; ``weak_convexity_mu`` is the constraint's weak
    convexity modulus (0 for convex constraints).
    """

    dimension: int
    objective: Oracle
    constraints: tuple[Oracle, ...]
    projector: "object"
    lipschitz_f: float
    lipschitz_g: Optional[float] = None
    weak_convexity_mu: float = 0.0
    ground_truth: Optional[GroundTruth] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not self.constraints:
            raise ValueError("at least one constraint oracle is required")
        if self.lipschitz_f <= 0:
            raise ValueError("lipschitz_f must be positive")
        if self.lipschitz_g is not None and self.lipschitz_g <= 0:
            raise ValueError("lipschitz_g must be positive when given")
        if self.weak_convexity_mu < 0:
            raise ValueError("weak_convexity_mu must be nonnegative")
        gt = self.ground_truth
        if gt is not None and gt.solutions:
            if gt.f_star is None:
                raise ValueError("listed solutions require f_star")
            for s in gt.solutions:
                f_s = self.objective(s).value
                scale = max(1.0, abs(f_s), abs(gt.f_star))
                if abs(f_s - gt.f_star) > 1e-12 * scale:
                    raise ValueError(
                        f"listed solution has f={f_s!r}, expected f_star={gt.f_star!r}"
                    )
                for i, g in enumerate(self.constraints):
                    if g(s).value > 1e-12 * scale:
                        raise ValueError(f"listed solution violates constraint {i}")

    def max_constraint(self, x: Vector) -> float:
        return max(g(x).value for g in self.constraints)


class Algorithm(enum.Enum):
    EPS_SWITCHING = "eps"
    CONDITIONAL_SWITCHING = "cond"
    BASELINE_SWITCHING = "baseline"


class Aggregation(enum.Enum):
    MAX_OF_CONSTRAINTS = "max"
    FIRST_VIOLATED = "first"


class StepKind(enum.Enum):
    PRODUCTIVE = "P"
    NONPRODUCTIVE = "N"


@dataclass(frozen=True)
class FBarModel:
    """Inexact optimal-value estimate f-bar.

    The inexactness model ties f-bar to the true optimum through
    f(x) - f_bar = c(x) * (f(x) - f_star) with c(x) in [C, 2 - C] for some
    C in (0, 1]; ``f_star`` is carried only for post-hoc window checks.
    """

    f_bar: float
    big_c: float = 1.0
    f_star: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.big_c <= 1.0):
            raise ValueError("C must lie in (0, 1]")
        if not math.isfinite(self.f_bar):
            raise ValueError("f_bar must be finite")


@dataclass(frozen=True, eq=False)
class SolverConfig:
    algorithm: Algorithm
    epsilon: float
    fbar: FBarModel
    gamma0: float = 0.9
    max_iters: int = 1000
    aggregation: Aggregation = Aggregation.MAX_OF_CONSTRAINTS
    grad_tolerance: float = DEFAULT_GRAD_TOLERANCE
    record_points: bool = False
    seed: int = 0
    start_point: Optional[Vector] = None
    early_stop: bool = False

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 < self.gamma0 < 1.0):
            raise ValueError("gamma0 must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class StepRecord:
    """One iteration of a switching run, taken at the pre-step point x_k."""

    iteration: int
    kind: StepKind
    f_value: float
    g_value: float
    step_size: float
    grad_norm: float
    gamma: float
    dist_to_solution: Optional[float] = None
    point: Optional[Vector] = None

    def __post_init__(self):
        if self.step_size < 0:
            raise ValueError("step_size must be >= 0")
        if self.grad_norm < 0:
            raise ValueError("grad_norm must be >= 0")
        # gamma may saturate to exactly 0 when alpha = M_f and C = 1
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError("gamma must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Ordered step records plus the productive/nonproductive index sets."""

    records: tuple[StepRecord, ...]
    productive_set: tuple[int, ...]
    nonproductive_set: tuple[int, ...]
    final_point: Vector
    terminated_early: bool = False
    termination_reason: str = ""
    objective_evaluations: int = 0
    constraint_evaluations: int = 0

    def __post_init__(self):
        ii = set(self.productive_set)
        jj = set(self.nonproductive_set)
        if ii & jj:
            raise ValueError("productive and nonproductive sets overlap")
        if ii | jj != set(range(len(self.records))):
            raise ValueError("I and J do not partition the iteration range")
        for rec in self.records:
            member = rec.iteration in ii
            if member != (rec.kind is StepKind.PRODUCTIVE):
                raise ValueError(f"record {rec.iteration} kind inconsistent with I/J")

    def __len__(self) -> int:
        return len(self.records)

    def first_eps_solution(self, f_star: float, epsilon: float) -> Optional[int]:
        """Index of the first recorded iterate with f - f* <= eps and g <= eps."""
        for rec in self.records:
            if rec.f_value - f_star <= epsilon and rec.g_value <= epsilon:
                return rec.iteration
        return None

    def best_feasible(self, epsilon: float) -> Optional[tuple[int, float]]:
        """(iteration, f) of the eps-feasible iterate with least f value."""
        best = None
        for rec in self.records:
            if rec.g_value <= epsilon and (best is None or rec.f_value < best[1]):
                best = (rec.iteration, rec.f_value)
        return best


def effective_c(f_x: float, f_bar: float, f_star: float) -> float:
    """Realized inexactness ratio c(x) = (f(x) - f_bar) / (f(x) - f*).

    Callers compare the result against the model window [C, 2 - C].

    Raises
    ------
    DegenerateValueError
        When |f(x) - f*| < 1e-15 * max(1, |f(x)|): the iterate sits at the
        optimal value and the ratio carries no information.
    """
    if abs(f_x - f_star) < 1e-15 * max(1.0, abs(f_x)):
        raise DegenerateValueError(
            "f(x) coincides with f* to working precision; c(x) undefined"
        )
    return (f_x - f_bar) / (f_x - f_star)
