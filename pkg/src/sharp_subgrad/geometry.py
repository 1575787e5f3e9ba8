"""Exact Euclidean projections onto the feasible sets used by the benchmarks.

Four set shapes are supported: the whole space, a ball, the nonnegative
part of an origin-centered ball with an optional small floor eta (keeps
log/posynomial oracles defined, since strict positivity is an open
condition a projection cannot express), and a coordinate box.  Projection
is the only way solvers touch Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import DimensionMismatchError, Vector
from .rng import SplitMix64


@dataclass(frozen=True, eq=False)
class WholeSpace:
    dimension: int


@dataclass(frozen=True, eq=False)
class Ball:
    center: Vector
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True, eq=False)
class NonnegBall:
    """{x : x_i >= floor, ||x||_2 <= radius}, ball centered at the origin."""

    dimension: int
    radius: float
    floor: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")
        if self.floor * math.sqrt(self.dimension) >= self.radius:
            raise ValueError("floor * sqrt(n) must stay below the radius")


@dataclass(frozen=True, eq=False)
class Box:
    """Componentwise box; ``lower`` may contain -inf and ``upper`` +inf."""

    lower: Vector
    upper: Vector

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise DimensionMismatchError("box bounds must be 1-D with equal shapes")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("box bounds must not contain NaN")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("lower bound may not be +inf, upper may not be -inf")
        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


Projector = Union[WholeSpace, Ball, NonnegBall, Box]


def dimension_of(projector: Projector) -> int:
    if isinstance(projector, (WholeSpace, NonnegBall)):
        return projector.dimension
    if isinstance(projector, Ball):
        return projector.center.size
    return projector.lower.size


def _check_dim(projector: Projector, x: Vector) -> None:
    if x.ndim != 1 or x.size != dimension_of(projector):
        raise DimensionMismatchError(
            f"point of dimension {x.size} does not match set dimension "
            f"{dimension_of(projector)}"
        )


def _ball_project(center: Vector, radius: float, x: Vector) -> Vector:
    w = x - center
    d = float(np.linalg.norm(w))
    if d <= radius:
        return x.copy()
    t = radius / d
    z = center + w * t
    # shave the scale until the image verifiably lies inside, so a second
    # projection takes the identity branch and idempotence holds bitwise
    while float(np.linalg.norm(z - center)) > radius:
        t = math.nextafter(t, 0.0)
        z = center + w * t
    return z


def _nonneg_ball_project(p: NonnegBall, x: Vector) -> Vector:
    eta = p.floor
    y = np.maximum(x, eta)
    if float(np.linalg.norm(y)) <= p.radius:
        return y
    # Exact KKT solution of min ||z - x||^2 s.t. z >= eta, ||z|| <= r:
    # z_i = max(eta, x_i / t) with t = 1 + lambda > 1 chosen so ||z|| = r.
    # With the top-k coordinates unclamped, t solves
    #   sum_top-k x_i^2 / t^2 + (n - k) eta^2 = r^2,
    # and k is fixed by x_(k) > t*eta >= x_(k+1); scan k from largest.
    n = x.size
    xs = np.sort(x)[::-1]
    prefix = np.cumsum(xs * xs)
    r_sq = p.radius * p.radius
    t = None
    for k in range(n, 0, -1):
        denom = r_sq - (n - k) * eta * eta
        t_k = math.sqrt(prefix[k - 1] / denom)
        lo_ok = xs[k - 1] > t_k * eta
        hi_ok = k == n or xs[k] <= t_k * eta
        if lo_ok and hi_ok and t_k >= 1.0:
            t = t_k
            break
    if t is None:
        # only reachable through floating-point ties at the clamp boundary
        t = math.sqrt(prefix[-1] / r_sq)
    z = np.maximum(eta, x / t)
    while float(np.linalg.norm(z)) > p.radius:
        t = math.nextafter(t, math.inf)
        z = np.maximum(eta, x / t)
    return z


def project(projector: Projector, x: Vector) -> Vector:
    """Euclidean nearest point of the set; idempotent.

    WholeSpace returns x unchanged.  Ball: center + (x - center) *
    min(1, r / ||x - center||).  Box: componentwise clamp.  NonnegBall:
    clamp to the floor, and when the result leaves the ball, the exact
    KKT water-filling solution (coincides with clamp-then-radial-scale
    when the floor is zero).
    """
    _check_dim(projector, x)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot project a non-finite point")
    if isinstance(projector, WholeSpace):
        return x.copy()
    if isinstance(projector, Ball):
        return _ball_project(projector.center, projector.radius, x)
    if isinstance(projector, Box):
        return np.clip(x, projector.lower, projector.upper)
    return _nonneg_ball_project(projector, x)


def membership_residual(projector: Projector, x: Vector) -> float:
    """Max violation of the set's defining inequalities (<= 0 means inside)."""
    _check_dim(projector, x)
    if isinstance(projector, WholeSpace):
        return 0.0
    if isinstance(projector, Ball):
        return float(np.linalg.norm(x - projector.center)) - projector.radius
    if isinstance(projector, Box):
        lo = float(np.max(projector.lower - x))
        hi = float(np.max(np.where(np.isfinite(projector.upper), x - projector.upper, -np.inf)))
        return max(lo, hi)
    ball = float(np.linalg.norm(x)) - projector.radius
    floor = float(np.max(projector.floor - x))
    return max(ball, floor)


def sample_point(projector: Projector, stream: SplitMix64) -> Vector:
    """Draw a point of the set from the given stream.

    Ball and NonnegBall draws are uniform on their sets (sign-folding maps
    the ball measure onto its nonnegative part); unbounded sets use a
    standard-normal / folded-normal spread around the lower corner, which
    is enough for the sampling-based sharpness estimate.
    """
    n = dimension_of(projector)
    if isinstance(projector, WholeSpace):
        return stream.normals(n)
    if isinstance(projector, Ball):
        direction = stream.normals(n)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction = np.ones(n)
            norm = math.sqrt(n)
        radius = projector.radius * stream.uniform() ** (1.0 / n)
        return projector.center + direction * (radius / norm)
    if isinstance(projector, NonnegBall):
        direction = np.abs(stream.normals(n))
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction = np.ones(n)
            norm = math.sqrt(n)
        radius = projector.radius * stream.uniform() ** (1.0 / n)
        return np.maximum(projector.floor, direction * (radius / norm))
    vals = np.empty(n, dtype=np.float64)
    for i in range(n):
        lo, hi = projector.lower[i], projector.upper[i]
        if math.isfinite(hi):
            vals[i] = lo + stream.uniform() * (hi - lo)
        else:
            vals[i] = lo + abs(stream.normal())
    return vals
