"""Benchmark instance generators and reference-optimum oracles.

Five families:

* ``GEOMETRIC_PROGRAM``: p-norm objective with posynomial constraints on
  the nonnegative part of a ball.
* ``RATIO_DISTANCES``: quotient of distances ||x - a|| / ||x - b|| with
  a = 0, ||b|| = 2, on the unit ball; two constraint variants (a norm-cone
  expression or a max of affine functions).
* ``TRUSS_DESIGN``: linear objective -<alpha, x> under 2m symmetric affine
  constraints +-<a_i, x> <= 1 on a ball.
* ``KL_CONSTRAINED``: f(x) = -sqrt(a^T x) under a generalized
  Kullback-Leibler budget sum_i [x_i log(x_i/a_i) - x_i + a_i] <= B on the
  box x >= floor.
* ``SYNTHETIC_SHARP``: distance objective ||x - x_star|| (sharp with
  alpha = 1 and fully known ground truth) under affine constraints that
  are strictly satisfied at x_star.

Every generator is a pure function of its spec: identical specs give
componentwise-identical instances (all randomness flows through the
SplitMix64 stream keyed on the seed).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import (
    Aggregation,
    Algorithm,
    FBarModel,
    GroundTruth,
    OracleError,
    OracleOutput,
    ProblemInstance,
    SharpSubgradError,
    SolverConfig,
    Vector,
    ZeroGradientError,
    vector,
)
from .geometry import Ball, Box, NonnegBall, Projector
from .rng import SplitMix64, stream_for

DEFAULT_FLOOR = 1e-8


class Family(enum.Enum):
    GEOMETRIC_PROGRAM = "geometric"
    RATIO_DISTANCES = "ratio"
    TRUSS_DESIGN = "truss"
    KL_CONSTRAINED = "kl"
    SYNTHETIC_SHARP = "synthetic-sharp"


class RatioVariant(enum.Enum):
    NORM_CONE = "norm-cone"
    LINEAR_MAX = "linear-max"


class NoFeasiblePointError(SharpSubgradError, RuntimeError):
    pass


class BracketError(SharpSubgradError, RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int
    m: int = 1
    p: float = 2.0
    radius: float = 1.0
    noise_sigma: float = 0.1
    seed: int = 0
    variant: RatioVariant = RatioVariant.NORM_CONE
    kl_budget: float = 1000.0
    reference_budget: int = 0
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.p < 1.0:
            raise ValueError("p must be >= 1")
        if self.radius <= 0 or self.kl_budget <= 0:
            raise ValueError("radius and kl_budget must be positive")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    """A problem plus the raw coefficient arrays it was built from."""

    instance: ProblemInstance
    spec: GeneratorSpec
    coefficients: dict


# ---------------------------------------------------------------------------
# oracles


def _pnorm_oracle(p: float):
    def oracle(x: Vector) -> OracleOutput:
        ax = np.abs(x)
        s = float(ax.max(initial=0.0))
        if s == 0.0:
            return OracleOutput(0.0, np.zeros_like(x))
        y = ax / s
        sum_p = float(np.sum(y**p))
        value = s * sum_p ** (1.0 / p)
        grad = np.sign(x) * y ** (p - 1.0) / sum_p ** ((p - 1.0) / p)
        return OracleOutput(value, grad)

    return oracle


def _posynomial_oracle(a_i: float, row: Vector, b_i: float):
    a_i = float(a_i)
    b_i = float(b_i)

    def oracle(x: Vector) -> OracleOutput:
        if np.any(x <= 0.0):
            raise OracleError("posynomial oracle queried outside the open orthant")
        mono = a_i * math.exp(float(row @ np.log(x)))
        return OracleOutput(mono - b_i, mono * row / x)

    return oracle


def _ratio_objective(b: Vector):
    def oracle(x: Vector) -> OracleOutput:
        num = float(np.linalg.norm(x))
        den = float(np.linalg.norm(x - b))
        if den <= 0.0:
            raise OracleError("distance ratio undefined at x = b")
        if num == 0.0:
            return OracleOutput(0.0, np.zeros_like(x))
        value = num / den
        grad = x / (num * den) - (num / den**3) * (x - b)
        return OracleOutput(value, grad)

    return oracle


def _norm_cone_constraint(a_c: Vector, b_c: float):
    def oracle(x: Vector) -> OracleOutput:
        norm = float(np.linalg.norm(x))
        sub_norm = x / norm if norm > 0.0 else np.zeros_like(x)
        inner = float(-a_c @ x)
        value = norm + max(inner, norm) - b_c
        branch = -a_c if inner > norm else sub_norm
        return OracleOutput(value, sub_norm + branch)

    return oracle


def _affine_constraint(row: Vector, offset: float):
    offset = float(offset)

    def oracle(x: Vector) -> OracleOutput:
        return OracleOutput(float(row @ x) - offset, row)

    return oracle


def _linear_objective(coeffs: Vector):
    grad = -coeffs

    def oracle(x: Vector) -> OracleOutput:
        return OracleOutput(float(grad @ x), grad)

    return oracle


def _kl_objective(a: Vector):
    def oracle(x: Vector) -> OracleOutput:
        s = float(a @ x)
        if s <= 0.0:
            raise OracleError("a^T x must stay positive")
        root = math.sqrt(s)
        return OracleOutput(-root, -a / (2.0 * root))

    return oracle


def _kl_constraint(a: Vector, budget: float):
    def oracle(x: Vector) -> OracleOutput:
        if np.any(x <= 0.0):
            raise OracleError("KL oracle queried outside the open orthant")
        ratio = np.log(x / a)
        value = float(np.sum(x * ratio - x + a)) - budget
        return OracleOutput(value, ratio)

    return oracle


def _distance_objective(x_star: Vector):
    def oracle(x: Vector) -> OracleOutput:
        diff = x - x_star
        d = float(np.linalg.norm(diff))
        if d == 0.0:
            return OracleOutput(0.0, np.zeros_like(x))
        return OracleOutput(d, diff / d)

    return oracle


# ---------------------------------------------------------------------------
# family builders


def _build_geometric(spec: GeneratorSpec) -> GeneratedInstance:
    stream = stream_for(spec.seed)
    n, m, p = spec.n, spec.m, spec.p
    coeff_a = np.empty(m)
    rows = np.empty((m, n))
    offsets = np.empty(m)
    for i in range(m):
        a_i = stream.uniform()
        while a_i < 1e-12:
            a_i = stream.uniform()
        row = stream.uniforms(n)
        # a row of near-zero exponents makes the constraint constant
        # (zero gradient on nonproductive steps); resample it
        while float(row.max()) < 1e-6:
            row = stream.uniforms(n)
        # magnitudes of standard normals keep every constraint satisfiable
        # near the origin, matching the stated optimal value f* = 0
        b_i = abs(stream.normal())
        coeff_a[i] = a_i
        rows[i] = row
        offsets[i] = b_i
    constraints = tuple(
        _posynomial_oracle(coeff_a[i], vector(rows[i]), offsets[i]) for i in range(m)
    )
    m_f = n ** max(0.0, 1.0 / p - 0.5)
    instance = ProblemInstance(
        dimension=n,
        objective=_pnorm_oracle(p),
        constraints=constraints,
        projector=NonnegBall(dimension=n, radius=spec.radius, floor=spec.floor),
        lipschitz_f=m_f,
        weak_convexity_mu=0.0,
        ground_truth=GroundTruth(f_star=0.0),
    )
    coeffs = {"a": coeff_a, "exponents": rows, "b": offsets}
    return GeneratedInstance(instance, spec, coeffs)


def _estimate_ratio_lipschitz(objective, radius: float, n: int,
                              stream: SplitMix64, samples: int = 256) -> float:
    worst = 0.0
    for _ in range(samples):
        direction = stream.normals(n)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        x = direction * (radius * stream.uniform() ** (1.0 / n) / norm)
        worst = max(worst, objective(x).grad_norm)
    # dense sampling underestimates the supremum; inflate by 10%
    return 1.1 * worst


def _build_ratio(spec: GeneratorSpec) -> GeneratedInstance:
    n, m = spec.n, spec.m
    for attempt in range(64):
        stream = stream_for(spec.seed, attempt)
        b_dir = stream.normals(n)
        b = b_dir * (2.0 / float(np.linalg.norm(b_dir)))
        if spec.variant is RatioVariant.NORM_CONE:
            a_c = stream.uniforms(n)
            b_c = stream.uniform()
            constraints = (_norm_cone_constraint(vector(a_c), b_c),)
            coeffs = {"b": b, "cone_a": a_c, "cone_b": np.array([b_c])}
        else:
            rows = np.vstack([stream.uniforms(n) for _ in range(m)])
            betas = stream.uniforms(m)
            constraints = tuple(
                _affine_constraint(vector(rows[i]), betas[i]) for i in range(m)
            )
            coeffs = {"b": b, "rows": rows, "betas": betas}
        origin = np.zeros(n)
        if max(g(origin).value for g in constraints) > 0.0:
            continue  # infeasible origin; move to the next substream
        objective = _ratio_objective(vector(b))
        m_f = _estimate_ratio_lipschitz(objective, spec.radius, n, stream)
        instance = ProblemInstance(
            dimension=n,
            objective=objective,
            constraints=constraints,
            projector=Ball(center=vector(origin), radius=spec.radius),
            lipschitz_f=m_f,
            weak_convexity_mu=0.0,
            ground_truth=GroundTruth(
                f_star=0.0,
                solutions=(vector(origin),),
                distance_fn=lambda x: float(np.linalg.norm(x)),
            ),
        )
        coeffs["m_f"] = np.array([m_f])
        return GeneratedInstance(instance, spec, coeffs)
    raise NoFeasiblePointError("no substream produced a feasible origin")


def _build_truss(spec: GeneratorSpec) -> GeneratedInstance:
    stream = stream_for(spec.seed)
    n, m = spec.n, spec.m
    alpha_obj = stream.uniforms(n)
    while float(np.linalg.norm(alpha_obj)) < 1e-9:
        alpha_obj = stream.uniforms(n)
    rows = np.vstack([spec.noise_sigma * stream.normals(n) for _ in range(m)])
    constraints = []
    for i in range(m):
        row = vector(rows[i])
        constraints.append(_affine_constraint(row, 1.0))
        constraints.append(_affine_constraint(vector(-rows[i]), 1.0))
    m_f = float(np.linalg.norm(alpha_obj))
    m_g = float(max(np.linalg.norm(rows[i]) for i in range(m)))
    instance = ProblemInstance(
        dimension=n,
        objective=_linear_objective(vector(alpha_obj)),
        constraints=tuple(constraints),
        projector=Ball(center=vector(np.zeros(n)), radius=spec.radius),
        lipschitz_f=m_f,
        lipschitz_g=m_g if m_g > 0 else None,
        weak_convexity_mu=0.0,
        ground_truth=None,
    )
    coeffs = {"alpha": alpha_obj, "rows": rows}
    gen = GeneratedInstance(instance, spec, coeffs)
    if spec.reference_budget > 0:
        ref = reference_by_long_run(instance, spec.reference_budget)
        with_gt = replace_ground_truth(instance, GroundTruth(f_star=ref.value))
        gen = GeneratedInstance(with_gt, spec, coeffs)
    return gen


def _build_kl(spec: GeneratorSpec) -> GeneratedInstance:
    stream = stream_for(spec.seed)
    n = spec.n
    # floor keeps the reference optimum inside the box Q and the log
    # oracles conditioned well enough for finite-difference auditing
    a = np.maximum(np.array([stream.uniform_open() for _ in range(n)]), 1e-3)
    budget = spec.kl_budget
    a_vec = vector(a)
    objective = _kl_objective(a_vec)
    constraints = (_kl_constraint(a_vec, budget),)
    ref = kl_reference_optimum(a_vec, budget, tol=1e-10)
    start = np.full(n, 1.0 / math.sqrt(n))
    m_f = objective(np.maximum(start, spec.floor)).grad_norm
    lower = np.full(n, spec.floor)
    upper = np.full(n, np.inf)
    instance = ProblemInstance(
        dimension=n,
        objective=objective,
        constraints=constraints,
        projector=Box(lower=lower, upper=upper),
        lipschitz_f=m_f,
        weak_convexity_mu=0.0,
        ground_truth=GroundTruth(f_star=ref.f_star, solutions=(ref.x_star,)),
    )
    coeffs = {"a": a, "budget": np.array([budget]), "lambda_star": np.array([ref.lambda_star])}
    return GeneratedInstance(instance, spec, coeffs)


def _build_synthetic(spec: GeneratorSpec) -> GeneratedInstance:
    stream = stream_for(spec.seed)
    n, m = spec.n, spec.m
    direction = stream.normals(n)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        direction = np.ones(n)
        norm = math.sqrt(n)
    x_star = direction * (0.4 * spec.radius * stream.uniform() / norm)
    rows = np.empty((m, n))
    offsets = np.empty(m)
    for i in range(m):
        row_dir = stream.normals(n)
        row_norm = float(np.linalg.norm(row_dir))
        while row_norm < 1e-12:
            row_dir = stream.normals(n)
            row_norm = float(np.linalg.norm(row_dir))
        # row norms above alpha = 1 keep max(M_f, M_g) > alpha, so the
        # uniform rate factor stays strictly positive
        scale = 1.2 + 1.8 * stream.uniform()
        rows[i] = row_dir * (scale / row_norm)
        margin = 0.2 + 0.4 * stream.uniform()
        offsets[i] = float(rows[i] @ x_star) + margin
    x_star_v = vector(x_star)
    constraints = tuple(
        _affine_constraint(vector(rows[i]), offsets[i]) for i in range(m)
    )
    m_g = float(max(np.linalg.norm(rows[i]) for i in range(m)))
    instance = ProblemInstance(
        dimension=n,
        objective=_distance_objective(x_star_v),
        constraints=constraints,
        projector=Ball(center=vector(np.zeros(n)), radius=spec.radius),
        lipschitz_f=1.0,
        lipschitz_g=m_g,
        weak_convexity_mu=0.0,
        ground_truth=GroundTruth(
            f_star=0.0,
            solutions=(x_star_v,),
            distance_fn=lambda x: float(np.linalg.norm(x - x_star_v)),
            sharpness_alpha=1.0,
        ),
    )
    coeffs = {"x_star": x_star, "rows": rows, "offsets": offsets}
    return GeneratedInstance(instance, spec, coeffs)


def replace_ground_truth(instance: ProblemInstance, gt: GroundTruth) -> ProblemInstance:
    return ProblemInstance(
        dimension=instance.dimension,
        objective=instance.objective,
        constraints=instance.constraints,
        projector=instance.projector,
        lipschitz_f=instance.lipschitz_f,
        lipschitz_g=instance.lipschitz_g,
        weak_convexity_mu=instance.weak_convexity_mu,
        ground_truth=gt,
    )


_BUILDERS = {
    Family.GEOMETRIC_PROGRAM: _build_geometric,
    Family.RATIO_DISTANCES: _build_ratio,
    Family.TRUSS_DESIGN: _build_truss,
    Family.KL_CONSTRAINED: _build_kl,
    Family.SYNTHETIC_SHARP: _build_synthetic,
}


def generate(spec: GeneratorSpec) -> GeneratedInstance:
    """Build the instance for a spec, with its coefficient arrays attached."""
    return _BUILDERS[spec.family](spec)


def gen_geometric_program(spec: GeneratorSpec) -> ProblemInstance:
    if spec.family is not Family.GEOMETRIC_PROGRAM:
        raise ValueError("spec.family must be GEOMETRIC_PROGRAM")
    return _build_geometric(spec).instance


def gen_ratio_problem(spec: GeneratorSpec) -> ProblemInstance:
    if spec.family is not Family.RATIO_DISTANCES:
        raise ValueError("spec.family must be RATIO_DISTANCES")
    return _build_ratio(spec).instance


def gen_truss_problem(spec: GeneratorSpec) -> ProblemInstance:
    if spec.family is not Family.TRUSS_DESIGN:
        raise ValueError("spec.family must be TRUSS_DESIGN")
    return _build_truss(spec).instance


def gen_kl_problem(spec: GeneratorSpec) -> ProblemInstance:
    if spec.family is not Family.KL_CONSTRAINED:
        raise ValueError("spec.family must be KL_CONSTRAINED")
    return _build_kl(spec).instance


def gen_synthetic_sharp(spec: GeneratorSpec) -> ProblemInstance:
    if spec.family is not Family.SYNTHETIC_SHARP:
        raise ValueError("spec.family must be SYNTHETIC_SHARP")
    return _build_synthetic(spec).instance


# ---------------------------------------------------------------------------
# reference optima


@dataclass(frozen=True, eq=False)
class KlReferenceResult:
    f_star: float
    x_star: Vector
    lambda_star: float
    kl_residual: float
    stationarity_residual: float


def kl_reference_optimum(a: Vector, budget: float, tol: float = 1e-10) -> KlReferenceResult:
    """Reference solution of max a^T x s.t. generalized-KL(x, a) <= B.

    Stationarity gives x_i(lambda) = a_i exp(a_i / lambda); the KL value is
    strictly decreasing in lambda, so a monotone bisection pins the active
    constraint.  The returned point sits on the feasible side of the
    bracket, so KL(x*) <= B always, and both the KL residual and the KKT
    stationarity residual max_i |a_i - lambda log(x_i / a_i)| come back for
    audit.
    """
    a = np.asarray(a, dtype=np.float64)
    if np.any(a <= 0.0):
        raise ValueError("a must be strictly positive")
    if budget <= 0.0:
        raise ValueError("budget must be positive")

    def kl_of(lam: float) -> float:
        with np.errstate(over="ignore"):
            z = a / lam
            x = a * np.exp(z)
            terms = x * (z - 1.0) + a
        val = float(np.sum(terms))
        return math.inf if math.isnan(val) else val

    hi = 1.0
    for _ in range(200):
        if kl_of(hi) <= budget:
            break
        hi *= 2.0
    else:
        raise BracketError("could not bracket the KL budget from above")
    lo = hi
    for _ in range(200):
        candidate = lo / 2.0
        if kl_of(candidate) > budget:
            lo = candidate
            break
        lo = candidate
        if lo < 1e-300:
            raise BracketError("could not bracket the KL budget from below")
    else:
        raise BracketError("could not bracket the KL budget from below")

    val_hi = kl_of(hi)
    for _ in range(400):
        if budget - val_hi <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        v = kl_of(mid)
        if v > budget:
            lo = mid
        else:
            hi, val_hi = mid, v
    if budget - val_hi > tol:
        raise BracketError(
            f"bisection stalled with KL residual {budget - val_hi!r} > {tol!r}"
        )

    lam = hi
    z = a / lam
    x_star = a * np.exp(z)
    log_ratio = np.log(x_star / a)
    stationarity = float(np.max(np.abs(a - lam * log_ratio)))
    f_star = -math.sqrt(float(a @ x_star))
    return KlReferenceResult(
        f_star=f_star,
        x_star=vector(x_star),
        lambda_star=lam,
        kl_residual=budget - val_hi,
        stationarity_residual=stationarity,
    )


@dataclass(frozen=True)
class ReferenceResult:
    value: float
    feasibility_residual: float
    iterations_used: int


def reference_by_long_run(problem: ProblemInstance, budget: int,
                          epsilon0: float = 0.1, rounds: int = 24,
                          start: Optional[Vector] = None) -> ReferenceResult:
    """Desk-scale stand-in for f* where no closed form exists.

    Runs the eps-switching scheme on a geometric ladder: per round t both
    the feasibility tolerance eps_t = eps0 * 2^-t and the target undershoot
    delta_t = delta0 * 2^-t halve, with f_bar_t = best_t - delta_t and the
    rounds warm-started from each other.  The returned value is the best f
    seen at an iterate feasible to the final ladder tolerance.
    """
    from . import solvers

    x = np.asarray(start, dtype=np.float64) if start is not None else solvers.default_start(problem.dimension)
    from .geometry import project

    x = project(problem.projector, x)
    f0 = problem.objective(x).value
    g0 = problem.max_constraint(x)
    eps_final = epsilon0 * 2.0 ** -(rounds - 1)

    if budget == 0:
        if g0 <= epsilon0:
            return ReferenceResult(value=f0, feasibility_residual=g0, iterations_used=0)
        raise NoFeasiblePointError("start point infeasible and budget is zero")

    best_f: Optional[float] = f0 if g0 <= eps_final else None
    best_g = g0
    level = f0
    delta0 = max(1.0, abs(f0))
    per_round = max(1, budget // rounds)
    used = 0
    for t in range(rounds):
        eps_t = max(eps_final, epsilon0 * 2.0**-t)
        delta_t = delta0 * 2.0**-t
        config = SolverConfig(
            algorithm=Algorithm.EPS_SWITCHING,
            epsilon=eps_t,
            fbar=FBarModel(f_bar=level - delta_t, big_c=1.0),
            gamma0=0.9,
            max_iters=per_round,
            aggregation=Aggregation.MAX_OF_CONSTRAINTS,
            start_point=x,
        )
        try:
            trace = solvers.run_eps_switching(problem, config)
        except ZeroGradientError:
            # the iterate is pinned at a kink (typically the exact optimum,
            # where f_bar < f* leaves a positive numerator over a vanishing
            # subgradient); the ladder cannot move it further
            break
        used += len(trace)
        final_f = problem.objective(trace.final_point).value
        final_g = problem.max_constraint(trace.final_point)
        candidates = [(rec.f_value, rec.g_value) for rec in trace.records]
        candidates.append((final_f, final_g))
        for f_val, g_val in candidates:
            if g_val <= eps_final and (best_f is None or f_val < best_f):
                best_f, best_g = f_val, g_val
            if g_val <= eps_t and f_val < level:
                level = f_val
        x = trace.final_point
    if best_f is None:
        raise NoFeasiblePointError(
            "no iterate satisfied the final feasibility tolerance"
        )
    return ReferenceResult(value=best_f, feasibility_residual=best_g, iterations_used=used)


# ---------------------------------------------------------------------------
# serialization


def instance_payload(gen: GeneratedInstance) -> dict:
    spec = gen.spec
    inst = gen.instance
    gt = inst.ground_truth
    payload = {
        "family": spec.family.value,
        "variant": spec.variant.value,
        "n": spec.n,
        "m": spec.m,
        "p": spec.p,
        "radius": spec.radius,
        "noise_sigma": spec.noise_sigma,
        "seed": spec.seed,
        "kl_budget": spec.kl_budget,
        "reference_budget": spec.reference_budget,
        "floor": spec.floor,
        "coefficients": {k: np.asarray(v).tolist() for k, v in gen.coefficients.items()},
        "constants": {
            "m_f": inst.lipschitz_f,
            "m_g": inst.lipschitz_g,
            "mu": inst.weak_convexity_mu,
            "f_star": gt.f_star if gt is not None else None,
            "sharpness_alpha": gt.sharpness_alpha if gt is not None else None,
        },
    }
    return payload


def spec_from_payload(payload: dict) -> GeneratorSpec:
    return GeneratorSpec(
        family=Family(payload["family"]),
        n=int(payload["n"]),
        m=int(payload["m"]),
        p=float(payload["p"]),
        radius=float(payload["radius"]),
        noise_sigma=float(payload["noise_sigma"]),
        seed=int(payload["seed"]),
        variant=RatioVariant(payload["variant"]),
        kl_budget=float(payload["kl_budget"]),
        reference_budget=int(payload["reference_budget"]),
        floor=float(payload["floor"]),
    )


def instance_from_payload(payload: dict) -> GeneratedInstance:
    """Rebuild an instance from its artifact, verifying the coefficients.

    The generators are pure, so regeneration from the embedded spec must
    reproduce the stored coefficient arrays bit for bit; a mismatch means
    the artifact was edited or produced by a different build.
    """
    gen = generate(spec_from_payload(payload))
    stored = payload.get("coefficients", {})
    if set(stored) != set(gen.coefficients):
        raise ValueError("artifact coefficient keys do not match the generator")
    for key, value in stored.items():
        if not np.array_equal(np.asarray(value, dtype=np.float64), np.asarray(gen.coefficients[key])):
            raise ValueError(f"artifact coefficients[{key!r}] do not match regeneration")
    return gen
