"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import math

import numpy as np

from sharp_subgrad.core import OracleOutput, ProblemInstance
from sharp_subgrad.geometry import WholeSpace
from sharp_subgrad.problems import Family, GeneratedInstance, GeneratorSpec, RatioVariant
from sharp_subgrad.rng import SplitMix64


def finite_difference_gradient(fn, x, step_mode="absolute", step=1e-6):
    """Central-difference gradient, the independent route for oracle audits.

    ``step_mode="positive"`` uses per-component steps
    min(step * max(|x_i|, 1), x_i / 2): large enough to beat the
    cancellation noise of sum-structured functions, small enough to stay
    inside strictly positive domains.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        if step_mode == "positive":
            h = min(step * max(abs(x[i]), 1.0), 0.5 * x[i])
        else:
            h = step
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return grad


def fd_relative_error(oracle, x, step_mode="absolute"):
    analytic = oracle(x).subgradient
    fd = finite_difference_gradient(lambda y: oracle(y).value, x, step_mode)
    return float(np.linalg.norm(fd - analytic)) / max(1.0, float(np.linalg.norm(analytic)))


def abs_objective():
    """1-D f(x) = |x| with the Clarke choice of 0 at the kink."""

    def oracle(x):
        v = float(x[0])
        sub = math.copysign(1.0, v) if v != 0.0 else 0.0
        return OracleOutput(abs(v), np.array([sub]))

    return oracle


def affine_1d(slope: float, offset: float):
    def oracle(x):
        return OracleOutput(slope * float(x[0]) - offset, np.array([slope]))

    return oracle


def one_d_instance(g_oracles, m_f=1.0, gt=None, projector=None):
    return ProblemInstance(
        dimension=1,
        objective=abs_objective(),
        constraints=tuple(g_oracles),
        projector=projector if projector is not None else WholeSpace(1),
        lipschitz_f=m_f,
        ground_truth=gt,
    )


DESK_SPECS = {
    Family.GEOMETRIC_PROGRAM: dict(n=30, m=10, p=5.0, radius=1.0),
    Family.RATIO_DISTANCES: dict(n=40, m=1, radius=1.0, variant=RatioVariant.NORM_CONE),
    Family.TRUSS_DESIGN: dict(n=20, m=8, radius=1.0, noise_sigma=1.0),
    Family.KL_CONSTRAINED: dict(n=30, m=1, kl_budget=1000.0),
    Family.SYNTHETIC_SHARP: dict(n=20, m=5, radius=2.0),
}


def desk_spec(family: Family, seed: int, **overrides) -> GeneratorSpec:
    kwargs = dict(DESK_SPECS[family])
    kwargs.update(overrides)
    return GeneratorSpec(family=family, seed=seed, **kwargs)


def fd_step_mode(family: Family) -> str:
    if family in (Family.GEOMETRIC_PROGRAM, Family.KL_CONSTRAINED):
        return "positive"
    return "absolute"


def sample_smooth_point(gen: GeneratedInstance, stream: SplitMix64) -> np.ndarray:
    """A point where every oracle of the instance is differentiable and
    finite differences are well conditioned: away from tiny coordinates on
    positive domains, from norm kinks, and from max-branch ties (margin
    1e-4, comfortably above the central-difference step)."""
    family = gen.spec.family
    instance = gen.instance
    n = instance.dimension
    for _ in range(512):
        if family is Family.GEOMETRIC_PROGRAM:
            scale = instance.projector.radius / math.sqrt(n)
            x = np.array([(0.3 + 0.7 * stream.uniform()) * scale for _ in range(n)])
            return x
        if family is Family.KL_CONSTRAINED:
            a = gen.coefficients["a"]
            x = a * np.array([math.exp(0.2 + stream.uniform()) for _ in range(n)])
            return x
        direction = stream.normals(n)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        radius = instance.projector.radius
        x = direction * ((0.2 + 0.6 * stream.uniform()) * radius / norm)
        if family is Family.RATIO_DISTANCES:
            if float(np.linalg.norm(x)) < 0.1:
                continue
            if gen.spec.variant is RatioVariant.NORM_CONE:
                a_c = gen.coefficients["cone_a"]
                if abs(float(-a_c @ x) - float(np.linalg.norm(x))) < 1e-4:
                    continue
        if family is Family.SYNTHETIC_SHARP:
            if instance.ground_truth.distance(x) < 1e-3:
                continue
        return x
    raise RuntimeError("could not sample a smooth point")
