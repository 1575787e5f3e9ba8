"""Switching subgradient methods with Polyak-type steps for quasiconvex
minimization under inequality constraints, with trace verification."""

from .core import (
    Aggregation,
    Algorithm,
    DegenerateValueError,
    DimensionMismatchError,
    FBarModel,
    GroundTruth,
    OracleError,
    OracleOutput,
    ParameterInconsistencyError,
    ProblemInstance,
    RunTrace,
    SolverConfig,
    StepKind,
    StepRecord,
    Vector,
    ZeroGradientError,
    effective_c,
    vector,
)
from .geometry import Ball, Box, NonnegBall, WholeSpace, project
from .steps import (
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
from .solvers import (
    SwitchDecision,
    run,
    run_baseline_switching,
    run_conditional_switching,
    run_eps_switching,
    select_constraint,
)
from .problems import (
    Family,
    GeneratedInstance,
    GeneratorSpec,
    RatioVariant,
    gen_geometric_program,
    gen_kl_problem,
    gen_ratio_problem,
    gen_synthetic_sharp,
    gen_truss_problem,
    generate,
    kl_reference_optimum,
    reference_by_long_run,
)
from .analysis import (
    BoundSequence,
    ProjectionReplayReport,
    TheoremVariant,
    bound_sequence,
    check_fbar_window,
    check_projection_inequality,
    estimate_sharpness,
    replay_projection_inequalities,
    verify_theorem_alternative,
)

__version__ = "0.1.0"
