"""Command-line experiment runner.

Subcommands:

* ``run``      generate an instance, run one solver, emit artifacts
* ``compare``  run several solvers on one identical instance
* ``verify``   replay the projected-step inequality (and optionally the
               theorem alternative) over a run directory's artifacts

Exit codes: 0 success, 2 configuration error, 3 solver numerical error
(the failing iteration is named in the message), 4 failed verification.

The default output directory is taken from ``SHARP_SUBGRAD_OUT`` when set.
Trace CSVs are written with 17 significant digits so every float
round-trips exactly; identical configs therefore produce byte-identical
traces.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, problems, solvers
from .core import (
    Aggregation,
    Algorithm,
    FBarModel,
    OracleError,
    ProblemInstance,
    RunTrace,
    SolverConfig,
    StepKind,
    StepRecord,
    ZeroGradientError,
    vector,
)
from .steps import ContractionParams

TRACE_HEADER = ["k", "kind", "f", "g", "h", "grad_norm", "gamma", "dist"]
EMIT_CHOICES = ("trace_csv", "summary_json", "instance_json", "verify_json")

_ALGOS = {
    "eps": Algorithm.EPS_SWITCHING,
    "cond": Algorithm.CONDITIONAL_SWITCHING,
    "baseline": Algorithm.BASELINE_SWITCHING,
}
_FAMILIES = {
    "geometric": problems.Family.GEOMETRIC_PROGRAM,
    "ratio": problems.Family.RATIO_DISTANCES,
    "truss": problems.Family.TRUSS_DESIGN,
    "kl": problems.Family.KL_CONSTRAINED,
    "synthetic-sharp": problems.Family.SYNTHETIC_SHARP,
}


class ConfigError(Exception):
    pass


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_trace_csv(path: Path, trace: RunTrace) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for rec in trace.records:
            writer.writerow(
                [
                    rec.iteration,
                    rec.kind.value,
                    _fmt(rec.f_value),
                    _fmt(rec.g_value),
                    _fmt(rec.step_size),
                    _fmt(rec.grad_norm),
                    _fmt(rec.gamma),
                    "" if rec.dist_to_solution is None else _fmt(rec.dist_to_solution),
                ]
            )


def write_points_csv(path: Path, trace: RunTrace, dimension: int) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k"] + [f"x{i}" for i in range(dimension)])
        for rec in trace.records:
            if rec.point is None:
                raise ConfigError("record_points was off; no points to write")
            writer.writerow([rec.iteration] + [_fmt(v) for v in rec.point])


def read_trace_csv(path: Path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ConfigError(f"unexpected trace header in {path}")
        for row in reader:
            rows.append(
                {
                    "k": int(row["k"]),
                    "kind": row["kind"],
                    "f": float(row["f"]),
                    "g": float(row["g"]),
                    "h": float(row["h"]),
                    "grad_norm": float(row["grad_norm"]),
                    "gamma": float(row["gamma"]),
                    "dist": float(row["dist"]) if row["dist"] != "" else None,
                }
            )
    return rows


def read_points_csv(path: Path) -> list[np.ndarray]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "k":
            raise ConfigError(f"unexpected points header in {path}")
        for row in reader:
            points.append(np.array([float(v) for v in row[1:]], dtype=np.float64))
    return points


# ---------------------------------------------------------------------------
# argument handling


def _add_generator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=sorted(_FAMILIES), help="problem family")
    p.add_argument("--n", type=int, help="dimension")
    p.add_argument("--m", type=int, help="number of constraints (family specific)")
    p.add_argument("--p", type=float, help="p-norm exponent (geometric family)")
    p.add_argument("--radius", type=float, help="radius of the feasible ball")
    p.add_argument("--sigma", type=float, help="noise std dev (truss family)")
    p.add_argument("--seed", type=int, help="instance seed")
    p.add_argument("--variant", choices=["norm-cone", "linear-max"],
                   help="ratio-family constraint variant")
    p.add_argument("--kl-budget", type=float, help="KL budget B (kl family)")
    p.add_argument("--reference-budget", type=int,
                   help="long-run budget used to attach f* to truss instances")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=sorted(_ALGOS), help="algorithm")
    p.add_argument("--eps", type=float, help="tolerance epsilon")
    p.add_argument("--fbar", help="'exact' (use ground-truth f*) or a number")
    p.add_argument("--big-c", type=float, help="inexactness window constant C")
    p.add_argument("--gamma0", type=float, help="initial gamma")
    p.add_argument("--iters", type=int, help="iteration budget N")
    p.add_argument("--aggregation", choices=["max", "first"], help="constraint mode")
    p.add_argument("--record-points", action="store_true", default=None,
                   help="persist iterates (needed by verify)")
    p.add_argument("--negate-start", action="store_true", default=None,
                   help="start from (-1/sqrt(n), ...) instead of (+1/sqrt(n), ...)")
    p.add_argument("--start", help="explicit start point as comma-separated floats")
    p.add_argument("--early-stop", action="store_true", default=None,
                   help="stop once f <= f_bar and g <= eps")
    p.add_argument("--scale", choices=["desk", "full"], default=None,
                   help="guard: 'full' unlocks n > 2000 runs")


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    cfg = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config file: {err}")
    for key in defaults:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    return cfg


_GEN_DEFAULTS = {
    "family": None,
    "n": 20,
    "m": 5,
    "p": 2.0,
    "radius": 1.0,
    "sigma": 0.1,
    "seed": 0,
    "variant": "norm-cone",
    "kl_budget": 1000.0,
    "reference_budget": 0,
    "scale": "desk",
}
_SOLVER_DEFAULTS = {
    "algo": "eps",
    "eps": 1e-3,
    "fbar": "exact",
    "big_c": 1.0,
    "gamma0": 0.9,
    "iters": 1000,
    "aggregation": "max",
    "record_points": False,
    "negate_start": False,
    "start": None,
    "early_stop": False,
}


def _generator_spec(cfg: dict) -> problems.GeneratorSpec:
    if not cfg.get("family"):
        raise ConfigError("--family is required")
    family = _FAMILIES[cfg["family"]]
    if cfg["scale"] == "desk" and cfg["n"] > 2000:
        raise ConfigError("n > 2000 requires --scale full")
    return problems.GeneratorSpec(
        family=family,
        n=int(cfg["n"]),
        m=int(cfg["m"]),
        p=float(cfg["p"]),
        radius=float(cfg["radius"]),
        noise_sigma=float(cfg["sigma"]),
        seed=int(cfg["seed"]),
        variant=problems.RatioVariant(cfg["variant"]),
        kl_budget=float(cfg["kl_budget"]),
        reference_budget=int(cfg["reference_budget"]),
    )


def _resolve_fbar(cfg: dict, instance: ProblemInstance) -> FBarModel:
    raw = cfg["fbar"]
    gt = instance.ground_truth
    f_star = gt.f_star if gt is not None else None
    if raw == "exact":
        if f_star is None:
            raise ConfigError(
                "--fbar exact needs a ground-truth f*; for the truss family "
                "pass --reference-budget"
            )
        value = f_star
    else:
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"--fbar must be 'exact' or a number, got {raw!r}")
    return FBarModel(f_bar=value, big_c=float(cfg["big_c"]), f_star=f_star)


def _solver_config(cfg: dict, fbar: FBarModel, dimension: int,
                   algorithm: Algorithm, seed: int) -> SolverConfig:
    start = None
    if cfg["negate_start"]:
        start = -solvers.default_start(dimension)
    if cfg["start"] is not None:
        raw = cfg["start"]
        try:
            values = [float(v) for v in (raw.split(",") if isinstance(raw, str) else raw)]
        except (TypeError, ValueError):
            raise ConfigError(f"--start must be comma-separated floats, got {raw!r}")
        if len(values) != dimension:
            raise ConfigError(f"--start has {len(values)} entries, expected {dimension}")
        start = np.array(values, dtype=np.float64)
    return SolverConfig(
        algorithm=algorithm,
        epsilon=float(cfg["eps"]),
        fbar=fbar,
        gamma0=float(cfg["gamma0"]),
        max_iters=int(cfg["iters"]),
        aggregation=Aggregation.MAX_OF_CONSTRAINTS
        if cfg["aggregation"] == "max"
        else Aggregation.FIRST_VIOLATED,
        record_points=bool(cfg["record_points"]),
        seed=seed,
        start_point=start,
        early_stop=bool(cfg["early_stop"]),
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get("SHARP_SUBGRAD_OUT")
    if not out:
        raise ConfigError("--out (or SHARP_SUBGRAD_OUT) is required")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _summary_payload(trace: RunTrace, instance: ProblemInstance, cfg: dict,
                     wall_time: float) -> dict:
    gt = instance.ground_truth
    f_star = gt.f_star if gt is not None else None
    eps = float(cfg["eps"])
    best = trace.best_feasible(eps)
    final_f = instance.objective(trace.final_point).value
    final_g = instance.max_constraint(trace.final_point)
    payload = {
        "config": {k: cfg[k] for k in sorted(cfg)},
        "record_count": len(trace),
        "productive_count": len(trace.productive_set),
        "nonproductive_count": len(trace.nonproductive_set),
        "final_f": final_f,
        "final_g": final_g,
        "best_feasible_f": None if best is None else best[1],
        "best_feasible_iteration": None if best is None else best[0],
        "first_eps_solution": None
        if f_star is None
        else trace.first_eps_solution(f_star, eps),
        "f_star": f_star,
        "terminated_early": trace.terminated_early,
        "termination_reason": trace.termination_reason,
        "objective_evaluations": trace.objective_evaluations,
        "constraint_evaluations": trace.constraint_evaluations,
        "wall_time_s": wall_time,
        "seed": int(cfg["seed"]),
    }
    if bool(cfg["record_points"]):
        payload["final_point"] = [float(v) for v in trace.final_point]
    return payload


def cmd_run(args: argparse.Namespace) -> int:
    gen_cfg = _merged(args, _GEN_DEFAULTS)
    sol_cfg = _merged(args, _SOLVER_DEFAULTS)
    emit = set(args.emit.split(",")) if args.emit else {"trace_csv", "summary_json", "instance_json"}
    unknown = emit.difference(EMIT_CHOICES)
    if unknown or not emit:
        raise ConfigError(f"bad --emit value: {sorted(unknown)}")
    out = _out_dir(args)

    generated = problems.generate(_generator_spec(gen_cfg))
    instance = generated.instance
    fbar = _resolve_fbar(sol_cfg, instance)
    config = _solver_config(sol_cfg, fbar, instance.dimension,
                            _ALGOS[sol_cfg["algo"]], int(gen_cfg["seed"]))

    started = time.perf_counter()
    trace = solvers.run(instance, config)
    wall = time.perf_counter() - started

    merged_cfg = {**gen_cfg, **sol_cfg, "fbar_value": fbar.f_bar}
    if "trace_csv" in emit:
        write_trace_csv(out / "trace.csv", trace)
        if config.record_points:
            write_points_csv(out / "trace_points.csv", trace, instance.dimension)
    if "summary_json" in emit:
        with open(out / "summary.json", "w") as fh:
            json.dump(_summary_payload(trace, instance, merged_cfg, wall), fh, indent=2)
            fh.write("\n")
    if "instance_json" in emit:
        with open(out / "instance.json", "w") as fh:
            json.dump(problems.instance_payload(generated), fh)
            fh.write("\n")
    summary = trace.best_feasible(config.epsilon)
    print(
        f"run: {len(trace)} iterations, |I|={len(trace.productive_set)}, "
        f"|J|={len(trace.nonproductive_set)}, best feasible f="
        f"{'-' if summary is None else _fmt(summary[1])}"
    )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    gen_cfg = _merged(args, _GEN_DEFAULTS)
    sol_cfg = _merged(args, _SOLVER_DEFAULTS)
    labels = [a.strip() for a in (args.algos or "").split(",") if a.strip()]
    if len(labels) < 2:
        raise ConfigError("--algos needs at least two comma-separated algorithms")
    for label in labels:
        if label not in _ALGOS:
            raise ConfigError(f"unknown algorithm {label!r}")
    out = _out_dir(args)

    generated = problems.generate(_generator_spec(gen_cfg))
    instance = generated.instance
    fbar = _resolve_fbar(sol_cfg, instance)

    traces: dict[str, RunTrace] = {}
    for label in labels:
        config = _solver_config(sol_cfg, fbar, instance.dimension,
                                _ALGOS[label], int(gen_cfg["seed"]))
        traces[label] = solvers.run(instance, config)

    rows = max(len(t) for t in traces.values())
    header = ["k"]
    for label in labels:
        header += [f"f_{label}", f"g_{label}"]
    with open(out / "compare.csv", "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(rows):
            row = [k]
            for label in labels:
                recs = traces[label].records
                if k < len(recs):
                    row += [_fmt(recs[k].f_value), _fmt(recs[k].g_value)]
                else:
                    row += ["", ""]
            writer.writerow(row)

    gt = instance.ground_truth
    f_star = gt.f_star if gt is not None else None
    eps = float(sol_cfg["eps"])
    summary = {
        "labels": labels,
        "epsilon": eps,
        "f_star": f_star,
        "first_eps_solution": {
            label: (None if f_star is None else traces[label].first_eps_solution(f_star, eps))
            for label in labels
        },
        "productive_counts": {label: len(traces[label].productive_set) for label in labels},
        "nonproductive_counts": {label: len(traces[label].nonproductive_set) for label in labels},
    }
    with open(out / "compare_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    for label in labels:
        hit = summary["first_eps_solution"][label]
        print(f"compare: {label}: first eps-solution at "
              f"{'not reached' if hit is None else hit}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    instance_path = run_dir / "instance.json"
    summary_path = run_dir / "summary.json"
    trace_path = run_dir / "trace.csv"
    points_path = run_dir / "trace_points.csv"
    for path in (instance_path, summary_path, trace_path, points_path):
        if not path.exists():
            raise ConfigError(f"missing artifact: {path}")

    with open(instance_path) as fh:
        generated = problems.instance_from_payload(json.load(fh))
    instance = generated.instance
    with open(summary_path) as fh:
        summary = json.load(fh)
    cfg = summary["config"]
    algo = _ALGOS[cfg["algo"]]
    eps = float(cfg["eps"])
    f_bar = float(cfg["fbar_value"])
    aggregation = (
        Aggregation.MAX_OF_CONSTRAINTS if cfg["aggregation"] == "max" else Aggregation.FIRST_VIOLATED
    )
    rows = read_trace_csv(trace_path)
    points = read_points_csv(points_path)
    if len(points) != len(rows):
        raise ConfigError("trace and points row counts differ")
    if "final_point" not in summary:
        raise ConfigError("summary.json lacks final_point; rerun with --record-points")
    final_point = np.array(summary["final_point"], dtype=np.float64)
    trace = _trace_from_artifacts(rows, points, final_point)

    replay = analysis.replay_projection_inequalities(
        instance, trace, algo, eps, f_bar, aggregation, base_tol=args.tol
    )

    theorem_payload = None
    theorem_ok = True
    if args.theorem:
        theorem_payload, theorem_ok = _verify_theorem(instance, trace, algo, eps)

    ok = replay.ok and theorem_ok
    payload = {"ok": ok, "projection_replay": replay.to_payload(), "theorem": theorem_payload}
    with open(run_dir / "verify.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if not ok:
        first = replay.failures[0].iteration if replay.failures else "theorem check"
        print(f"verification failed; first failing iteration: {first}", file=sys.stderr)
        return 4
    if not args.quiet:
        print(f"verification passed over {len(rows)} iterations")
    return 0


def _trace_from_artifacts(rows, points, final_point) -> RunTrace:
    records = []
    productive, nonproductive = [], []
    for idx, row in enumerate(rows):
        kind = StepKind.PRODUCTIVE if row["kind"] == "P" else StepKind.NONPRODUCTIVE
        (productive if kind is StepKind.PRODUCTIVE else nonproductive).append(row["k"])
        records.append(
            StepRecord(
                iteration=row["k"],
                kind=kind,
                f_value=row["f"],
                g_value=row["g"],
                step_size=row["h"],
                grad_norm=row["grad_norm"],
                gamma=row["gamma"],
                dist_to_solution=row["dist"],
                point=points[idx],
            )
        )
    return RunTrace(
        records=tuple(records),
        productive_set=tuple(productive),
        nonproductive_set=tuple(nonproductive),
        final_point=final_point,
    )


def _verify_theorem(instance: ProblemInstance, trace: RunTrace,
                    algo: Algorithm, eps: float):
    gt = instance.ground_truth
    if algo is Algorithm.BASELINE_SWITCHING:
        raise ConfigError("the baseline scheme has no theorem bound to verify")
    if gt is None or gt.sharpness_alpha is None or not gt.has_distance():
        raise ConfigError("--theorem needs ground-truth alpha and a distance to X_*")
    params = ContractionParams(
        alpha=gt.sharpness_alpha,
        m_f=instance.lipschitz_f,
        m_g=instance.lipschitz_g,
        big_c=1.0,
    )
    variant = (
        analysis.TheoremVariant.EPS_SHARP
        if algo is Algorithm.EPS_SWITCHING
        else analysis.TheoremVariant.CONDITIONAL_SHARP
    )
    report = analysis.verify_theorem_alternative(trace, instance, params, eps, variant)
    return report.to_payload(), report.ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharp-subgrad",
        description="switching subgradient experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="generate an instance and run one solver")
    _add_generator_args(p_run)
    _add_solver_args(p_run)
    p_run.add_argument("--config", help="JSON config file; flags override its values")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--emit", help="comma list from: " + ",".join(EMIT_CHOICES))
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several solvers on one instance")
    _add_generator_args(p_cmp)
    _add_solver_args(p_cmp)
    p_cmp.add_argument("--algos", help="comma list of algorithms (>= 2)")
    p_cmp.add_argument("--config", help="JSON config file; flags override its values")
    p_cmp.add_argument("--out", help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="replay inequality checks over a run")
    p_ver.add_argument("--run-dir", required=True, help="directory written by run")
    p_ver.add_argument("--tol", type=float, default=1e-9,
                       help="base tolerance, scaled by max(1, ||x_k||^2)")
    p_ver.add_argument("--theorem", action="store_true",
                       help="also check the theorem alternative (needs alpha)")
    p_ver.add_argument("--quiet", action="store_true", help="suppress the pass message")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (problems.NoFeasiblePointError, problems.BracketError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except ZeroGradientError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return 3
    except OracleError as err:
        print(f"oracle error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
