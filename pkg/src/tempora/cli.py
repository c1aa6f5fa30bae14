"""Command-line front end.

Subcommands cover bounds (both SDP methods and backends), classical
reference values, realization construction and verification, the
quantum-region boundary sampler and the closed-form cycle bound.  Exit
codes: 0 success, 2 bad input, 3 numerical failure (a report is still
printed when a partial result exists).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .classical import algebraic_max, nchv_bound
from .exceptions import (
    CapExceededError,
    RealizationError,
    ScenarioError,
    SolverError,
)
from .moment import build_problem
from .realize import (
    gns_from_moments,
    gram_vectors,
    observables_from_vectors,
    realization_from_dict,
    realization_to_dict,
    simulate_objective,
    validate_realization,
)
from .regions import sample_surface, write_surface_csv
from .scenarios import (
    builtin_names,
    builtin_scenario,
    correlation_from_scenario,
    load_scenario,
    ncycle_bound,
)
from .sdp import (
    solve_correlation,
    solve_moment_admm,
    solve_moment_ipm,
    verify_dual_certificate,
)

_IPM_SIZE_LIMIT = 300


def _resolve_scenario(spec: str):
    if spec.startswith("builtin:"):
        return builtin_scenario(spec[len("builtin:"):])
    return load_scenario(spec)


def _solve(scenario, method, solver, tol, max_iter):
    """Run the selected pipeline; returns (problem, solution, solver, error)."""
    kwargs = {}
    if tol is not None:
        kwargs["tol"] = tol
    if max_iter is not None:
        kwargs["max_iter"] = max_iter
    if method == "simplified":
        problem = correlation_from_scenario(scenario)
        try:
            return problem, solve_correlation(problem, **kwargs), "ipm", None
        except SolverError as exc:
            return problem, exc.solution, "ipm", exc
    problem = build_problem(scenario)
    if solver is None:
        solver = "ipm" if problem.size <= _IPM_SIZE_LIMIT else "admm"
    if solver == "ipm":
        try:
            return problem, solve_moment_ipm(problem, **kwargs), "ipm", None
        except SolverError as exc:
            return problem, exc.solution, "ipm", exc
    solution = solve_moment_admm(problem, **kwargs)
    error = None
    if not solution.converged:
        error = SolverError("splitting solver stopped before reaching tolerance",
                            solution=solution)
    return problem, solution, "admm", error


def _report(scenario, method, solver, problem, solution, wall_ms):
    certified = verify_dual_certificate(problem, solution)
    references = {
        name: {"value": value, "delta": solution.primal_value - value}
        for name, value in scenario.reference_values.items()
    }
    return {
        "scenario": scenario.name,
        "method": method,
        "solver": solver,
        "primal": solution.primal_value,
        "dual": certified.certified_bound,
        "gap": max(0.0, certified.certified_bound - solution.primal_value),
        "residuals": {
            "primal": solution.primal_residual,
            "dual": solution.dual_residual,
        },
        "iterations": solution.iterations,
        "wall_ms": wall_ms,
        "references": references,
    }


def _print_report(report, as_json):
    if as_json:
        print(json.dumps(report, indent=2))
        return
    print(f"scenario    {report['scenario']}")
    print(f"method      {report['method']}")
    print(f"solver      {report['solver']}")
    print(f"primal      {report['primal']:.10f}")
    print(f"certified   {report['dual']:.10f}")
    print(f"gap         {report['gap']:.3e}")
    print(f"residuals   primal {report['residuals']['primal']:.3e}"
          f"  dual {report['residuals']['dual']:.3e}")
    print(f"iterations  {report['iterations']}")
    print(f"wall        {report['wall_ms']:.0f} ms")
    for name, ref in report["references"].items():
        print(f"reference   {name}: {ref['value']:.6g}"
              f"  delta {ref['delta']:+.6g}")


def cmd_bound(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    t0 = time.perf_counter()
    problem, solution, solver, error = _solve(
        scenario, args.method, args.solver, args.tol, args.max_iter)
    wall_ms = (time.perf_counter() - t0) * 1e3
    if solution is None:
        print(f"error: {error}", file=sys.stderr)
        return 3
    report = _report(scenario, args.method, solver, problem, solution, wall_ms)
    _print_report(report, args.json)
    if error is not None:
        print(f"warning: {error}", file=sys.stderr)
        return 3
    return 0


def cmd_classical(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    nchv = nchv_bound(scenario)
    algebraic = algebraic_max(scenario)
    if args.json:
        print(json.dumps({
            "scenario": scenario.name,
            "nchv": nchv,
            "algebraic": algebraic,
        }, indent=2))
    else:
        print(f"scenario    {scenario.name}")
        print(f"nchv        {nchv:.10g}")
        print(f"algebraic   {algebraic:.10g}")
    return 0


def cmd_realize(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    t0 = time.perf_counter()
    problem, solution, solver, error = _solve(
        scenario, args.method, args.solver, args.tol, args.max_iter)
    if solution is None:
        print(f"error: {error}", file=sys.stderr)
        return 3
    if args.method == "simplified":
        realization = observables_from_vectors(gram_vectors(solution.matrix))
    else:
        realization = gns_from_moments(solution, problem, scenario)
    wall_ms = (time.perf_counter() - t0) * 1e3
    doc = realization_to_dict(realization)
    doc["meta"] = {
        "scenario": scenario.name,
        "method": args.method,
        "solver": solver,
        "primal": solution.primal_value,
        "tolerance": solution.tolerance,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    summary = {
        "scenario": scenario.name,
        "dimension": realization.dimension,
        "primal": solution.primal_value,
        "out": args.out,
        "wall_ms": wall_ms,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"scenario    {scenario.name}")
        print(f"dimension   {realization.dimension}")
        print(f"primal      {solution.primal_value:.10f}")
        print(f"written     {args.out}")
    if error is not None:
        print(f"warning: {error}", file=sys.stderr)
        return 3
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.realization, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read realization file: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: realization file is not valid JSON: {exc}", file=sys.stderr)
        return 2
    realization = realization_from_dict(doc)
    try:
        validate_realization(realization)
    except RealizationError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 3
    scenario = _resolve_scenario(args.scenario)
    value = simulate_objective(realization, scenario)
    meta = doc.get("meta") or {}
    recorded = meta.get("primal")
    tolerance = meta.get("tolerance")
    result = {
        "scenario": scenario.name,
        "simulated": value,
        "recorded": recorded,
        "deviation": None if recorded is None else abs(value - recorded),
    }
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        print(f"scenario    {scenario.name}")
        print(f"simulated   {value:.10f}")
        if recorded is not None:
            print(f"recorded    {recorded:.10f}")
            print(f"deviation   {result['deviation']:.3e}")
    if recorded is not None and tolerance is not None:
        if abs(value - recorded) > 10.0 * tolerance:
            print(
                f"verification failed: deviation {abs(value - recorded):.3e} "
                f"exceeds 10 x tolerance {tolerance:.1e}",
                file=sys.stderr,
            )
            return 3
    return 0


def cmd_lg_region(args) -> int:
    points = sample_surface(args.grid)
    write_surface_csv(points, args.out)
    if args.json:
        print(json.dumps({"rows": len(points), "out": args.out}, indent=2))
    else:
        print(f"rows        {len(points)}")
        print(f"written     {args.out}")
    return 0


def cmd_ncycle(args) -> int:
    analytic = ncycle_bound(args.n)
    result = {"n": args.n, "analytic": analytic}
    if args.solve:
        from .scenarios import ncycle

        kwargs = {}
        if args.tol is not None:
            kwargs["tol"] = args.tol
        solution = solve_correlation(ncycle(args.n), **kwargs)
        result["sdp"] = solution.primal_value
        result["difference"] = abs(solution.primal_value - analytic)
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        print(f"n           {args.n}")
        print(f"analytic    {analytic:.10f}")
        if args.solve:
            print(f"sdp         {result['sdp']:.10f}")
            print(f"difference  {result['difference']:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempora",
        description="Bounds on sequential quantum measurement correlations.",
        epilog="builtins: " + ", ".join(f"builtin:{n}" for n in builtin_names()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p, with_method=True):
        if with_method:
            p.add_argument("--method", choices=("simplified", "moments"),
                           default="moments")
        p.add_argument("--solver", choices=("ipm", "admm"), default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)

    p = sub.add_parser("bound", help="solve a scenario's SDP bound")
    p.add_argument("scenario", help="scenario file or builtin:NAME")
    add_solver_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("classical", help="classical reference bounds")
    p.add_argument("scenario")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("realize", help="construct an explicit realization")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    add_solver_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("verify", help="re-simulate a realization file")
    p.add_argument("realization")
    p.add_argument("scenario")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lg-region", help="sample the quantum boundary surface")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lg_region)

    p = sub.add_parser("ncycle", help="closed-form cycle bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--analytic", action="store_true",
                   help="print the closed form only (default)")
    p.add_argument("--solve", action="store_true",
                   help="also solve the SDP and print the difference")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ncycle)

    return parser


def entry(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, RealizationError, CapExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(entry())
