"""Command-line driver: solve, wellposed, family, norms.

All numeric output is rendered with ``repr`` so identical invocations produce
byte-identical text and CSV files.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .errors import (ConvergenceError, DomainError, HolderBvpError,
                     IntegrationError, NotWellPosedError, ParseError,
                     SingularMatriciantError, UsageError)
from .families import (check_condition_zero, check_limit_conditions,
                       check_measure_conditions, convergence_study)
from .grid import sample
from .norms import holder_norm
from .problemfile import parse_problem
from .solver import is_wellposed, residual, solve

EXIT_PARSE = 2      # unreadable or inconsistent input
EXIT_ILLPOSED = 3   # problem not uniquely solvable
EXIT_NUMERIC = 4    # integrator or iteration breakdown


def _fmt(value):
    return repr(float(value))


def _fmt_complex(value):
    value = complex(value)
    return f"({value.real!r}, {value.imag!r})"


def _write_solution_csv(path, y):
    m = y.shape[0]
    header = ["t"]
    for comp in range(m):
        for d in range(y.order + 1):
            header += [f"re_y{comp}_d{d}", f"im_y{comp}_d{d}"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for i, t in enumerate(y.ts):
            row = [_fmt(t)]
            for comp in range(m):
                for d in range(y.order + 1):
                    v = y.values[d, i, comp, 0]
                    row += [_fmt(v.real), _fmt(v.imag)]
            writer.writerow(row)


def _cmd_solve(args):
    fam = parse_problem(args.file)
    prob = fam.instantiate(args.eps)
    report = is_wellposed(prob, N=args.grid, integ_tol=args.tol)
    solution = solve(prob, N=args.grid, integ_tol=args.tol)
    defect = residual(prob, solution.y)
    print(f"det [BY] = {_fmt_complex(report.det)}")
    print(f"condition number = {_fmt(report.condition)}")
    print(f"eq residual = {_fmt(defect.eq_residual)}")
    print(f"bc residual = {_fmt(defect.bc_residual)}")
    if args.out:
        _write_solution_csv(args.out, solution.y)
        print(f"wrote {args.out}")
    return 0


def _cmd_wellposed(args):
    fam = parse_problem(args.file)
    report = is_wellposed(fam.instantiate(args.eps), N=args.grid)
    print(f"det [BY] = {_fmt_complex(report.det)}")
    print(f"condition number = {_fmt(report.condition)}")
    print(f"kernel dimension = {report.kernel_dim}")
    print("verdict: wellposed" if report.wellposed else "verdict: NOT wellposed")
    return 0


def _pass(flag):
    return "PASS" if flag else "FAIL"


def _cmd_family(args):
    fam = parse_problem(args.file)
    eps_list = [float(v) for v in args.eps_list.split(",") if v.strip()]

    limits = check_limit_conditions(fam, eps_list, tol=args.tol, N=args.grid)
    print(f"coefficient convergence   {_pass(limits.coefficient_converged)}   "
          f"final distance {_fmt(limits.coefficient_distances[-1])}")
    print(f"boundary strong converg.  {_pass(limits.boundary_converged)}   "
          f"final distance {_fmt(limits.boundary_distances[-1])} "
          f"({limits.probe_count} probes)")
    print(f"rhs convergence           {_pass(limits.rhs_converged)}   "
          f"final distance {_fmt(limits.rhs_distances[-1])}")
    print(f"data convergence          {_pass(limits.data_converged)}   "
          f"final distance {_fmt(limits.data_distances[-1])}")

    nondegenerate = check_condition_zero(fam, N=args.grid)
    print(f"limit problem nondegenerate  {_pass(nondegenerate)}")

    if fam.alpha == 0.0:
        mc = check_measure_conditions(fam, eps_list, tol=args.tol, N=args.grid)
        print(f"measure: point matrices   {_pass(mc.point_matrices_converge)}")
        print(f"measure: variation bound  {_pass(mc.variation_bounded)}   "
              f"constant {_fmt(mc.variation_constant)}")
        print(f"measure: end value        {_pass(mc.end_value_converges)}")
        print(f"measure: iterated integral {_pass(mc.primitive_converges)}")
        print(f"measure: norm convergence {_pass(mc.norm_convergence)}   "
              f"final variation of difference {_fmt(mc.difference_variations[-1])}")

    if not nondegenerate:
        raise NotWellPosedError("limit problem is degenerate; convergence study skipped",
                                eps=0.0)
    study = convergence_study(fam, eps_list, tol=args.tol, N=args.grid)
    if study.exact_match:
        print("convergence: EXACT (family does not depend on the parameter)")
    else:
        print(f"convergence {_pass(study.converged)}   "
              f"error {_fmt(study.errors[-1])} at eps = {_fmt(eps_list[-1])}")
        print(f"ratio window [{_fmt(study.ratio_lo)}, {_fmt(study.ratio_hi)}]")
    if args.out:
        study.to_csv(args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_norms(args):
    fam = parse_problem(args.file)
    prob = fam.instantiate(args.eps)
    params = (prob.n, prob.alpha)
    norm_a = holder_norm(sample(prob.A, prob.interval, args.grid, prob.n), params)
    norm_f = holder_norm(sample(prob.f, prob.interval, args.grid, prob.n), params)
    print(f"||A|| at (n, alpha) = ({prob.n}, {_fmt(prob.alpha)}): {_fmt(norm_a)}")
    print(f"||f|| at (n, alpha) = ({prob.n}, {_fmt(prob.alpha)}): {_fmt(norm_f)}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="holderbvp",
        description="Generic boundary-value problems for first-order linear ODE "
                    "systems: solve, test well-posedness, run parameter studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps=True):
        p.add_argument("file", help="problem/family file (TOML)")
        if eps:
            p.add_argument("--eps", type=float, default=0.0,
                           help="parameter value (default 0: the limit problem)")
        p.add_argument("--grid", type=int, default=1000, metavar="N",
                       help="number of grid subintervals (default 1000)")

    p_solve = sub.add_parser("solve", help="solve one instance, report residuals")
    common(p_solve)
    p_solve.add_argument("--tol", type=float, default=1e-10,
                         help="integrator tolerance (default 1e-10)")
    p_solve.add_argument("--out", help="write solution samples to this CSV file")
    p_solve.set_defaults(handler=_cmd_solve)

    p_well = sub.add_parser("wellposed", help="report det [BY], conditioning, verdict")
    common(p_well)
    p_well.set_defaults(handler=_cmd_wellposed)

    p_family = sub.add_parser("family", help="run all parameter-continuity checks")
    common(p_family, eps=False)
    p_family.add_argument("--eps-list", required=True, metavar="E1,E2,...",
                          help="strictly decreasing positive parameter values")
    p_family.add_argument("--tol", type=float, default=1e-3,
                          help="convergence tolerance for the verdicts (default 1e-3)")
    p_family.add_argument("--out", help="write the convergence report to this CSV file")
    p_family.set_defaults(handler=_cmd_family)

    p_norms = sub.add_parser("norms", help="print the data norms of one instance")
    common(p_norms)
    p_norms.set_defaults(handler=_cmd_norms)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotWellPosedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILLPOSED
    except (IntegrationError, SingularMatriciantError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HolderBvpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
