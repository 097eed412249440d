"""Parameter-dependent problem families and their convergence diagnostics.

A family maps eps in [0, eps0) to a boundary-value problem sharing the
interval, dimension, and smoothness class; eps = 0 is the limit problem
(specified separately when the template expressions degenerate there, e.g.
sin(t/eps)).  The module checks, numerically and on the discrete norms:

* the four limit conditions -- coefficient and right-hand side convergence in
  the (n, alpha) norm, boundary-data convergence, and strong (per-function)
  convergence of the boundary operators on a fixed probe corpus;
* non-degeneracy of the limit problem (trivial kernel);
* for alpha = 0, the measure-level reformulation of strong boundary
  convergence (beta matrices, bounded variation, end value, iterated
  integral) and, for contrast, operator-norm convergence (total variation of
  the measure difference) -- strictly stronger, and deliberately allowed to
  fail while solutions still converge;
* the solution error ||y(eps) - y(0)|| against the discrepancy of y(0) in the
  eps-problem, whose ratio stays in a bounded window when solutions are
  continuous in the parameter (the two-sided error estimate, observed
  empirically).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .boundary import (BoundaryOperator, StieltjesMeasure, apply_boundary,
                       measure_difference, measure_end_value, measure_primitive,
                       total_variation)
from .errors import NotWellPosedError, UsageError
from .expressions import Expr, as_expr, free_variables
from .grid import GridFunction, Interval, as_expr_matrix, sample
from .matriciant import matriciant
from .norms import holder_norm
from .solver import (DEFAULT_GRID, DEFAULT_INTEG_TOL, DEFAULT_SV_TOL,
                     ProblemInstance, is_wellposed, residual, solve)

__all__ = [
    "ProblemFamily", "LimitConditionsReport", "MeasureConditionsReport",
    "ConvergenceReport", "default_eps_list", "check_limit_conditions",
    "check_condition_zero", "check_measure_conditions", "convergence_study",
]

#: Scalar shapes used (with unit vectors) to build boundary-operator probes.
PROBE_SCALARS = ("1", "t", "t^2", "t^3", "sin(t)", "cos(t)", "exp(t)",
                 "t*exp(t)", "sin(2*t)", "cos(3*t)", "t^2*sin(t)")


def default_eps_list(count: int = 6):
    """Geometric default 0.1, 0.05, ..., 0.1 * 2^-(count-1)."""
    return [0.1 * 0.5 ** k for k in range(count)]


def _require_t_free(entries, what):
    for e in entries:
        if "t" in free_variables(e):
            raise UsageError(f"{what} may depend on eps only, found t in {e}")


@dataclass
class ProblemFamily:
    """Template problem with expression data in (t, eps), plus limit overrides.

    ``betas``, ``q`` and jump locations/matrices are expressions in eps alone;
    ``A``, ``f`` and ``density`` may also depend on t.  Every ``limit_*``
    field, when not None, replaces the corresponding template data at eps = 0
    (required whenever the template is undefined there).
    """

    interval: Interval
    n: int
    alpha: float
    m: int
    A: list
    f: list
    q: list
    betas: list
    jumps: list = field(default_factory=list)
    density: list = None
    eps0: float = 1.0
    limit_A: list = None
    limit_f: list = None
    limit_q: list = None
    limit_betas: list = None
    limit_jumps: list = None
    limit_density: list = None
    source: dict = None

    def __post_init__(self):
        if self.m < 1 or self.n < 0 or not 0.0 <= self.alpha <= 1.0:
            raise UsageError(f"invalid family parameters n={self.n}, alpha={self.alpha}, m={self.m}")
        if not self.eps0 > 0.0:
            raise UsageError(f"eps0 must be positive, got {self.eps0}")
        self.A = self._square(self.A, "A")
        self.f = self._column(self.f, "f")
        self.q = self._column(self.q, "q")
        _require_t_free((e for row in self.q for e in row), "q")
        self.betas = self._beta_list(self.betas, "betas")
        self.jumps = self._jump_list(self.jumps)
        if self.density is not None:
            self.density = self._square(self.density, "density")
        if self.limit_A is not None:
            self.limit_A = self._square(self.limit_A, "limit A")
        if self.limit_f is not None:
            self.limit_f = self._column(self.limit_f, "limit f")
        if self.limit_q is not None:
            self.limit_q = self._column(self.limit_q, "limit q")
            _require_t_free((e for row in self.limit_q for e in row), "limit q")
        if self.limit_betas is not None:
            self.limit_betas = self._beta_list(self.limit_betas, "limit betas")
        if self.limit_jumps is not None:
            self.limit_jumps = self._jump_list(self.limit_jumps)
        if self.limit_density is not None:
            self.limit_density = self._square(self.limit_density, "limit density")

    def _square(self, entries, what):
        matrix = as_expr_matrix(entries)
        if len(matrix) != self.m or len(matrix[0]) != self.m:
            raise UsageError(f"{what} must be {self.m}x{self.m}")
        return matrix

    def _column(self, entries, what):
        column = as_expr_matrix(entries)
        if len(column) != self.m or len(column[0]) != 1:
            raise UsageError(f"{what} must be a {self.m}-component vector")
        return column

    def _beta_list(self, betas, what):
        betas = [self._square(b, what) for b in betas]
        if len(betas) != self.n + 1:
            raise UsageError(f"{what} must hold n + 1 = {self.n + 1} matrices, got {len(betas)}")
        _require_t_free((e for b in betas for row in b for e in row), what)
        return betas

    def _jump_list(self, jumps):
        parsed = []
        for location, matrix in jumps:
            location = as_expr(location)
            _require_t_free([location], "jump location")
            matrix = self._square(matrix, "jump matrix")
            _require_t_free((e for row in matrix for e in row), "jump matrix")
            parsed.append((location, matrix))
        return parsed

    # -- instantiation ------------------------------------------------------

    def _pick(self, template, override, eps):
        return override if (eps == 0.0 and override is not None) else template

    def _scalar(self, e: Expr, eps):
        return complex(e.subs_eps(eps).eval(0.0))

    def measure_at(self, eps: float) -> StieltjesMeasure:
        jumps = self._pick(self.jumps, self.limit_jumps, eps)
        density = self._pick(self.density, self.limit_density, eps)
        jump_values = []
        for location, matrix in jumps:
            loc = self._scalar(location, eps)
            if loc.imag != 0.0:
                raise UsageError(f"jump location {location} is not real at eps = {eps}")
            jump_values.append((loc.real,
                                [[self._scalar(e, eps) for e in row] for row in matrix]))
        if density is not None:
            density = [[e.subs_eps(eps) for e in row] for row in density]
        return StieltjesMeasure(self.m, jump_values, density)

    def betas_at(self, eps: float):
        betas = self._pick(self.betas, self.limit_betas, eps)
        return [np.array([[self._scalar(e, eps) for e in row] for row in b], dtype=complex)
                for b in betas]

    def boundary_at(self, eps: float) -> BoundaryOperator:
        return BoundaryOperator(self.betas_at(eps), self.measure_at(eps))

    def q_at(self, eps: float):
        q = self._pick(self.q, self.limit_q, eps)
        return np.array([self._scalar(row[0], eps) for row in q], dtype=complex)

    def coefficient_at(self, eps: float):
        A = self._pick(self.A, self.limit_A, eps)
        return [[e.subs_eps(eps) for e in row] for row in A]

    def rhs_at(self, eps: float):
        f = self._pick(self.f, self.limit_f, eps)
        return [[e.subs_eps(eps) for e in row] for row in f]

    def instantiate(self, eps: float) -> ProblemInstance:
        """The concrete problem at one parameter value (eps = 0: the limit)."""
        if not 0.0 <= eps < self.eps0:
            raise UsageError(f"eps = {eps} outside [0, {self.eps0})")
        return ProblemInstance(self.interval, self.n, self.alpha, self.m,
                               self.coefficient_at(eps), self.rhs_at(eps),
                               self.boundary_at(eps), self.q_at(eps))


# -- verdict rules ------------------------------------------------------------


def _trend_converged(distances, tol):
    """Below tol at the smallest eps and non-increasing over the last 3."""
    d = list(distances)
    if d[-1] > tol:
        return False
    tail = d[-3:]
    slack = 1e-12 * (1.0 + max(d))
    return all(tail[k] <= tail[k - 1] + slack for k in range(1, len(tail)))


def _decay_converged(distances, tol):
    """Convergence rule robust to oscillatory sequences.

    Accepts either smallness at the end or a clear decay of the envelope
    (last two values at most half of the first two and a quarter of the peak).
    Oscillatory data make the pointwise sequence non-monotone even when it
    tends to zero, so the strict trend rule would misjudge it.
    """
    d = list(distances)
    if d[-1] <= tol:
        return True
    if len(d) < 3 or max(d) == 0.0:
        return False
    head = max(d[:2])
    return max(d[-2:]) <= 0.5 * head and d[-1] <= 0.25 * max(d)


def _bounded(values):
    """No growth trend: the tail does not exceed four times the head."""
    v = list(values)
    if len(v) < 3:
        return max(v) < np.inf
    return max(v[-2:]) <= 4.0 * max(v[:2]) + 1e-12


def _check_eps_list(eps_list):
    eps_list = [float(e) for e in (eps_list if eps_list is not None else default_eps_list())]
    if not eps_list or any(e <= 0.0 for e in eps_list):
        raise UsageError("eps list must contain positive values only (eps = 0 is the limit)")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise UsageError("eps list must be strictly decreasing")
    return eps_list


# -- limit conditions ---------------------------------------------------------


@dataclass
class LimitConditionsReport:
    """Distance sequences and verdicts for the four limit conditions."""

    eps_list: list
    coefficient_distances: list      # ||A(eps) - A(0)|| in (n, alpha)
    boundary_distances: list         # max over probes of |B(eps)y - B(0)y|
    rhs_distances: list              # ||f(eps) - f(0)|| in (n, alpha)
    data_distances: list             # |q(eps) - q(0)|
    coefficient_converged: bool
    boundary_converged: bool
    rhs_converged: bool
    data_converged: bool
    probe_count: int

    @property
    def all_converged(self):
        return (self.coefficient_converged and self.boundary_converged
                and self.rhs_converged and self.data_converged)


def probe_corpus(fam: ProblemFamily, N: int = DEFAULT_GRID, count: int = 12,
                 integ_tol: float = DEFAULT_INTEG_TOL):
    """Deterministic probe functions for strong boundary convergence.

    The first m probes are the columns of the limit problem's matriciant;
    the rest place the scalar shapes of ``PROBE_SCALARS`` into the components
    in turn.  All probes carry n + 1 exact derivative layers.
    """
    probes = []
    Y0 = matriciant(fam.coefficient_at(0.0), fam.interval, N=N,
                    order=fam.n + 1, tol=integ_tol)
    probes.extend(Y0.grid.column(j) for j in range(fam.m))
    idx = 0
    while len(probes) < count:
        component = idx % fam.m
        scalar = PROBE_SCALARS[idx % len(PROBE_SCALARS)]
        column = [[scalar] if r == component else ["0"] for r in range(fam.m)]
        probes.append(sample(column, fam.interval, N, fam.n + 1))
        idx += 1
    return probes


def check_limit_conditions(fam: ProblemFamily, eps_list=None, tol: float = 1e-6,
                           *, N: int = DEFAULT_GRID) -> LimitConditionsReport:
    """Measure the four limit-condition distances along a decreasing eps list.

    Convergence verdicts use the strict rule: below ``tol`` at the smallest
    eps with a non-increasing trend over the last three entries.  Strong
    boundary convergence is tested on the finite probe corpus only; a true
    'for every function' statement is not numerically testable.
    """
    eps_list = _check_eps_list(eps_list)
    params = (fam.n, fam.alpha)
    a0, f0, q0 = fam.coefficient_at(0.0), fam.rhs_at(0.0), fam.q_at(0.0)
    b0 = fam.boundary_at(0.0)
    probes = probe_corpus(fam, N)

    coefficient, boundary, rhs, data = [], [], [], []
    for eps in eps_list:
        a_diff = [[ae - a0e for ae, a0e in zip(row, row0)]
                  for row, row0 in zip(fam.coefficient_at(eps), a0)]
        coefficient.append(holder_norm(sample(a_diff, fam.interval, N, fam.n), params))
        f_diff = [[fe - f0e for fe, f0e in zip(row, row0)]
                  for row, row0 in zip(fam.rhs_at(eps), f0)]
        rhs.append(holder_norm(sample(f_diff, fam.interval, N, fam.n), params))
        data.append(float(np.abs(fam.q_at(eps) - q0).sum()))
        b_eps = fam.boundary_at(eps)
        boundary.append(max(float(np.abs(apply_boundary(b_eps, z)
                                         - apply_boundary(b0, z)).sum())
                            for z in probes))

    return LimitConditionsReport(
        eps_list, coefficient, boundary, rhs, data,
        _trend_converged(coefficient, tol), _trend_converged(boundary, tol),
        _trend_converged(rhs, tol), _trend_converged(data, tol), len(probes))


def check_condition_zero(fam: ProblemFamily, tol: float = DEFAULT_SV_TOL, *,
                         N: int = DEFAULT_GRID,
                         integ_tol: float = DEFAULT_INTEG_TOL) -> bool:
    """True iff the limit homogeneous problem has only the trivial solution."""
    report = is_wellposed(fam.instantiate(0.0), tol, N=N, integ_tol=integ_tol)
    return report.kernel_dim == 0


# -- measure conditions (alpha = 0) -------------------------------------------


@dataclass
class MeasureConditionsReport:
    """Measure-level reformulation of strong boundary convergence (alpha = 0).

    The four conditions together are equivalent to strong convergence of the
    boundary operators; ``difference_variations`` tracks the total variation
    of the measure difference, whose decay would mean operator-norm
    convergence -- a strictly stronger property that interesting families
    violate while their solutions still converge.
    """

    eps_list: list
    beta_distances: list             # max over k of |beta_k(eps) - beta_k(0)|
    variations: list                 # total variation of Phi(eps)
    end_distances: list              # |Phi(b, eps) - Phi(b, 0)|
    primitive_distances: list        # max over sample points of the iterated integrals
    difference_variations: list      # total variation of Phi(eps) - Phi(0)
    point_matrices_converge: bool
    variation_bounded: bool
    variation_constant: float
    end_value_converges: bool
    primitive_converges: bool
    norm_convergence: bool

    @property
    def strong_conditions_hold(self):
        return (self.point_matrices_converge and self.variation_bounded
                and self.end_value_converges and self.primitive_converges)


def check_measure_conditions(fam: ProblemFamily, eps_list=None, tol: float = 1e-6,
                             *, N: int = DEFAULT_GRID,
                             sample_points: int = 10) -> MeasureConditionsReport:
    """Check the measure-level boundary convergence conditions (alpha = 0 only).

    Verdicts for the vanishing distances use the oscillation-robust decay
    rule; boundedness of the variations compares the tail of the sequence to
    its head.
    """
    if fam.alpha != 0.0:
        raise UsageError("measure conditions are formulated for alpha = 0 only")
    eps_list = _check_eps_list(eps_list)
    iv = fam.interval

    betas0 = fam.betas_at(0.0)
    phi0 = fam.measure_at(0.0)
    end0 = measure_end_value(phi0, iv, N)
    prim0 = measure_primitive(phi0, iv, N)
    indices = [int(round(k * N / sample_points)) for k in range(1, sample_points + 1)]

    beta_d, variations, end_d, prim_d, diff_var = [], [], [], [], []
    for eps in eps_list:
        betas = fam.betas_at(eps)
        beta_d.append(max(float(np.abs(b - b0).sum())
                          for b, b0 in zip(betas, betas0)))
        phi = fam.measure_at(eps)
        variations.append(total_variation(phi, iv, N))
        end_d.append(float(np.abs(measure_end_value(phi, iv, N) - end0).sum()))
        prim = measure_primitive(phi, iv, N)
        prim_d.append(max(float(np.abs(prim[i] - prim0[i]).sum()) for i in indices))
        diff_var.append(total_variation(measure_difference(phi, phi0), iv, N))

    return MeasureConditionsReport(
        eps_list, beta_d, variations, end_d, prim_d, diff_var,
        _decay_converged(beta_d, tol), _bounded(variations),
        max(variations), _decay_converged(end_d, tol),
        _decay_converged(prim_d, tol), _decay_converged(diff_var, tol))


# -- convergence study --------------------------------------------------------


@dataclass
class ConvergenceReport:
    """Solution errors against limit-solution discrepancies along eps.

    ``errors[k]`` is ||y(eps_k) - y(0)|| in the (n+1, alpha) norm;
    the discrepancies measure how badly y(0) fails the eps_k-problem
    (equation part in the (n, alpha) norm, boundary part in C^m).  Their
    ratio staying inside a fixed window is the observable form of the
    two-sided error estimate; ``ratio_lo``/``ratio_hi`` report the window.
    """

    eps_list: list
    errors: list
    eq_discrepancies: list
    bc_discrepancies: list
    ratios: list
    ratio_lo: float
    ratio_hi: float
    converged: bool
    exact_match: bool

    def to_csv(self, target):
        """Write columns eps, error, eq_discrepancy, bc_discrepancy, ratio."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", newline="") as handle:
                self._write(handle)

    def _write(self, handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["eps", "error", "eq_discrepancy", "bc_discrepancy", "ratio"])
        for row in zip(self.eps_list, self.errors, self.eq_discrepancies,
                       self.bc_discrepancies, self.ratios):
            writer.writerow([repr(float(v)) for v in row])


def convergence_study(fam: ProblemFamily, eps_list=None, tol: float = 1e-3, *,
                      N: int = DEFAULT_GRID, integ_tol: float = DEFAULT_INTEG_TOL,
                      sv_tol: float = DEFAULT_SV_TOL) -> ConvergenceReport:
    """Solve the family along an eps list and compare errors to discrepancies.

    Raises :class:`NotWellPosedError` (annotated with the offending eps) when
    the limit problem or any instance fails unique solvability.  The
    convergence verdict uses the strict trend rule at tolerance ``tol``; an
    eps-independent family short-circuits to ``exact_match``.
    """
    eps_list = _check_eps_list(eps_list)

    def solve_at(eps):
        try:
            return solve(fam.instantiate(eps), N=N, integ_tol=integ_tol, sv_tol=sv_tol)
        except NotWellPosedError as exc:
            raise NotWellPosedError(f"at eps = {eps}: {exc}", eps=eps) from exc

    limit = solve_at(0.0)
    errors, eq_d, bc_d, ratios = [], [], [], []
    for eps in eps_list:
        inst = fam.instantiate(eps)
        current = solve_at(eps)
        errors.append(holder_norm(current.y - limit.y, (fam.n + 1, fam.alpha)))
        res = residual(inst, limit.y)
        eq_d.append(res.eq_residual)
        bc_d.append(res.bc_residual)
        total = res.eq_residual + res.bc_residual
        ratios.append(errors[-1] / total if total > 1e-14 else np.nan)

    finite = [r for r in ratios if np.isfinite(r)]
    exact = not finite and max(errors, default=0.0) <= 1e-10
    return ConvergenceReport(
        eps_list, errors, eq_d, bc_d, ratios,
        min(finite) if finite else np.nan, max(finite) if finite else np.nan,
        _trend_converged(errors, tol), exact)
