"""Well-posedness test and solution of a single generic boundary-value problem.

The problem is y' + A(t) y = f(t) on [a, b] with the boundary condition
B y = q, where B is a generic boundary operator.  Everything reduces to the
m x m matrix [BY] built from the matriciant Y:

* the problem operator is Fredholm of index zero, so unique solvability is
  equivalent to det [BY] != 0 (tested through singular values, since raw
  determinant magnitude is scale-dependent);
* the solution decomposes as y = x + Y p with x the particular solution
  vanishing at a and p = [BY]^{-1} (q - B x).

This finite-dimensional reduction is the solver; no abstract inverse is ever
formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.integrate import solve_ivp

from .boundary import BoundaryOperator, apply_boundary, boundary_matrix
from .errors import IntegrationError, NotWellPosedError, OrderError, UsageError
from .expressions import free_variables
from .grid import GridFunction, Interval, as_expr_matrix, sample
from .matriciant import Matriciant, lift_derivatives, matriciant
from .norms import holder_norm

__all__ = ["ProblemInstance", "Solution", "WellposednessReport", "ResidualReport",
           "is_wellposed", "solve", "residual"]

DEFAULT_GRID = 1000
DEFAULT_INTEG_TOL = 1e-10
DEFAULT_SV_TOL = 1e-10


@dataclass
class ProblemInstance:
    """One boundary-value problem with closed-form data.

    ``A`` is an m x m expression matrix, ``f`` an m-vector of expressions
    (both in t only; bind the parameter first), ``B`` a boundary operator
    with n + 1 beta matrices, and ``q`` the boundary data vector.  ``n`` and
    ``alpha`` fix the smoothness class C^{n+1,alpha} the solution is sought in.
    """

    interval: Interval
    n: int
    alpha: float
    m: int
    A: list
    f: list
    B: BoundaryOperator
    q: np.ndarray

    def __post_init__(self):
        if self.n < 0 or self.m < 1 or not 0.0 <= self.alpha <= 1.0:
            raise UsageError(f"invalid smoothness data n={self.n}, alpha={self.alpha}, m={self.m}")
        self.A = as_expr_matrix(self.A)
        if len(self.A) != self.m or len(self.A[0]) != self.m:
            raise UsageError(f"A must be {self.m}x{self.m}")
        self.f = as_expr_matrix(self.f)
        if len(self.f) != self.m or len(self.f[0]) != 1:
            raise UsageError(f"f must be a {self.m}-component column")
        for row in self.A + self.f:
            for e in row:
                if "eps" in free_variables(e):
                    raise UsageError("instance data still contains the parameter; "
                                     "bind eps first (families do this on instantiate)")
        if self.B.m != self.m:
            raise UsageError(f"boundary operator dimension {self.B.m} != m = {self.m}")
        if self.B.n != self.n:
            raise UsageError(f"boundary operator carries {self.B.n + 1} beta matrices, "
                             f"expected n + 1 = {self.n + 1}")
        self.q = np.asarray(self.q, dtype=complex).reshape(self.m)

    @property
    def params(self):
        return (self.n + 1, self.alpha)


@dataclass
class WellposednessReport:
    wellposed: bool
    det: complex
    kernel_dim: int
    condition: float


@dataclass
class Solution:
    """Solution samples (order n + 1), matriciant coordinates, conditioning."""

    y: GridFunction
    p: np.ndarray
    condition: float


@dataclass
class ResidualReport:
    eq_residual: float
    bc_residual: float

    @property
    def total(self):
        return self.eq_residual + self.bc_residual


def _assemble(prob: ProblemInstance, N, integ_tol, max_step=np.inf):
    Y = matriciant(prob.A, prob.interval, t0=prob.interval.a, N=N,
                   order=prob.n + 1, tol=integ_tol, max_step=max_step)
    M = boundary_matrix(prob.B, Y)
    svals = np.linalg.svd(M, compute_uv=False)
    return Y, M, svals


def _classify(svals, sv_tol):
    largest = svals[0]
    kernel_dim = int(np.sum(svals <= sv_tol * largest))
    wellposed = bool(kernel_dim == 0 and largest > 0.0)
    condition = float(svals[0] / svals[-1]) if svals[-1] > 0.0 else np.inf
    return wellposed, kernel_dim, condition


def is_wellposed(prob: ProblemInstance, tol: float = DEFAULT_SV_TOL, *,
                 N: int = DEFAULT_GRID, integ_tol: float = DEFAULT_INTEG_TOL,
                 ) -> WellposednessReport:
    """Decide unique solvability through the singular values of [BY].

    The problem is well posed iff the smallest singular value exceeds
    ``tol`` times the largest; ``kernel_dim`` counts singular values at or
    below that cutoff and equals the dimension of the homogeneous solution
    space (index zero: rank + kernel_dim = m).
    """
    _, M, svals = _assemble(prob, N, integ_tol)
    wellposed, kernel_dim, condition = _classify(svals, tol)
    return WellposednessReport(wellposed, complex(np.linalg.det(M)), kernel_dim, condition)


def solve(prob: ProblemInstance, *, N: int = DEFAULT_GRID,
          integ_tol: float = DEFAULT_INTEG_TOL, sv_tol: float = DEFAULT_SV_TOL,
          max_step: float = np.inf) -> Solution:
    """Solve the boundary-value problem by the matriciant reduction.

    Steps: particular solution x with x(a) = 0 by adaptive Runge-Kutta,
    corrected data q_hat = q - B x, coordinates p from the pivoted linear
    solve [BY] p = q_hat, then y = x + Y p with derivative layers filled by
    the exact bootstrap recursion.
    """
    Y, M, svals = _assemble(prob, N, integ_tol, max_step)
    wellposed, kernel_dim, condition = _classify(svals, sv_tol)
    if not wellposed:
        raise NotWellPosedError(
            f"problem is not uniquely solvable: kernel dimension {kernel_dim}, "
            f"|det [BY]| = {abs(np.linalg.det(M)):.3e}")

    iv = prob.interval
    a_grid = sample(prob.A, iv, N, prob.n)
    f_grid = sample(prob.f, iv, N, prob.n)

    def rhs(t, v):
        a_t = np.array([[e.eval(t) for e in row] for row in prob.A], dtype=complex)
        f_t = np.array([row[0].eval(t) for row in prob.f], dtype=complex)
        return f_t - a_t @ v

    sol = solve_ivp(rhs, (iv.a, iv.b), np.zeros(prob.m, dtype=complex),
                    method="DOP853", t_eval=iv.grid(N), rtol=integ_tol,
                    atol=integ_tol, max_step=max_step)
    if not sol.success:
        raise IntegrationError(f"particular solution failed: {sol.message}")
    x0 = sol.y.T[:, :, None]

    x_lifted = lift_derivatives(a_grid, f_grid,
                                GridFunction(iv, x0[None]), order=prob.n + 1)
    q_hat = prob.q - apply_boundary(prob.B, x_lifted)
    p = np.linalg.solve(M, q_hat)

    y0 = x0 + Y.grid.layer(0) @ p[:, None]
    y = lift_derivatives(a_grid, f_grid, GridFunction(iv, y0[None]), order=prob.n + 1)
    return Solution(y, p, condition)


def residual(prob: ProblemInstance, y: GridFunction) -> ResidualReport:
    """Discrepancy of candidate samples in the problem's own norms.

    ``eq_residual`` is the (n, alpha) norm of y' + A y - f, with derivative
    layers of the residual built by the Leibniz rule; ``bc_residual`` is the
    component-summed boundary defect |B y - q|.
    """
    if y.order < prob.n + 1:
        raise OrderError(f"residual needs {prob.n + 1} layers of y, got {y.order}")
    if y.shape != (prob.m, 1):
        raise UsageError(f"y must be a {prob.m}-component column, got {y.shape}")
    iv = prob.interval
    a_grid = sample(prob.A, iv, y.N, prob.n)
    f_grid = sample(prob.f, iv, y.N, prob.n)

    layers = []
    for j in range(prob.n + 1):
        acc = np.array(y.values[j + 1], copy=True)
        for r in range(j + 1):
            acc += comb(j, r) * np.matmul(a_grid.values[r], y.values[j - r])
        layers.append(acc - f_grid.values[j])
    eq = holder_norm(GridFunction(iv, np.stack(layers)), (prob.n, prob.alpha))
    bc = float(np.abs(apply_boundary(prob.B, y) - prob.q).sum())
    return ResidualReport(eq, bc)
