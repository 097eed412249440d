"""Fundamental matrices of Y' = -A(t) Y and their derivative structure.

Two independent routes compute the matriciant (the fundamental matrix
normalized to the identity at an anchor point t0):

* :func:`matriciant` integrates the matrix ODE with an adaptive embedded
  Runge-Kutta pair (the fast route),
* :func:`picard_matriciant` iterates Y <- I - V[A] Y with the Volterra
  operator (V[A] Y)(t) = integral from t0 to t of A Y, discretized by
  composite Simpson quadrature (the slow oracle; the iteration converges for
  every A because the operator has spectral radius zero).

Higher derivative layers are always filled through the Leibniz recursion on
the differential equation itself, so no derivative is ever produced by finite
differences.  :func:`recover_coefficient` inverts the map A -> Y pointwise via
A = -Y' Y^{-1}, and :func:`lift_derivatives` bootstraps solution derivatives
from y' = f - A y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .errors import (ConvergenceError, IntegrationError, OrderError,
                     SingularMatriciantError, UsageError)
from .grid import GridFunction, Interval, as_expr_matrix, sample

__all__ = [
    "Matriciant", "matriciant", "picard_matriciant",
    "recover_coefficient", "lift_derivatives", "volterra_apply",
    "liouville_defect", "product_layers",
]

# |det Y| at or below this multiple of the integration tolerance signals
# numerical breakdown (theory guarantees det Y(t) != 0 everywhere).
_SINGULAR_FACTOR = 1e3


@dataclass
class Matriciant:
    """Fundamental matrix samples with derivative layers and its anchor.

    ``grid.layer(0)[i]`` is Y(t_i) with Y(t0) = I; higher layers follow the
    Leibniz recursion on Y' = -A Y.  ``tol`` records the tolerance the
    producing route was run at.
    """

    grid: GridFunction
    t0: float
    tol: float
    liouville_defect: float = field(default=np.nan)

    @property
    def interval(self):
        return self.grid.interval

    @property
    def m(self):
        return self.grid.shape[0]


def _cumulative_simpson(stack, dx):
    """Cumulative integral along axis 0 of a complex (N+1, ...) stack."""
    re = cumulative_simpson(stack.real, dx=dx, axis=0, initial=0.0)
    im = cumulative_simpson(stack.imag, dx=dx, axis=0, initial=0.0)
    return re + 1j * im


def _anchor_index(interval, N, t0):
    if t0 is None:
        return 0
    if not interval.a <= t0 <= interval.b:
        raise UsageError(f"anchor t0 = {t0} outside [{interval.a}, {interval.b}]")
    return int(round((t0 - interval.a) / interval.length * N))


def product_layers(a_layers, b_layers, upto):
    """Derivative layers of a matrix product from layers of the factors."""
    out = []
    for j in range(upto + 1):
        acc = np.zeros(np.matmul(a_layers[0], b_layers[0]).shape, dtype=complex)
        for r in range(j + 1):
            acc += comb(j, r) * np.matmul(a_layers[r], b_layers[j - r])
        out.append(acc)
    return np.stack(out)


def _ode_layers(a_layers, f_layers, y0, order):
    """Layers 0..order of y from y' = f - A y, given layer 0 and data layers."""
    layers = [np.asarray(y0, dtype=complex)]
    for j in range(order):
        acc = np.array(f_layers[j], dtype=complex, copy=True) if f_layers is not None \
            else np.zeros_like(layers[0])
        for r in range(j + 1):
            acc -= comb(j, r) * np.matmul(a_layers[r], layers[j - r])
        layers.append(acc)
    return np.stack(layers)


def _check_nonsingular(layer0, tol):
    dets = np.linalg.det(layer0)
    dmin = np.abs(dets).min()
    if dmin <= _SINGULAR_FACTOR * tol:
        raise SingularMatriciantError(
            f"min |det Y| = {dmin:.3e} on the grid (tolerance {tol:.1e}); "
            "numerical breakdown, not a property of the problem")
    return dets


def _liouville_defect(dets, trace_vals, anchor, dx):
    cumtrace = _cumulative_simpson(trace_vals, dx)
    cumtrace = cumtrace - cumtrace[anchor]
    predicted = np.exp(-cumtrace)
    return float(np.max(np.abs(dets - predicted) / np.abs(predicted)))


def matriciant(A, interval: Interval, *, t0=None, N: int = 1000, order: int = 1,
               tol: float = 1e-10, eps: float = 0.0,
               max_step: float = np.inf) -> Matriciant:
    """Matriciant by adaptive Runge-Kutta integration of Y' = -A Y, Y(t0) = I.

    Parameters
    ----------
    A : expression matrix (nested sequences of Expr or numbers)
        Coefficient matrix; must be symbolically differentiable ``order - 1``
        times for the derivative layers.
    interval : Interval
        Domain [a, b].
    t0 : float, optional
        Anchor point, snapped to the nearest grid node.  Defaults to ``a``.
    N, order : int
        Grid resolution and number of derivative layers to fill (order >= 1).
    tol : float
        Relative and absolute tolerance of the embedded pair (DOP853).
    eps : float
        Parameter value at which expression entries are evaluated.

    The determinant is checked against the prediction of the
    Liouville-Jacobi identity det Y(t) = exp(-integral of trace A); the
    maximum relative deviation is stored as ``liouville_defect``.
    """
    exprs = as_expr_matrix(A)
    m = len(exprs)
    if any(len(row) != m for row in exprs):
        raise UsageError("coefficient matrix must be square")
    if order < 1:
        raise UsageError("matriciant needs order >= 1 (layer Y' is structural)")

    a_grid = sample(exprs, interval, N, order - 1, eps)
    ts = a_grid.ts
    idx0 = _anchor_index(interval, N, t0)
    t0s = float(ts[idx0])

    def a_of(t):
        return np.array([[e.eval(t, eps) for e in row] for row in exprs], dtype=complex)

    def rhs(t, y):
        return -(a_of(t) @ y.reshape(m, m)).ravel()

    layer0 = np.empty((N + 1, m, m), dtype=complex)
    identity = np.eye(m, dtype=complex).ravel()
    for t_end, segment in ((interval.b, ts[idx0:]), (interval.a, ts[:idx0 + 1][::-1])):
        if len(segment) < 2:
            layer0[idx0] = identity.reshape(m, m)
            continue
        sol = solve_ivp(rhs, (t0s, t_end), identity, method="DOP853",
                        t_eval=segment, rtol=tol, atol=tol, max_step=max_step)
        if not sol.success:
            raise IntegrationError(f"integrator failed on [{t0s}, {t_end}]: {sol.message}")
        for k, i in enumerate(range(idx0, idx0 + len(segment)) if t_end == interval.b
                              else range(idx0, idx0 - len(segment), -1)):
            layer0[i] = sol.y[:, k].reshape(m, m)

    dets = _check_nonsingular(layer0, tol)
    defect = _liouville_defect(dets, np.trace(a_grid.layer(0), axis1=1, axis2=2),
                               idx0, a_grid.step)
    if defect > 1e-4:
        raise IntegrationError(
            f"determinant deviates from the Liouville-Jacobi identity by {defect:.2e}")

    layers = _ode_layers(a_grid.values, None, layer0, order)
    return Matriciant(GridFunction(interval, layers), t0s, tol, defect)


def picard_matriciant(A: GridFunction, t0=None, max_iter: int = 200,
                      stop_tol: float = 1e-10) -> Matriciant:
    """Matriciant by fixed-point iteration Y <- I - V[A] Y on the grid.

    Simpson quadrature realizes the Volterra operator; iteration starts at
    Y = I and stops when the sup of the component-summed increment drops
    below ``stop_tol``.  Slow but independent of the Runge-Kutta route, which
    it serves as an oracle for.
    """
    if A.shape[0] != A.shape[1]:
        raise UsageError("coefficient grid function must be square")
    idx0 = _anchor_index(A.interval, A.N, t0)
    a0 = A.layer(0)
    identity = np.broadcast_to(np.eye(A.shape[0], dtype=complex), a0.shape)

    y = np.array(identity)
    for _ in range(max_iter):
        integral = _cumulative_simpson(np.matmul(a0, y), A.step)
        y_next = identity - (integral - integral[idx0])
        increment = np.abs(y_next - y).sum(axis=(1, 2)).max()
        y = y_next
        if increment < stop_tol:
            break
    else:
        raise ConvergenceError(
            f"Picard iteration: increment {increment:.3e} after {max_iter} iterations "
            f"(target {stop_tol:.1e})")

    dets = _check_nonsingular(y, stop_tol)
    defect = _liouville_defect(dets, np.trace(a0, axis1=1, axis2=2), idx0, A.step)
    layers = _ode_layers(A.values, None, y, A.order + 1)
    return Matriciant(GridFunction(A.interval, layers), float(A.ts[idx0]),
                      stop_tol, defect)


def recover_coefficient(Y: Matriciant) -> GridFunction:
    """Coefficient matrix A = -Y' Y^{-1} with derivative layers from Y's.

    Inverts the Leibniz recursion that produced Y's layers: with n + 1 layers
    of Y available, A comes back with layers 0..n.  This is the inverse of the
    coefficient-to-matriciant map, which is a bijection onto fundamental
    matrices anchored at t0.
    """
    g = Y.grid
    if g.order < 1:
        raise OrderError("recovering the coefficient needs at least the Y' layer")
    _check_nonsingular(g.layer(0), Y.tol)
    try:
        inv0 = np.linalg.inv(g.layer(0))
    except np.linalg.LinAlgError as exc:
        raise SingularMatriciantError(f"Y is singular on the grid: {exc}") from exc

    a_layers = []
    for j in range(g.order):
        acc = -np.array(g.layer(j + 1), copy=True)
        for r in range(j):
            acc -= comb(j, r) * np.matmul(a_layers[r], g.layer(j - r))
        a_layers.append(np.matmul(acc, inv0))
    return GridFunction(g.interval, np.stack(a_layers))


def lift_derivatives(A: GridFunction, f: GridFunction, y: GridFunction,
                     order=None) -> GridFunction:
    """Fill derivative layers of a solution of y' + A y = f from its values.

    Uses y^(j+1) = f^(j) - sum_r C(j, r) A^(r) y^(j-r) for j = 0..n, the
    numerical form of the regularity bootstrap: data layers up to n produce
    solution layers up to n + 1 without any finite differencing.
    """
    n = min(A.order, f.order) if order is None else order - 1
    if A.order < n or f.order < n:
        raise OrderError(f"lift to order {n + 1} needs data layers up to {n}; "
                         f"A has {A.order}, f has {f.order}")
    if A.shape[1] != y.shape[0] or f.shape != y.shape:
        raise OrderError(f"shape mismatch: A {A.shape}, f {f.shape}, y {y.shape}")
    if not (A.interval == f.interval == y.interval and A.N == f.N == y.N):
        raise UsageError("A, f, y must share one grid")
    layers = _ode_layers(A.values, f.values, y.layer(0), n + 1)
    return GridFunction(y.interval, layers)


def volterra_apply(A: GridFunction, Y: GridFunction, t0=None, order: int = 0) -> GridFunction:
    """Apply the Volterra operator (V[A] Y)(t) = integral from t0 to t of A Y.

    Layer 0 is Simpson quadrature on the common grid; higher layers come from
    (V[A] Y)' = A Y and the Leibniz rule.
    """
    if A.shape[1] != Y.shape[0]:
        raise UsageError(f"shape mismatch: A {A.shape} cannot multiply Y {Y.shape}")
    if A.interval != Y.interval or A.N != Y.N:
        raise UsageError("A and Y must share one grid")
    idx0 = _anchor_index(Y.interval, Y.N, t0)
    upto = min(A.order, Y.order)
    if order - 1 > upto:
        raise OrderError(f"layers to order {order} need factor layers up to {order - 1}")
    prod = product_layers(A.values, Y.values, max(order - 1, 0))
    integral = _cumulative_simpson(prod[0], Y.step)
    layers = [integral - integral[idx0]]
    for j in range(order):
        layers.append(prod[j])
    return GridFunction(Y.interval, np.stack(layers))


def liouville_defect(Y: Matriciant, A: GridFunction) -> float:
    """Max relative deviation of det Y from exp(-integral of trace A)."""
    idx0 = _anchor_index(Y.interval, Y.grid.N, Y.t0)
    dets = np.linalg.det(Y.grid.layer(0))
    return _liouville_defect(dets, np.trace(A.layer(0), axis1=1, axis2=2),
                             idx0, A.step)
