"""The most general boundary operator on C^{n+1,alpha} solutions.

Every continuous linear boundary condition on the solution space is realized
in the canonical form

    B z = sum_{k=1}^{n+1} beta_k z^{(k-1)}(a) + integral over [a,b] of
          (d Phi(t)) z^{(n+1)}(t),

with number matrices beta_k and a matrix-valued integrator Phi of bounded
variation (a Riemann-Stieltjes integral against the top derivative).  This
covers initial conditions, multipoint conditions, integral conditions, and
conditions on derivatives.

The measure class here is jumps plus a continuous density: Phi may carry
finitely many jump matrices on (a, b] and an absolutely continuous part given
by a closed-form density matrix.  For this class the Stieltjes integral is
exactly (jump sum) + (density integral); singular-continuous parts are
numerically unreachable and excluded.  Jump locations are snapped to the
nearest grid node, so a single sampling contract serves every evaluation.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import DomainError, OrderError, UsageError
from .grid import GridFunction, Interval, as_expr_matrix
from .matriciant import Matriciant

__all__ = [
    "StieltjesMeasure", "BoundaryOperator",
    "apply_boundary", "boundary_matrix", "total_variation",
    "measure_difference", "measure_end_value", "measure_primitive",
]


def _eval_matrix(exprs, ts, eps=0.0):
    """Evaluate an expression matrix at an array of points, (len(ts), r, c)."""
    rows, cols = len(exprs), len(exprs[0])
    out = np.empty((len(ts), rows, cols), dtype=complex)
    with np.errstate(all="ignore"):
        for r in range(rows):
            for c in range(cols):
                out[:, r, c] = np.broadcast_to(
                    np.asarray(exprs[r][c].eval(ts, eps), dtype=complex), ts.shape)
    if not np.all(np.isfinite(out)):
        raise DomainError("boundary density evaluated to a non-finite value")
    return out


class StieltjesMeasure:
    """Bounded-variation integrator: finitely many jumps plus a density.

    ``jumps`` is a sequence of ``(location, matrix)`` pairs with locations in
    (a, b]; ``density`` is an m x m expression matrix (the derivative of the
    absolutely continuous part) or None for no such part.
    """

    __slots__ = ("m", "jumps", "density")

    def __init__(self, m, jumps=(), density=None):
        self.m = int(m)
        parsed = []
        for location, matrix in jumps:
            matrix = np.asarray(matrix, dtype=complex)
            if matrix.shape != (self.m, self.m):
                raise UsageError(f"jump matrix must be {self.m}x{self.m}, got {matrix.shape}")
            parsed.append((float(location), matrix))
        self.jumps = tuple(sorted(parsed, key=lambda jm: jm[0]))
        if density is not None:
            density = as_expr_matrix(density)
            if len(density) != self.m or len(density[0]) != self.m:
                raise UsageError(f"density must be {self.m}x{self.m}")
        self.density = density

    def is_zero(self):
        return not self.jumps and self.density is None

    def validate_locations(self, interval: Interval):
        for location, _ in self.jumps:
            if not interval.a < location <= interval.b:
                raise UsageError(
                    f"jump location {location} outside ({interval.a}, {interval.b}]")


class BoundaryOperator:
    """Boundary condition data: point matrices at ``a`` plus a Stieltjes part.

    ``betas[k-1]`` multiplies z^{(k-1)}(a); there are exactly n + 1 of them,
    which fixes the derivative order n the operator is built for.
    """

    __slots__ = ("betas", "phi")

    def __init__(self, betas, phi=None):
        betas = [np.asarray(b, dtype=complex) for b in betas]
        if not betas:
            raise UsageError("need at least one beta matrix (n + 1 of them)")
        m = betas[0].shape[0]
        for b in betas:
            if b.shape != (m, m):
                raise UsageError(f"all betas must be {m}x{m}, got {b.shape}")
        if phi is None:
            phi = StieltjesMeasure(m)
        if phi.m != m:
            raise UsageError(f"measure dimension {phi.m} != beta dimension {m}")
        self.betas = tuple(betas)
        self.phi = phi

    @property
    def m(self):
        return self.betas[0].shape[0]

    @property
    def n(self):
        return len(self.betas) - 1


def _simpson(values, dx):
    """Simpson quadrature along axis 0 of a complex stack."""
    return simpson(values.real, dx=dx, axis=0) + 1j * simpson(values.imag, dx=dx, axis=0)


def _snap_index(interval, N, location):
    return int(round((location - interval.a) / interval.length * N))


def apply_boundary(B: BoundaryOperator, z: GridFunction):
    """Evaluate B z for a column grid function with order >= n + 1 layers."""
    n = B.n
    if z.order < n + 1:
        raise OrderError(f"boundary operator needs z with {n + 1} derivative layers, "
                         f"got {z.order}")
    if z.shape != (B.m, 1):
        raise UsageError(f"z must be a {B.m}-component column, got shape {z.shape}")
    B.phi.validate_locations(z.interval)

    result = np.zeros((B.m, 1), dtype=complex)
    for k, beta in enumerate(B.betas):
        result += beta @ z.values[k, 0]
    top = z.layer(n + 1)
    for location, J in B.phi.jumps:
        result += J @ top[_snap_index(z.interval, z.N, location)]
    if B.phi.density is not None:
        rho = _eval_matrix(B.phi.density, z.ts)
        result += _simpson(np.matmul(rho, top), z.step)
    return result[:, 0]


def boundary_matrix(B: BoundaryOperator, Y: Matriciant):
    """The m x m matrix [BY] whose j-th column is B applied to Y's j-th column.

    Satisfies B(Y p) = [BY] p for every vector p; its invertibility is the
    well-posedness criterion for the boundary-value problem.
    """
    g = Y.grid
    if g.shape != (B.m, B.m):
        raise UsageError(f"matriciant is {g.shape}, boundary operator is {B.m}x{B.m}")
    columns = [apply_boundary(B, g.column(j)) for j in range(B.m)]
    return np.stack(columns, axis=1)


def total_variation(phi: StieltjesMeasure, interval: Interval, N: int = 1000) -> float:
    """Total variation over [a, b]: component-summed jumps plus density mass.

    The density integral uses a midpoint Riemann sum on N subintervals.
    """
    if N < 2:
        raise UsageError(f"need N >= 2, got {N}")
    phi.validate_locations(interval)
    value = sum(float(np.abs(J).sum()) for _, J in phi.jumps)
    if phi.density is not None:
        h = interval.length / N
        mids = interval.a + h * (np.arange(N) + 0.5)
        value += float(np.abs(_eval_matrix(phi.density, mids)).sum(axis=(1, 2)).sum() * h)
    return value


def measure_difference(phi1: StieltjesMeasure, phi2: StieltjesMeasure) -> StieltjesMeasure:
    """The signed measure phi1 - phi2 (jump matrices merge at equal locations)."""
    if phi1.m != phi2.m:
        raise UsageError("measure dimensions differ")
    merged = {}
    for location, J in phi1.jumps:
        merged[location] = merged.get(location, 0) + J
    for location, J in phi2.jumps:
        merged[location] = merged.get(location, 0) - J
    jumps = [(location, J) for location, J in sorted(merged.items())
             if np.abs(J).sum() > 0.0]
    if phi1.density is None and phi2.density is None:
        density = None
    else:
        zero = [[0.0] * phi1.m for _ in range(phi1.m)]
        d1 = phi1.density if phi1.density is not None else as_expr_matrix(zero)
        d2 = phi2.density if phi2.density is not None else as_expr_matrix(zero)
        density = [[d1[r][c] - d2[r][c] for c in range(phi1.m)] for r in range(phi1.m)]
    return StieltjesMeasure(phi1.m, jumps, density)


def measure_end_value(phi: StieltjesMeasure, interval: Interval, N: int = 1000):
    """Phi(b): all jumps plus the full density integral, as an m x m matrix."""
    phi.validate_locations(interval)
    value = np.zeros((phi.m, phi.m), dtype=complex)
    for _, J in phi.jumps:
        value += J
    if phi.density is not None:
        rho = _eval_matrix(phi.density, interval.grid(N))
        value += _simpson(rho, interval.length / N)
    return value


def measure_primitive(phi: StieltjesMeasure, interval: Interval, N: int = 1000):
    """The iterated integral t -> integral from a to t of Phi(s) ds at grid nodes.

    Phi itself is the right-continuous cumulative function vanishing at a.
    Jumps contribute J * max(0, t - c) exactly; the density part is integrated
    twice by cumulative Simpson quadrature.  Returns an (N+1, m, m) stack.
    """
    phi.validate_locations(interval)
    ts = interval.grid(N)
    out = np.zeros((N + 1, phi.m, phi.m), dtype=complex)
    for location, J in phi.jumps:
        out += np.maximum(0.0, ts - location)[:, None, None] * J
    if phi.density is not None:
        h = interval.length / N
        rho = _eval_matrix(phi.density, ts)
        cum = (cumulative_simpson(rho.real, dx=h, axis=0, initial=0.0)
               + 1j * cumulative_simpson(rho.imag, dx=h, axis=0, initial=0.0))
        out += (cumulative_simpson(cum.real, dx=h, axis=0, initial=0.0)
                + 1j * cumulative_simpson(cum.imag, dx=h, axis=0, initial=0.0))
    return out
