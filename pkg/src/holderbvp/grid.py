"""Uniform-grid samples of matrix-valued functions together with derivatives.

A :class:`GridFunction` stores a function and its first ``order`` exact
derivatives at the nodes of a uniform grid.  It is the discrete stand-in for
membership in a Holder space: every norm, quadrature, and boundary functional
in the library consumes these samples.  Derivative layers always come from
symbolic differentiation or from Leibniz recursions on an ODE, never from
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OrderError, UsageError
from .expressions import Expr, as_expr

__all__ = ["Interval", "GridFunction", "sample", "as_expr_matrix"]


@dataclass(frozen=True)
class Interval:
    """A finite interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise UsageError("interval endpoints must be finite")
        if not self.a < self.b:
            raise UsageError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self):
        return self.b - self.a

    def grid(self, N):
        return np.linspace(self.a, self.b, N + 1)


class GridFunction:
    """Samples of a (rows x cols) function and its derivatives on a uniform grid.

    ``values[j, i]`` is the j-th derivative at ``t_i = a + i*(b-a)/N`` as a
    (rows, cols) complex matrix, for ``0 <= j <= order`` and ``0 <= i <= N``.
    Instances are immutable after construction.
    """

    __slots__ = ("interval", "N", "order", "shape", "values")

    def __init__(self, interval: Interval, values):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 4:
            raise UsageError(
                f"values must have shape (order+1, N+1, rows, cols), got {values.shape}")
        if values.shape[1] < 3:
            raise UsageError("grid needs at least N = 2 subintervals")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid function contains non-finite samples")
        values.setflags(write=False)
        self.interval = interval
        self.N = values.shape[1] - 1
        self.order = values.shape[0] - 1
        self.shape = values.shape[2:]
        self.values = values

    @property
    def ts(self):
        return self.interval.grid(self.N)

    @property
    def step(self):
        return self.interval.length / self.N

    def layer(self, j):
        """All samples of the j-th derivative, shape (N+1, rows, cols)."""
        if j > self.order:
            raise OrderError(f"derivative order {j} requested, only {self.order} stored")
        return self.values[j]

    def column(self, j) -> "GridFunction":
        """The j-th column as a (rows, 1) grid function."""
        return GridFunction(self.interval, self.values[:, :, :, j:j + 1])

    def truncated(self, order) -> "GridFunction":
        """A view holding only derivative layers 0..order."""
        if order > self.order:
            raise OrderError(f"cannot extend order {self.order} to {order}")
        return GridFunction(self.interval, self.values[:order + 1])

    def _check_compatible(self, other):
        if self.interval != other.interval or self.N != other.N:
            raise UsageError("grid functions live on different grids")
        if self.shape != other.shape:
            raise UsageError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_compatible(other)
        order = min(self.order, other.order)
        return GridFunction(self.interval,
                            self.values[:order + 1] + other.values[:order + 1])

    def __sub__(self, other):
        self._check_compatible(other)
        order = min(self.order, other.order)
        return GridFunction(self.interval,
                            self.values[:order + 1] - other.values[:order + 1])

    def __mul__(self, scalar):
        return GridFunction(self.interval, self.values * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return (f"GridFunction({self.shape[0]}x{self.shape[1]} on "
                f"[{self.interval.a}, {self.interval.b}], N={self.N}, order={self.order})")


def as_expr_matrix(entries):
    """Normalize scalar / vector / matrix expression data to a 2D list of Expr.

    Scalars become 1x1, flat sequences become column vectors, nested sequences
    are taken row-major.  Numbers are wrapped as constants.
    """
    if isinstance(entries, Expr) or np.isscalar(entries):
        return [[as_expr(entries)]]
    if isinstance(entries, np.ndarray) and entries.ndim == 2:
        return [[as_expr(v) for v in row] for row in entries]
    rows = list(entries)
    if not rows:
        raise UsageError("empty expression matrix")
    if all(isinstance(r, Expr) or np.isscalar(r) for r in rows):
        return [[as_expr(r)] for r in rows]
    out = [[as_expr(v) for v in row] for row in rows]
    ncols = len(out[0])
    if any(len(row) != ncols for row in out):
        raise UsageError("ragged expression matrix")
    return out


def sample(entries, interval: Interval, N: int, order: int, eps: float = 0.0) -> GridFunction:
    """Sample an expression matrix and its t-derivatives on the uniform grid.

    Layer ``j`` holds the exact j-th symbolic derivative evaluated at the grid
    points with the parameter fixed at ``eps``.
    """
    if N < 2:
        raise UsageError(f"need N >= 2 subintervals, got {N}")
    if order < 0:
        raise UsageError(f"derivative order must be >= 0, got {order}")
    matrix = as_expr_matrix(entries)
    rows, cols = len(matrix), len(matrix[0])
    ts = interval.grid(N)
    values = np.empty((order + 1, N + 1, rows, cols), dtype=complex)
    with np.errstate(all="ignore"):
        for r in range(rows):
            for c in range(cols):
                e = matrix[r][c]
                for j in range(order + 1):
                    v = np.asarray(e.eval(ts, eps), dtype=complex)
                    values[j, :, r, c] = np.broadcast_to(v, ts.shape)
                    e = e.diff("t")
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise DomainError(
            f"non-finite sample at derivative order {bad[0]}, t = {ts[bad[1]]!r}, "
            f"entry ({bad[2]}, {bad[3]}), eps = {eps!r}")
    return GridFunction(interval, values)
