"""Discrete sup and Holder norms of grid functions.

The norm of order ``l`` sums, over derivative orders ``j <= l`` and over all
matrix components, the maximum absolute sample value.  The Holder seminorm of
exponent ``alpha`` takes, per component, the maximum difference quotient
``|g(t_i) - g(t_k)| / |t_i - t_k|^alpha`` over **all** grid pairs, then sums
over components; adjacent-pair quotients alone underestimate badly for small
alpha.  These discrete norms are lower bounds of the continuum values and are
the library's declared ground truth: every convergence statement is made in
them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrderError, UsageError
from .grid import GridFunction

__all__ = ["HolderParams", "sup_norm", "holder_seminorm", "holder_norm"]


@dataclass(frozen=True)
class HolderParams:
    """Smoothness parameters: derivative order ``l`` and exponent ``alpha``.

    ``alpha = 0`` selects the plain C^l norm (no seminorm term).
    """

    l: int
    alpha: float

    def __post_init__(self):
        if self.l < 0:
            raise UsageError(f"derivative order must be >= 0, got {self.l}")
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError(f"alpha must lie in [0, 1], got {self.alpha}")


def _require_order(g: GridFunction, l: int):
    if l < 0:
        raise UsageError(f"derivative order must be >= 0, got {l}")
    if g.order < l:
        raise OrderError(f"norm of order {l} needs {l} derivative layers, "
                         f"grid function has {g.order}")


def sup_norm(g: GridFunction, l: int) -> float:
    """Sum over j <= l and over components of the max absolute sample."""
    _require_order(g, l)
    return float(sum(np.abs(g.values[j]).max(axis=0).sum() for j in range(l + 1)))


def holder_seminorm(g: GridFunction, l: int, alpha: float) -> float:
    """Max difference quotient of the l-th derivative over all grid pairs.

    A lower bound of the continuum seminorm that is non-decreasing under grid
    refinement (nested grids only enlarge the pair set).
    """
    _require_order(g, l)
    if not 0.0 < alpha <= 1.0:
        raise UsageError(f"seminorm needs 0 < alpha <= 1, got {alpha} "
                         "(alpha = 0 has no seminorm term)")
    ts = g.ts
    gaps = np.abs(ts[:, None] - ts[None, :]) ** alpha
    np.fill_diagonal(gaps, np.inf)
    layer = g.values[l]
    total = 0.0
    for r in range(g.shape[0]):
        for c in range(g.shape[1]):
            v = layer[:, r, c]
            quotients = np.abs(v[:, None] - v[None, :]) / gaps
            total += float(quotients.max())
    return total


def holder_norm(g: GridFunction, params) -> float:
    """Norm of order (l, alpha): sup part plus seminorm when alpha > 0."""
    if isinstance(params, tuple):
        params = HolderParams(*params)
    value = sup_norm(g, params.l)
    if params.alpha > 0.0:
        value += holder_seminorm(g, params.l, params.alpha)
    return value
