"""Straight-line paths X(s) = (1 - s) X + s Y between a matrix and a resampled copy.

Statistics along a path are evaluated on a finite grid of ``s`` values and
suprema are grid maxima.  Eigenvalues are followed by rank, not by
continuity, so a crossing shows up as a vanishing gap.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import NearDegenerateError, check_symmetric, eigh_batch, max_abs_entry
from .spectral import GAP_REL, deloc_max, delta_gaps, hat_index, inverse_spacing_sum

__all__ = [
    "PathGrid",
    "PathSweep",
    "TaylorReport",
    "path_point",
    "path_points",
    "path_spectrum_sweep",
    "taylor_residual",
]


@dataclass(frozen=True, eq=False)
class PathGrid:
    """Strictly increasing points in [0, 1] starting at 0 and ending at 1."""

    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("a grid needs at least the two endpoints")
        if p[0] != 0.0 or p[-1] != 1.0:
            raise ValueError("grid must start at 0 and end at 1")
        if np.any(np.diff(p) <= 0):
            raise ValueError("grid must be strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def q(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, q: int = 101) -> "PathGrid":
        return cls(np.linspace(0.0, 1.0, q))


def path_point(X, Y, s: float) -> np.ndarray:
    """(1 - s) X + s Y, returning exact copies at the endpoints."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s={s} outside [0, 1]")
    X, Y = check_symmetric(X), check_symmetric(Y, "Y")
    if X.shape != Y.shape:
        raise ValueError("dimension mismatch")
    if s == 0.0 or np.array_equal(X, Y):
        # a constant path stays bit-exact instead of picking up rounding
        return X.copy()
    if s == 1.0:
        return Y.copy()
    return (1.0 - s) * X + s * Y


def path_points(X, Y, grid: PathGrid) -> np.ndarray:
    """All grid matrices stacked on a new leading axis."""
    return np.stack([path_point(X, Y, s) for s in grid.points])


@dataclass(frozen=True, eq=False)
class PathSweep:
    """Per-grid-point values of lam_alpha, its gap, S_alpha and M."""

    alpha: int
    s: np.ndarray
    lambda_alpha: np.ndarray
    delta_alpha: np.ndarray
    s_alpha: np.ndarray
    m_infty: np.ndarray

    @property
    def sup_M(self) -> float:
        return float(self.m_infty.max())

    @property
    def sup_S(self) -> float:
        return float(self.s_alpha.max())

    @property
    def inf_delta(self) -> float:
        return float(self.delta_alpha.min())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("s,lambda_alpha,delta_alpha,s_alpha,m_infty\n")
        for row in zip(self.s, self.lambda_alpha, self.delta_alpha, self.s_alpha, self.m_infty):
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def path_spectrum_sweep(X, Y, grid: PathGrid, alpha: int, gap_tol=None, strict: bool = True) -> PathSweep:
    """Evaluate the spectrum at every grid point.

    With ``strict`` a gap below ``gap_tol`` anywhere on the grid raises
    :class:`NearDegenerateError` whose ``where`` attribute is the offending
    ``s``.  With ``strict=False`` the table is returned as is.
    """
    Xs = path_points(X, Y, grid)
    n = Xs.shape[-1]
    hat_index(alpha, n)
    lam, V = eigh_batch(Xs)
    delta = delta_gaps(lam, alpha)
    if strict:
        scale = np.max(np.abs(lam), axis=-1)
        tol = GAP_REL * (1.0 + scale) if gap_tol is None else np.full_like(scale, gap_tol)
        bad = np.nonzero(delta < tol)[0]
        if bad.size:
            s_bad = float(grid.points[bad[0]])
            raise NearDegenerateError(
                f"near-degenerate eigenvalue at alpha={alpha} on the path at s={s_bad}",
                float(delta[bad[0]]), where=s_bad)
    S = inverse_spacing_sum(lam, alpha) if n > 1 else np.zeros(grid.q)
    return PathSweep(alpha, grid.points.copy(), lam[:, alpha - 1], delta, S, deloc_max(V))


@dataclass(frozen=True)
class TaylorReport:
    """Zeroth and first order Taylor residuals with their envelopes.

    ``lhs0 = |lam(Y) - lam(X)|`` against ``bound0 = nu ||Y - X||_max sup M^2``;
    ``lhs1 = |lam(Y) - lam(X) - <v v^T, Y - X>|`` against
    ``bound1 = nu^2 ||Y - X||_max^2 sup (S_alpha M^4)``.
    """

    alpha: int
    lhs0: float
    bound0: float
    lhs1: float
    bound1: float
    first_order: float

    @property
    def holds(self) -> bool:
        return self.lhs0 <= self.bound0 and self.lhs1 <= self.bound1


def taylor_residual(X, Y, alpha: int, nu_B: int, grid: PathGrid | None = None, gap_tol=None) -> TaylorReport:
    """Compare the Taylor residuals of lam_alpha along the path with their bounds."""
    grid = PathGrid.uniform() if grid is None else grid
    X, Y = check_symmetric(X), check_symmetric(Y, "Y")
    D = Y - X
    if nu_B < 0:
        raise ValueError("nu_B must be nonnegative")
    support = D != 0
    if not np.array_equal(support, support.T):
        raise ValueError("Y - X is not supported on a symmetric set")
    sweep = path_spectrum_sweep(X, Y, grid, alpha, gap_tol)
    lam0 = sweep.lambda_alpha[0]
    lam1 = sweep.lambda_alpha[-1]
    lamX, VX = eigh_batch(X)
    v = VX[:, alpha - 1]
    first = float(v @ D @ v)
    d = max_abs_entry(D)
    lhs0 = abs(lam1 - lam0)
    lhs1 = abs(lam1 - lam0 - first)
    b0 = nu_B * d * float(np.max(sweep.m_infty ** 2))
    b1 = nu_B ** 2 * d * d * float(np.max(sweep.s_alpha * sweep.m_infty ** 4))
    return TaylorReport(alpha, float(lhs0), b0, float(lhs1), b1, first)
