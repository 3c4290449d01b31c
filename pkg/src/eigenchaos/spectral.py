"""Spectral statistics of one symmetric matrix.

Indices ``alpha`` and ``beta`` are 1-based ranks in the descending spectrum.
Entry positions ``(i, j)`` passed to :func:`eig_hess` are 1-based as well.

Derivatives treat the n^2 entries as free coordinates.  For a symmetric
direction ``D``::

    d/dt   lam_alpha(X + tD) = sum_ij D_ij v_i v_j
    d2/dt2 lam_alpha(X + tD) = sum_ijab D_ij D_ab H_ijab,
    H_ijab = P_ja v_i v_b + P_bi v_j v_a,
    P      = sum_{beta != alpha} v_beta v_beta^T / (lam_alpha - lam_beta)

with ``v = v_alpha``.  ``P`` is assembled from the spectral sum above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import NearDegenerateError, Spectrum, check_symmetric, eigh, eigh_batch

__all__ = [
    "FConstants",
    "SpacingStats",
    "hat_index",
    "f_factor",
    "gap_tolerance",
    "delta_gaps",
    "overlap_sq",
    "overlaps_sq",
    "eig_grad",
    "pseudo_inverse",
    "eig_hess",
    "eig_hess_tensor",
    "spacing_stats",
    "inverse_spacing_sum",
    "deloc_max",
    "resolvent_diag_max",
    "semicircle_density",
    "semicircle_cdf",
    "classical_position",
    "classical_positions",
]

GAP_REL = 1e-10


def hat_index(alpha: int, n: int) -> int:
    """Distance to the nearer spectral edge, min(alpha, n + 1 - alpha)."""
    if not (1 <= alpha <= n):
        raise ValueError(f"alpha={alpha} outside [1, {n}]")
    return min(alpha, n + 1 - alpha)


@dataclass(frozen=True)
class FConstants:
    """Constants of the edge/bulk allowance factor."""

    A1: float = 1.0
    A2: float = 1.01

    def __post_init__(self):
        if not self.A1 > 0:
            raise ValueError("A1 must be positive")
        if not self.A2 > 1:
            raise ValueError("A2 must exceed 1")


def f_factor(n: int, alpha: int, consts: FConstants = FConstants()) -> float:
    """A1 at the edges (hat index 1), else (log n)^(A2 log log n)."""
    if n < 3:
        raise ValueError("f_factor needs n >= 3")
    if hat_index(alpha, n) == 1:
        return float(consts.A1)
    L = math.log(n)
    return L ** (consts.A2 * math.log(L))


def gap_tolerance(X_or_lam) -> float:
    """Default gap tolerance 1e-10 (1 + ||X||)."""
    a = np.asarray(X_or_lam.eigenvalues if isinstance(X_or_lam, Spectrum) else X_or_lam, dtype=float)
    if a.ndim == 2:
        a = np.linalg.eigvalsh(a)
    return GAP_REL * (1.0 + float(np.max(np.abs(a))))


def delta_gaps(lam, alpha: int) -> np.ndarray:
    """Gap of ``lam_alpha`` to its neighbours (batched over leading axes).

    The top and bottom eigenvalues have one neighbour; interior ones take
    the smaller of the two gaps.  For n = 1 the gap is infinite.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    a = alpha - 1
    if not (0 <= a < n):
        raise ValueError(f"alpha={alpha} outside [1, {n}]")
    if n == 1:
        return np.full(lam.shape[:-1], np.inf)
    gaps = []
    if a > 0:
        gaps.append(lam[..., a - 1] - lam[..., a])
    if a < n - 1:
        gaps.append(lam[..., a] - lam[..., a + 1])
    return np.minimum.reduce(gaps) if len(gaps) > 1 else gaps[0]


def _spectrum(X) -> Spectrum:
    return X if isinstance(X, Spectrum) else eigh(X)


def _guard(spec: Spectrum, alpha: int, gap_tol, all_gaps=False) -> None:
    tol = gap_tolerance(spec) if gap_tol is None else gap_tol
    lam = spec.eigenvalues
    if all_gaps:
        d = np.abs(np.delete(lam, alpha - 1) - lam[alpha - 1])
        g = float(d.min()) if d.size else math.inf
    else:
        g = float(delta_gaps(lam, alpha))
    if g < tol:
        raise NearDegenerateError(f"near-degenerate eigenvalue at alpha={alpha}: gap {g:.3g} < {tol:.3g}", g)


def overlap_sq(X, Y, alpha: int, gap_tol=None) -> float:
    """Squared inner product of the alpha-th unit eigenvectors of X and Y.

    Accepts matrices or :class:`Spectrum` objects.  Identical matrices give
    exactly 1.
    """
    if not isinstance(X, Spectrum) and not isinstance(Y, Spectrum):
        X, Y = check_symmetric(X), check_symmetric(Y, "Y")
        if np.array_equal(X, Y):
            _guard(_spectrum(X), alpha, gap_tol)
            return 1.0
    sx, sy = _spectrum(X), _spectrum(Y)
    _guard(sx, alpha, gap_tol)
    _guard(sy, alpha, gap_tol)
    if sx.n == 1:
        return 1.0
    ip = float(np.dot(sx.vector(alpha), sy.vector(alpha)))
    return min(1.0, ip * ip)


def overlaps_sq(V1, V2, alpha) -> np.ndarray:
    """Batched squared overlaps of eigenvector columns ``alpha`` (int or array of ints)."""
    a = np.atleast_1d(np.asarray(alpha)) - 1
    ip = np.einsum("...ia,...ia->...a", V1[..., :, a], V2[..., :, a])
    out = np.minimum(ip * ip, 1.0)
    return out[..., 0] if np.ndim(alpha) == 0 else out


def eig_grad(spec, alpha: int, gap_tol=None) -> np.ndarray:
    """Gradient of lam_alpha with respect to the entries: v v^T."""
    spec = _spectrum(spec)
    _guard(spec, alpha, gap_tol)
    v = spec.vector(alpha)
    return np.outer(v, v)


def pseudo_inverse(spec, alpha: int, gap_tol=None) -> np.ndarray:
    """(lam_alpha I - X)^+ from the eigen-decomposition."""
    spec = _spectrum(spec)
    _guard(spec, alpha, gap_tol, all_gaps=True)
    lam, V = spec.eigenvalues, spec.eigenvectors
    others = np.arange(spec.n) != alpha - 1
    w = 1.0 / (lam[alpha - 1] - lam[others])
    Vo = V[:, others]
    return (Vo * w) @ Vo.T


def eig_hess(spec, alpha: int, ij, ab, gap_tol=None) -> float:
    """Second derivative of lam_alpha in entries ``ij`` and ``ab`` (1-based)."""
    spec = _spectrum(spec)
    P = pseudo_inverse(spec, alpha, gap_tol)
    v = spec.vector(alpha)
    i, j = ij[0] - 1, ij[1] - 1
    a, b = ab[0] - 1, ab[1] - 1
    n = spec.n
    if not all(0 <= x < n for x in (i, j, a, b)):
        raise ValueError("entry index out of range")
    return float(P[j, a] * v[i] * v[b] + P[b, i] * v[j] * v[a])


def eig_hess_tensor(spec, alpha: int, gap_tol=None) -> np.ndarray:
    """All second derivatives as an array ``H[i, j, a, b]`` (0-based axes)."""
    spec = _spectrum(spec)
    P = pseudo_inverse(spec, alpha, gap_tol)
    v = spec.vector(alpha)
    return np.einsum("ja,i,b->ijab", P, v, v) + np.einsum("bi,j,a->ijab", P, v, v)


@dataclass(frozen=True)
class SpacingStats:
    """Inverse-gap sum, delocalization maximum and neighbour gap at one index."""

    S_alpha: float
    M: float
    Delta_alpha: float


def inverse_spacing_sum(lam, alpha: int) -> np.ndarray:
    """sum over beta != alpha of 1 / |lam_alpha - lam_beta| (batched)."""
    lam = np.asarray(lam, dtype=float)
    a = alpha - 1
    d = np.abs(np.delete(lam, a, axis=-1) - lam[..., a : a + 1])
    with np.errstate(divide="ignore"):
        return np.sum(1.0 / d, axis=-1)


def deloc_max(V) -> np.ndarray:
    """max over all eigenvectors and coordinates of |v_beta(i)| (batched)."""
    return np.max(np.abs(V), axis=(-2, -1))


def spacing_stats(spec, alpha: int, gap_tol=None) -> SpacingStats:
    spec = _spectrum(spec)
    lam = spec.eigenvalues
    hat_index(alpha, spec.n)
    tol = gap_tolerance(spec) if gap_tol is None else gap_tol
    d = np.abs(np.delete(lam, alpha - 1) - lam[alpha - 1])
    if d.size and d.min() < tol:
        raise NearDegenerateError(f"repeated eigenvalue at alpha={alpha}: gap {d.min():.3g}", float(d.min()))
    S = float(np.sum(1.0 / d)) if d.size else 0.0
    return SpacingStats(S, float(deloc_max(spec.eigenvectors)), float(delta_gaps(lam, alpha)))


def resolvent_diag_max(X, C: float = 3.0, eta: float = 0.1, w_grid: int = 512) -> float:
    """max over a uniform w-grid on [-C, C] and over i of |R(w + i eta)_ii| for X / sqrt(n).

    Uses R_ii(z) = sum_beta v_beta(i)^2 / (lam_beta / sqrt(n) - z).
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if w_grid < 2:
        raise ValueError("w_grid must be at least 2")
    spec = _spectrum(X)
    n = spec.n
    lam = spec.eigenvalues / math.sqrt(n)
    W = spec.eigenvectors ** 2  # (i, beta)
    best = 0.0
    for w in np.array_split(np.linspace(-C, C, w_grid), max(1, (w_grid * n) // 65536)):
        inv = 1.0 / (lam[None, :] - (w[:, None] + 1j * eta))  # (w, beta)
        best = max(best, float(np.max(np.abs(inv @ W.T))))
    return best


def semicircle_density(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2 * math.pi)


def semicircle_cdf(x) -> np.ndarray:
    """Closed-form distribution function of the semicircle law on [-2, 2]."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + (x * np.sqrt(4.0 - x * x) / 4.0 + np.arcsin(x / 2.0)) / math.pi


def classical_position(n: int, beta: int) -> float:
    """Point gamma with n * (mass of the semicircle above gamma) = beta.

    Found by bisection on the closed-form distribution function, run until
    the bracket stops shrinking in floating point.
    """
    if not (1 <= beta <= n):
        raise ValueError(f"beta={beta} outside [1, {n}]")
    if beta == n:
        return -2.0
    target = beta / n
    lo, hi = -2.0, 2.0  # tail mass is 1 at lo and 0 at hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        tail = 1.0 - float(semicircle_cdf(mid))
        if tail == target:
            return mid
        if tail > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classical_positions(n: int) -> np.ndarray:
    """gamma_1 >= ... >= gamma_n."""
    return np.array([classical_position(n, b) for b in range(1, n + 1)])
