"""Random symmetric matrices and the symmetric eigendecomposition.

Matrices are plain ``numpy`` arrays of shape ``(n, n)``, or ``(T, n, n)``
for a batch of ``T`` independent draws.  Symmetry is exact: samplers fill
the upper triangle and mirror it, so ``X[i, j] == X[j, i]`` bit for bit.

Eigenvalues are reported in descending order, ``lam[0] >= lam[1] >= ...``,
so that index ``alpha`` (1-based) refers to the ``alpha``-th largest
eigenvalue.  Eigenvectors are the columns of ``V`` with the sign fixed so
that the entry of largest magnitude is positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .io import atomic_write_text
from .seeding import as_generator

__all__ = [
    "EigenDecompositionError",
    "NearDegenerateError",
    "VarianceProfile",
    "EntryLaw",
    "Ensemble",
    "Spectrum",
    "check_symmetric",
    "symmetrize_upper",
    "sample_goe",
    "sample_generalized_wigner",
    "eigh",
    "eigh_batch",
    "eigvals_desc",
    "canonicalize_signs",
    "operator_norm",
    "max_abs_entry",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]


class EigenDecompositionError(RuntimeError):
    """The eigensolver failed to converge or produced non-finite output."""


class NearDegenerateError(ValueError):
    """Two eigenvalues are closer than the gap tolerance.

    Attributes
    ----------
    gap : float
        The offending gap.
    where : object
        Optional context, for example the path parameter ``s``.
    """

    def __init__(self, msg, gap=float("nan"), where=None):
        super().__init__(msg)
        self.gap = gap
        self.where = where


# ---------------------------------------------------------------------------
# validation helpers


def check_symmetric(X, name="X") -> np.ndarray:
    """Return ``X`` as a float array after checking shape, finiteness and symmetry."""
    X = np.asarray(X, dtype=float)
    if X.ndim < 2 or X.shape[-1] != X.shape[-2] or X.shape[-1] < 1:
        raise ValueError(f"{name} must be square with n >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(X, np.swapaxes(X, -1, -2)):
        raise ValueError(f"{name} is not exactly symmetric")
    return X


def symmetrize_upper(A) -> np.ndarray:
    """Symmetric matrix that agrees with ``A`` on and above the diagonal."""
    U = np.triu(A)
    return U + np.swapaxes(np.triu(U, 1), -1, -2)


def max_abs_entry(X) -> float:
    """Entrywise sup norm max_ij |X_ij|."""
    return float(np.max(np.abs(X)))


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    """Entrywise variances of a generalized Wigner matrix.

    Parameters
    ----------
    sigma2 : (n, n) array
        Symmetric array of variances.
    c1, c2 : float, optional
        Declared lower and upper bounds on the variances.
    normalized : bool
        Assert that every row sums to ``n``.
    """

    sigma2: np.ndarray
    c1: float | None = None
    c2: float | None = None
    normalized: bool = False
    n: int = field(init=False)

    def __post_init__(self):
        s2 = np.array(self.sigma2, dtype=float)
        if s2.ndim != 2 or s2.shape[0] != s2.shape[1] or s2.shape[0] < 1:
            raise ValueError("sigma2 must be a square array")
        if not np.all(np.isfinite(s2)) or np.any(s2 < 0):
            raise ValueError("variances must be finite and nonnegative")
        if not np.array_equal(s2, s2.T):
            raise ValueError("sigma2 must be symmetric")
        n = s2.shape[0]
        if self.c1 is not None and np.any(s2 < self.c1):
            raise ValueError(f"variance below declared lower bound c1={self.c1}")
        if self.c2 is not None and np.any(s2 > self.c2):
            raise ValueError(f"variance above declared upper bound c2={self.c2}")
        if self.normalized:
            rows = s2.sum(axis=1)
            bad = np.abs(rows - n) > 1e-9 * n
            if np.any(bad):
                i = int(np.argmax(bad))
                raise ValueError(f"row {i + 1} sums to {rows[i]!r}, not n={n}")
        s2.setflags(write=False)
        object.__setattr__(self, "sigma2", s2)
        object.__setattr__(self, "n", n)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)

    @classmethod
    def ones(cls, n: int) -> "VarianceProfile":
        """Wigner profile, every variance equal to one."""
        return cls(np.ones((n, n)), c1=1.0, c2=1.0, normalized=True)

    @classmethod
    def goe(cls, n: int) -> "VarianceProfile":
        """GOE profile: 2 on the diagonal, 1 off it (rows sum to n + 1)."""
        return cls(np.ones((n, n)) + np.eye(n), c1=1.0, c2=2.0, normalized=False)

    @classmethod
    def checkerboard(cls, n: int, low: float = 0.5, high: float = 1.5) -> "VarianceProfile":
        """``low`` where i + j is even, ``high`` where it is odd.

        Rows sum to n when n is even and low + high = 2.
        """
        i, j = np.indices((n, n))
        s2 = np.where((i + j) % 2 == 0, low, high).astype(float)
        norm = n % 2 == 0 and math.isclose(low + high, 2.0)
        return cls(s2, c1=min(low, high), c2=max(low, high), normalized=norm)


_LAWS = ("gaussian", "uniform-scaled", "shifted-bimodal-smoothed")


@dataclass(frozen=True)
class EntryLaw:
    """Distribution of a standardised entry (mean 0, variance 1, with a density).

    ``gaussian``
        N(0, 1).
    ``uniform-scaled``
        Uniform on [-sqrt(3), sqrt(3)].
    ``shifted-bimodal-smoothed``
        ``±shift`` with equal probability plus independent
        N(0, 1 - shift**2) smoothing; ``shift`` lies in [0, 1).
    """

    kind: str = "gaussian"
    shift: float = 0.8

    def __post_init__(self):
        if self.kind not in _LAWS:
            raise ValueError(f"unknown entry law {self.kind!r}; choose from {_LAWS}")
        if not (0.0 <= self.shift < 1.0):
            raise ValueError("shift must lie in [0, 1)")

    def sample(self, gen: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian":
            return gen.standard_normal(shape)
        if self.kind == "uniform-scaled":
            r3 = math.sqrt(3.0)
            return gen.uniform(-r3, r3, shape)
        signs = np.where(gen.random(shape) < 0.5, -self.shift, self.shift)
        return signs + math.sqrt(1.0 - self.shift ** 2) * gen.standard_normal(shape)

    def density(self, x) -> np.ndarray:
        """Probability density of the standardised law."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        if self.kind == "uniform-scaled":
            r3 = math.sqrt(3.0)
            return np.where(np.abs(x) <= r3, 1 / (2 * r3), 0.0)
        s2 = 1.0 - self.shift ** 2
        g = lambda y: np.exp(-0.5 * y * y / s2) / math.sqrt(2 * math.pi * s2)
        return 0.5 * (g(x - self.shift) + g(x + self.shift))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """A variance profile together with an entry law."""

    profile: VarianceProfile
    law: EntryLaw = EntryLaw()

    @property
    def n(self) -> int:
        return self.profile.n

    @classmethod
    def goe(cls, n: int) -> "Ensemble":
        return cls(VarianceProfile.goe(n), EntryLaw("gaussian"))

    @classmethod
    def wigner(cls, n: int, law: str = "gaussian") -> "Ensemble":
        return cls(VarianceProfile.ones(n), EntryLaw(law))

    def sample(self, rng, size: int | None = None) -> np.ndarray:
        """One matrix, or a ``(size, n, n)`` batch."""
        gen = as_generator(rng)
        n = self.n
        shape = (n, n) if size is None else (int(size), n, n)
        Z = self.law.sample(gen, shape)
        return symmetrize_upper(Z * self.profile.sigma)


def sample_goe(n: int, rng, size: int | None = None) -> np.ndarray:
    """GOE draw: N(0, 2) on the diagonal, N(0, 1) off it."""
    if n < 1:
        raise ValueError("n must be positive")
    return Ensemble.goe(n).sample(rng, size)


def sample_generalized_wigner(profile: VarianceProfile, law: EntryLaw, rng, size=None) -> np.ndarray:
    """Symmetric matrix with independent entries ``sigma_ij * xi_ij`` on and above the diagonal."""
    if not isinstance(profile, VarianceProfile):
        raise TypeError("profile must be a VarianceProfile")
    return Ensemble(profile, law).sample(rng, size)


# ---------------------------------------------------------------------------
# eigendecomposition


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Descending eigenvalues and matching unit eigenvectors (as columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def source_dim(self) -> int:
        return self.eigenvalues.shape[0]

    n = source_dim

    def value(self, alpha: int) -> float:
        return float(self.eigenvalues[alpha - 1])

    def vector(self, alpha: int) -> np.ndarray:
        return self.eigenvectors[:, alpha - 1]

    def check(self, X=None, tol_orth=1e-10, tol_rec=1e-9) -> None:
        """Raise ``AssertionError`` if the stated invariants fail."""
        lam, V = self.eigenvalues, self.eigenvectors
        assert np.all(np.diff(lam) <= 0), "eigenvalues not descending"
        n = lam.shape[0]
        err = np.max(np.abs(V.T @ V - np.eye(n)))
        assert err <= tol_orth, f"orthonormality error {err:.3g}"
        if X is not None:
            rec = np.linalg.norm((V * lam) @ V.T - X)
            assert rec <= tol_rec * (1 + np.linalg.norm(X)), f"reconstruction error {rec:.3g}"


def canonicalize_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive.

    Ties in magnitude go to the lowest row index.  Works on batches.
    """
    idx = np.argmax(np.abs(V), axis=-2)
    pivot = np.take_along_axis(V, idx[..., None, :], axis=-2)
    return V * np.where(pivot < 0, -1.0, 1.0)


def eigh_batch(X) -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenvalues and canonical eigenvectors of a batch.

    Returns arrays of shapes ``(..., n)`` and ``(..., n, n)``.
    """
    try:
        w, V = np.linalg.eigh(X)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(f"symmetric eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise EigenDecompositionError("symmetric eigensolver returned non-finite values")
    return w[..., ::-1], canonicalize_signs(V[..., ::-1])


def eigvals_desc(X) -> np.ndarray:
    """Descending eigenvalues only (batched)."""
    try:
        w = np.linalg.eigvalsh(X)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(f"symmetric eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise EigenDecompositionError("symmetric eigensolver returned non-finite values")
    return w[..., ::-1]


def eigh(X, check: bool = True) -> Spectrum:
    """Full eigendecomposition of one symmetric matrix.

    Parameters
    ----------
    X : (n, n) array
        Exactly symmetric, finite.
    check : bool
        Verify orthonormality and reconstruction before returning.
    """
    X = check_symmetric(X)
    if X.ndim != 2:
        raise ValueError("eigh takes a single matrix; use eigh_batch for stacks")
    w, V = eigh_batch(X)
    w = np.ascontiguousarray(w)
    V = np.ascontiguousarray(V)
    w.setflags(write=False)
    V.setflags(write=False)
    spec = Spectrum(w, V)
    if check:
        try:
            spec.check(X)
        except AssertionError as exc:
            raise EigenDecompositionError(str(exc)) from exc
    return spec


def operator_norm(X) -> float:
    """Largest absolute eigenvalue."""
    X = check_symmetric(X)
    w = eigvals_desc(X)
    return float(max(abs(w[..., 0]).max(), abs(w[..., -1]).max()))


# ---------------------------------------------------------------------------
# text format: first line n, then n rows of n values at 17 significant digits


def format_matrix(X) -> str:
    X = check_symmetric(X)
    if X.ndim != 2:
        raise ValueError("only single matrices can be written")
    lines = [str(X.shape[0])]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in X]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 1:
        raise ValueError("first line must hold the dimension n")
    n = int(rows[0][0])
    body = rows[1:]
    if n < 1 or len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"expected {n} rows of {n} values")
    return check_symmetric(np.array([[float(v) for v in r] for r in body]))


def write_matrix(path, X) -> None:
    atomic_write_text(path, format_matrix(X))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))
