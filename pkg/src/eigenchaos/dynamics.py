"""Matrix Ornstein-Uhlenbeck dynamics, Poisson-clocked block updates and block resampling.

The OU process is never time-stepped.  Over a gap ``dt`` every entry moves by
the exact Gaussian transition

    X'_ij = exp(-tau dt) X_ij + sqrt(1 - exp(-2 tau dt)) xi_ij,   xi_ij ~ N(0, sigma_ij^2)

which preserves the Gaussian ensemble with variance profile ``sigma^2``.

In the Poisson-clocked version each block carries a rate ``eta`` clock, and
every ring advances that block's entries by one unit of OU time (a factor
``exp(-tau)`` of correlation).  :class:`ClockPath` realises the whole per-entry
chain ``Z_0 = G, Z_1, Z_2, ...`` with ``Z_{k+1}`` one unit step from ``Z_k``,
so matrices at several ring counts (``G``, ``G(e_B)``, ``G(K)``,
``G(K + e_B)``) all sit on one path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import Ensemble, EntryLaw, VarianceProfile, check_symmetric
from .partitions import AdmissiblePartition, UnionSet
from .seeding import as_generator

__all__ = [
    "OUParams",
    "RingCounts",
    "CoupledPair",
    "ClockPath",
    "index_mask",
    "ou_advance",
    "ou_advance_on",
    "pdbou_ring_counts",
    "pdbou_sample_pair",
    "pdbou_advance",
    "pdbou_time_cap",
    "block_resample",
    "resample_draw",
]


@dataclass(frozen=True)
class OUParams:
    """OU rate ``tau``, clock rate ``eta`` and elapsed time ``t``."""

    tau: float = 1.0
    eta: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.t >= 0:
            raise ValueError("t must be nonnegative")


@dataclass(frozen=True, eq=False)
class RingCounts:
    """Clock rings per block and the induced per-entry counts.

    ``per_block`` has shape ``(..., m)`` and ``per_entry`` shape ``(..., n, n)``.
    """

    per_block: np.ndarray
    per_entry: np.ndarray

    @classmethod
    def from_blocks(cls, p: AdmissiblePartition, K) -> "RingCounts":
        K = np.asarray(K, dtype=np.int64)
        if K.shape[-1] != p.m or np.any(K < 0):
            raise ValueError(f"need {p.m} nonnegative block counts")
        return cls(K, K[..., p.block_of])

    @classmethod
    def zero(cls, p: AdmissiblePartition) -> "RingCounts":
        return cls.from_blocks(p, np.zeros(p.m, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """Two matrices equal off the ``acted`` mask."""

    first: np.ndarray
    second: np.ndarray
    acted: np.ndarray
    description: str = ""
    union: UnionSet | None = None
    partner: np.ndarray | None = None  # the independent copy used for resampling


def _profile_of(profile, n) -> VarianceProfile:
    if profile is None:
        return VarianceProfile.goe(n)
    if isinstance(profile, Ensemble):
        profile = profile.profile
    if profile.n != n:
        raise ValueError(f"profile has n={profile.n}, matrix has n={n}")
    return profile


def index_mask(indices, n: int) -> np.ndarray:
    """Boolean n x n mask from a UnionSet, a set of 1-based positions or a mask."""
    if isinstance(indices, UnionSet):
        mask = indices.mask
    elif isinstance(indices, np.ndarray) and indices.dtype == bool:
        mask = indices
    else:
        mask = np.zeros((n, n), dtype=bool)
        for i, j in indices:
            mask[i - 1, j - 1] = True
    if mask.shape[-2:] != (n, n):
        raise ValueError("index set does not match the matrix dimension")
    if not np.array_equal(mask, np.swapaxes(mask, -1, -2)):
        raise ValueError("index set is not symmetric")
    return mask


def _noise(profile: VarianceProfile, gen, shape_prefix) -> np.ndarray:
    size = None if not shape_prefix else int(np.prod(shape_prefix))
    xi = Ensemble(profile, EntryLaw("gaussian")).sample(gen, size)
    return xi.reshape(tuple(shape_prefix) + xi.shape[-2:])


def ou_advance(X, dt: float, tau: float, profile=None, rng=None) -> np.ndarray:
    """Exact OU transition over time ``dt`` (works on batches).

    ``profile`` defaults to the GOE profile.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if not tau > 0:
        raise ValueError("tau must be positive")
    X = check_symmetric(X)
    if dt == 0:
        return X.copy()
    prof = _profile_of(profile, X.shape[-1])
    gen = as_generator(rng)
    a = math.exp(-tau * dt)
    b = math.sqrt(-math.expm1(-2 * tau * dt))
    return a * X + b * _noise(prof, gen, X.shape[:-2])


def ou_advance_on(X, indices, dt: float, tau: float, profile=None, rng=None) -> np.ndarray:
    """OU transition applied only on ``indices``; other entries are copied bit for bit."""
    X = check_symmetric(X)
    mask = index_mask(indices, X.shape[-1])
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0 or not mask.any():
        return X.copy()
    moved = ou_advance(X, dt, tau, profile, rng)
    return np.where(mask, moved, X)


def pdbou_ring_counts(p: AdmissiblePartition, eta: float, t: float, rng, size=None) -> RingCounts:
    """Independent Poisson(eta t) ring counts, one per block."""
    if not eta > 0 or t < 0:
        raise ValueError("need eta > 0 and t >= 0")
    gen = as_generator(rng)
    shape = (p.m,) if size is None else (int(size), p.m)
    K = gen.poisson(eta * t, shape).astype(np.int64)
    return RingCounts.from_blocks(p, K)


class ClockPath:
    """Per-entry unit-step OU chain started at ``G``.

    ``at(Kbar)`` returns the matrix whose (i, j) entry is the chain after
    ``Kbar[i, j]`` unit steps.  Steps are generated lazily and cached, so
    any number of ring-count matrices can be read off one realisation.
    Not thread safe; use one instance per trial or per batch.
    """

    def __init__(self, G, tau: float, profile=None, rng=None):
        G = check_symmetric(G)
        if not tau > 0:
            raise ValueError("tau must be positive")
        self.tau = float(tau)
        self.profile = _profile_of(profile, G.shape[-1])
        self._gen = as_generator(rng)
        self._chain = [G]

    @property
    def G(self) -> np.ndarray:
        return self._chain[0]

    def _extend(self, length: int) -> None:
        while len(self._chain) < length:
            prev = self._chain[-1]
            a = math.exp(-self.tau)
            b = math.sqrt(-math.expm1(-2 * self.tau))
            self._chain.append(a * prev + b * _noise(self.profile, self._gen, prev.shape[:-2]))

    def at(self, Kbar) -> np.ndarray:
        Kbar = np.asarray(Kbar, dtype=np.int64)
        if np.any(Kbar < 0):
            raise ValueError("ring counts must be nonnegative")
        top = int(Kbar.max()) if Kbar.size else 0
        if top == 0:
            return np.broadcast_to(self.G, np.broadcast_shapes(self.G.shape, Kbar.shape)).copy()
        self._extend(top + 1)
        Z = np.stack(self._chain[: top + 1])
        shape = np.broadcast_shapes(self.G.shape, Kbar.shape)
        Z = np.broadcast_to(Z, (top + 1,) + shape)
        idx = np.broadcast_to(Kbar, shape)[None]
        return np.take_along_axis(Z, idx, axis=0)[0]


@dataclass(eq=False)
class Continuation:
    """Handle returned by :func:`pdbou_sample_pair`.

    Gives further matrices on the same clock path as ``G(K)``.
    """

    path: ClockPath
    counts: RingCounts
    partition: AdmissiblePartition | None = None

    def _bump(self, block) -> np.ndarray:
        if isinstance(block, (int, np.integer)):
            if self.partition is None:
                raise ValueError("integer block ids need the partition")
            return (self.partition.block_of == int(block)).astype(np.int64)
        return index_mask(block, self.path.G.shape[-1]).astype(np.int64)

    def advanced(self, block) -> np.ndarray:
        """``G(K + e_B)``: one more ring of block ``B``."""
        return self.path.at(self.counts.per_entry + self._bump(block))

    def single_ring(self, block) -> np.ndarray:
        """``G(e_B)``: the start matrix after a single ring of ``B``."""
        return self.path.at(self._bump(block))


def pdbou_sample_pair(G, K: RingCounts, tau: float, profile=None, rng=None, partition=None):
    """Return ``(G(K), handle)`` with ``G(K)`` on a per-entry OU clock path.

    Entry (i, j) of ``G(K)`` has taken ``Kbar[i, j]`` unit steps, so
    ``Cov(G_ij, G(K)_ij) = exp(-tau Kbar_ij) sigma_ij^2``.  The handle
    produces ``G(K + e_B)`` and ``G(e_B)`` coupled through the same path.
    """
    path = ClockPath(G, tau, profile, rng)
    return path.at(K.per_entry), Continuation(path, K, partition)


def pdbou_advance(G, p: AdmissiblePartition, eta: float, dt: float, tau: float, profile=None, rng=None):
    """Run the Poisson-clocked block OU process forward by time ``dt``.

    Returns ``(G_new, ring_increments)``.  New rings per block are
    Poisson(eta dt); an entry that rings ``k`` times moves by the exact
    transition over OU time ``k`` in one step (Markov property).
    """
    G = check_symmetric(G)
    gen = as_generator(rng)
    batch = G.shape[:-2]
    dK = pdbou_ring_counts(p, eta, dt, gen, size=int(np.prod(batch)) if batch else None)
    kbar = dK.per_entry.reshape(batch + G.shape[-2:])
    prof = _profile_of(profile, G.shape[-1])
    a = np.exp(-tau * kbar)
    b = np.sqrt(-np.expm1(-2 * tau * kbar))
    xi = _noise(prof, gen, batch)
    return np.where(kbar > 0, a * G + b * xi, G), dK


def pdbou_time_cap(eta: float, tau: float) -> float:
    """Largest time ``t`` with ``eta t <= exp(tau) log(1 / (1 - exp(-tau)))``."""
    return math.exp(tau) * -math.log(-math.expm1(-tau)) / eta


def block_resample(X, Y, A) -> np.ndarray:
    """``X`` with the entries in ``A`` replaced by those of ``Y``."""
    X = check_symmetric(X)
    Y = check_symmetric(Y, "Y")
    if X.shape != Y.shape:
        raise ValueError(f"dimension mismatch {X.shape} vs {Y.shape}")
    mask = index_mask(A, X.shape[-1])
    return np.where(mask, Y, X)


def resample_draw(sampler, p: AdmissiblePartition, k: int, rng) -> CoupledPair:
    """Draw ``X``, an independent copy ``Y`` and ``A`` uniform over k-block unions.

    ``sampler`` is an :class:`Ensemble` or a callable taking a Generator.
    """
    from .partitions import sample_union

    gen = as_generator(rng)
    draw = sampler.sample if isinstance(sampler, Ensemble) else sampler
    X = draw(gen)
    Y = draw(gen)
    A = sample_union(p, k, gen)
    XA = block_resample(X, Y, A)
    return CoupledPair(X, XA, A.mask, f"resample k={k} of m={p.m}", A, Y)
