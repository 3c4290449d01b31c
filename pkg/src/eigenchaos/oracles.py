"""Fast self-checks: finite differences, reconstruction and closed forms.

:func:`oracle_suite` bundles them into one gate.  The Hessian routine is
injectable so that a deliberately broken implementation can be shown to
fail the check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .identities import pdbou_diff_cov_mc
from .matrix_core import Ensemble, eigh, eigvals_desc
from .partitions import entries_partition
from .seeding import SeedStream
from .spectral import classical_position, eig_grad, eig_hess_tensor, semicircle_cdf

__all__ = ["OracleResult", "SuiteReport", "fd_gradient_check", "fd_hessian_check",
           "reconstruction_check", "diff_cov_check", "classical_position_check", "oracle_suite"]

GRAD_RTOL, GRAD_ATOL = 1e-5, 1e-8
HESS_RTOL = 1e-3
MIN_GAP = 1e-3


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""


@dataclass
class SuiteReport:
    results: list = field(default_factory=list)
    wall_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def summary(self) -> str:
        lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: worst={r.worst:.3g} {r.detail}".rstrip()
                 for r in self.results]
        lines.append(f"{'all passed' if self.passed else f'{len(self.failures())} failed'} in {self.wall_s:.1f}s")
        return "\n".join(lines)


def _guarded_draws(n, count, gen):
    """GOE draws whose smallest eigenvalue gap is at least MIN_GAP."""
    ens = Ensemble.goe(n)
    out = []
    while len(out) < count:
        X = ens.sample(gen)
        if np.min(-np.diff(eigvals_desc(X))) >= MIN_GAP:
            out.append(X)
    return out


def _sym_unit(n, i, j):
    E = np.zeros((n, n))
    E[i, j] = E[j, i] = 1.0
    return E


def fd_gradient_check(draws=100, n=8, seed=0, h=1e-6) -> OracleResult:
    """Central differences of every lam_alpha along every symmetric unit direction.

    Along E_ij + E_ji the exact derivative is grad_ij + grad_ji (i != j),
    along E_ii it is grad_ii.
    """
    gen = SeedStream(seed, 0xD1).generator()
    worst = 0.0
    for X in _guarded_draws(n, draws, gen):
        spec = eigh(X)
        dirs = [(i, j) for i in range(n) for j in range(i, n)]
        plus = np.stack([eigvals_desc(X + h * _sym_unit(n, i, j)) for i, j in dirs])
        minus = np.stack([eigvals_desc(X - h * _sym_unit(n, i, j)) for i, j in dirs])
        fd = (plus - minus) / (2 * h)  # (direction, alpha)
        for a in range(1, n + 1):
            g = eig_grad(spec, a)
            exact = np.array([g[i, j] + (g[j, i] if i != j else 0.0) for i, j in dirs])
            # error in units of the allowed tolerance; passing means <= 1
            ratio = np.abs(fd[:, a - 1] - exact) / (GRAD_RTOL * np.abs(exact) + GRAD_ATOL)
            worst = max(worst, float(np.max(ratio)))
    return OracleResult(f"gradient finite differences (n={n}, {draws} draws)", worst <= 1.0, worst,
                        f"error/tolerance, rtol={GRAD_RTOL} atol={GRAD_ATOL}")


def fd_hessian_check(draws=100, n=8, seed=0, hess_fn=eig_hess_tensor, h=1e-4, directions=3) -> OracleResult:
    """Directional second derivatives sum D_ij D_ab H_ijab against second differences."""
    gen = SeedStream(seed, 0xD2).generator()
    ens = Ensemble.goe(n)
    worst = 0.0
    for X in _guarded_draws(n, draws, gen):
        spec = eigh(X)
        for _ in range(directions):
            D = ens.sample(gen)
            D /= np.linalg.norm(D, 2)
            fd = (eigvals_desc(X + h * D) - 2 * eigvals_desc(X) + eigvals_desc(X - h * D)) / (h * h)
            for a in range(1, n + 1):
                exact = float(np.einsum("ij,ab,ijab->", D, D, hess_fn(spec, a)))
                rel = abs(fd[a - 1] - exact) / max(abs(exact), 1e-2)
                worst = max(worst, rel)
    return OracleResult(f"Hessian second differences (n={n}, {draws} draws)", worst <= HESS_RTOL, worst,
                        f"rtol={HESS_RTOL}")


def reconstruction_check(ns=(2, 5, 32), seed=0, reps=20) -> OracleResult:
    """||V diag(lam) V^T - X|| and ||V^T V - I|| relative to ||X||."""
    gen = SeedStream(seed, 0xD3).generator()
    worst = 0.0
    for n in ns:
        ens = Ensemble.goe(n)
        for _ in range(reps):
            X = ens.sample(gen)
            s = eigh(X, check=False)
            V, lam = s.eigenvectors, s.eigenvalues
            nx = max(1.0, float(np.linalg.norm(X, 2)))
            worst = max(worst, float(np.max(np.abs((V * lam) @ V.T - X))) / nx,
                        float(np.max(np.abs(V.T @ V - np.eye(n)))))
    return OracleResult(f"eigendecomposition reconstruction (n in {list(ns)})", worst <= 1e-12, worst, "tol=1e-12")


def diff_cov_check(trials=40_000, seed=0, z_max=4.0) -> OracleResult:
    """Block-difference covariance Monte Carlo against the closed form."""
    n = 3
    p = entries_partition(n)
    worst = 0.0
    for r, (tau, kb) in enumerate([(t, k) for t in (0.2, 1.0, 5.0) for k in (0, 1, 2)]):
        K = np.zeros(p.m, dtype=np.int64)
        K[1] = kb
        rep = pdbou_diff_cov_mc(n, p, tau, K, 1, trials, SeedStream(seed, 0xD4 + r))
        worst = max(worst, rep.z_score)
    return OracleResult(f"block-difference covariances ({trials} trials per case)", worst <= z_max, worst,
                        f"z_max={z_max}")


def classical_position_check(n=100, tol=1e-8) -> OracleResult:
    """|n (semicircle mass above gamma_beta) - beta| for every beta."""
    worst = max(abs(n * (1.0 - float(semicircle_cdf(classical_position(n, b)))) - b) for b in range(1, n + 1))
    return OracleResult(f"classical positions (n={n})", worst <= tol, worst, f"tol={tol}")


def oracle_suite(seed: int = 0, hess_fn=eig_hess_tensor, draws: int = 100) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport()
    rep.results.append(fd_gradient_check(draws, seed=seed))
    rep.results.append(fd_hessian_check(draws, seed=seed, hess_fn=hess_fn))
    rep.results.append(reconstruction_check(seed=seed))
    rep.results.append(diff_cov_check(seed=seed))
    rep.results.append(classical_position_check())
    rep.wall_s = time.perf_counter() - t0
    return rep
