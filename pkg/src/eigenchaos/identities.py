"""Monte Carlo checks of the variance identities for lam_alpha.

Each check draws its trials in fixed-size chunks.  Chunk ``c`` of a check
with salt ``s`` uses the stream ``(master_seed, s << 56 | base << 32 | c)``
where ``base`` is the caller's stream id, so results do not depend on how
many threads evaluate the chunks.

Left and right hand sides are computed from the same draws, and the
z-score uses the standard error of their per-trial difference, which
accounts for the correlation this sharing introduces::

    z = max(0, |lhs - rhs| - allowance) / se(per-trial lhs term - per-trial rhs term)

``allowance`` is nonzero only for the OU check, where it bounds the
quadrature and truncation error of the time integral.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ClockPath, RingCounts, pdbou_ring_counts, pdbou_time_cap
from .matrix_core import Ensemble, VarianceProfile, eigh_batch, eigvals_desc
from .partitions import AdmissiblePartition, entries_partition
from .seeding import SeedStream, chunk_sizes, ordered_map
from .spectral import GAP_REL, delta_gaps, hat_index
from .stats import MCEstimate, combined_se, mean_se, variance_terms

__all__ = [
    "MCEstimate",
    "IdentityReport",
    "LadderReport",
    "OverlapCurve",
    "TPlusMinus",
    "exp_hat_weights",
    "default_time_grid",
    "ou_variance_identity_check",
    "pdbr_analysis",
    "pdbr_variance_identity_check",
    "t_k_ladder",
    "pdbou_diff_cov",
    "pdbou_diff_cov_mc",
    "derivative_correlation",
    "t_plus_minus",
    "ou_overlap_monotonicity",
]

DEFAULT_CHUNK = 10_000
MAX_RETRIES = 20


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of an identity, their difference statistics and the run parameters."""

    lhs: MCEstimate
    rhs: MCEstimate
    z_score: float
    diff_se: float
    allowance: float = 0.0
    seed: int = 0
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.lhs.trials

    def passed(self, z_max: float = 3.0) -> bool:
        return self.z_score <= z_max

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs.mean,
            "rhs": self.rhs.mean,
            "se_lhs": self.lhs.std_error,
            "se_rhs": self.rhs.std_error,
            "z": self.z_score,
            "trials": self.trials,
            "seed": self.seed,
            "params": dict(self.params, allowance=self.allowance, diff_se=self.diff_se, **self.extra),
        }


def _paired_report(lhs_terms, rhs_terms, allowance, seed, params, extra=None) -> IdentityReport:
    lhs = MCEstimate.from_samples(lhs_terms)
    rhs = MCEstimate.from_samples(rhs_terms)
    _, dse = mean_se(np.asarray(lhs_terms) - np.asarray(rhs_terms))
    gap = max(0.0, abs(lhs.mean - rhs.mean) - allowance)
    z = gap / dse if dse > 0 else (0.0 if gap == 0 else math.inf)
    return IdentityReport(lhs, rhs, z, dse, allowance, seed, params, extra or {})


def _base(rng) -> tuple[int, int]:
    if isinstance(rng, SeedStream):
        return int(rng.master_seed), int(rng.stream_id)
    if isinstance(rng, (int, np.integer)):
        return int(rng), 0
    raise TypeError("identity checks need a SeedStream or an integer seed")


def _chunk_stream(master: int, base: int, salt: int, c: int, retry: int = 0) -> SeedStream:
    if c >= 1 << 32:
        raise ValueError("too many chunks")
    return SeedStream(master, ((salt & 0xFF) << 56) | ((base & 0xFFFFFF) << 32) | c, retry)


def _run_chunks(fn, trials: int, rng, salt: int, chunk: int, threads) -> tuple[list, int]:
    """Evaluate ``fn(stream, size)`` per chunk, redrawing chunks that report degeneracy.

    ``fn`` returns ``None`` when a draw in the chunk was near-degenerate.
    Returns the chunk results in order and the number of redraws.
    """
    master, base = _base(rng)
    sizes = chunk_sizes(int(trials), int(chunk))

    def job(args):
        c, size = args
        for r in range(MAX_RETRIES):
            out = fn(_chunk_stream(master, base, salt, c, r), size)
            if out is not None:
                return out, r
        raise RuntimeError(f"chunk {c}: near-degenerate draws in {MAX_RETRIES} attempts")

    res = ordered_map(job, list(enumerate(sizes)), threads)
    return [r[0] for r in res], sum(r[1] for r in res)


def _degenerate(lam, alphas) -> bool:
    scale = np.max(np.abs(lam), axis=-1)
    tol = GAP_REL * (1.0 + scale)
    return any(bool(np.any(delta_gaps(lam, a) < tol)) for a in alphas)


def _cat(parts, key):
    return np.concatenate([p[key] for p in parts])


# ---------------------------------------------------------------------------
# OU variance identity


def exp_hat_weights(t, tau: float) -> np.ndarray:
    """Weights w with sum_g w_g m(t_g) = integral of 2 tau e^{-tau s} m_lin(s) over [t_0, t_last].

    ``m_lin`` is the piecewise linear interpolant of m on the grid ``t``;
    the exponential factor is integrated exactly.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing with at least two points")
    w = np.zeros_like(t)
    for k in range(t.size - 1):
        a, b = t[k], t[k + 1]
        h = b - a
        ea, eb = math.exp(-tau * a), math.exp(-tau * b)
        I0 = 2.0 * (ea - eb)
        I1 = 2.0 * (a * ea - b * eb) + 2.0 * (ea - eb) / tau
        w[k] += (b * I0 - I1) / h
        w[k + 1] += (I1 - a * I0) / h
    return w


def default_time_grid(tau: float = 1.0, t_max: float | None = None, points: int = 33) -> np.ndarray:
    """0 followed by a geometric grid from 1e-3 / tau to ``t_max`` (default 12 / tau)."""
    t_max = 12.0 / tau if t_max is None else float(t_max)
    return np.concatenate([[0.0], np.geomspace(1e-3 / tau, t_max, points - 1)])


def ou_variance_identity_check(n: int, alpha: int, tau: float = 1.0, t_max: float | None = None,
                               time_grid=None, trials: int = 100_000, rng=0,
                               profile: VarianceProfile | None = None, chunk: int = DEFAULT_CHUNK,
                               threads=None) -> IdentityReport:
    """Compare Var lam_alpha(G) with 2 tau times the integral of e^{-tau t} E overlap^2(G(0), G(t)).

    ``G`` is stationary for the matrix OU process with the given profile
    (GOE by default).  The time integral uses :func:`exp_hat_weights` on
    ``time_grid`` (``t_max`` is its last point).  The allowance adds the
    Richardson error estimate |I_h - I_2h| / 3 from the grid with every
    other point removed, and the tail beyond ``t_max``, which lies in
    [0, 2 e^{-tau t_max} m(t_max)] because the overlap curve is
    nonincreasing; the midpoint of that interval is added to the rhs and
    its half-width to the allowance.
    """
    hat_index(alpha, n)
    if time_grid is None:
        time_grid = default_time_grid(tau, t_max)
    t = np.asarray(time_grid, dtype=float)
    if t[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if t.size % 2 == 0:
        raise ValueError("time grid needs an odd number of points for the error estimate")
    T = float(t[-1])
    if math.exp(-tau * T) > 0.01:
        raise ValueError("t_max too small: need exp(-tau t_max) <= 0.01")
    prof = VarianceProfile.goe(n) if profile is None else profile
    ens = Ensemble(prof)
    w_full = exp_hat_weights(t, tau)
    w_half = np.zeros_like(t)
    w_half[::2] = exp_hat_weights(t[::2], tau)
    a = alpha - 1
    gaps = np.diff(t)
    decay = np.exp(-tau * gaps)
    spread = np.sqrt(-np.expm1(-2 * tau * gaps))

    def work(stream, size):
        gen = stream.generator()
        G = ens.sample(gen, size)
        lam, V = eigh_batch(G)
        if _degenerate(lam, [alpha]):
            return None
        v0 = V[:, :, a]
        ov = np.empty((size, t.size))
        ov[:, 0] = 1.0
        for g in range(1, t.size):
            G = decay[g - 1] * G + spread[g - 1] * ens.sample(gen, size)
            lg, Vg = eigh_batch(G)
            if _degenerate(lg, [alpha]):
                return None
            ip = np.einsum("ti,ti->t", v0, Vg[:, :, a])
            ov[:, g] = np.minimum(ip * ip, 1.0)
        return {"f": lam[:, a], "full": ov @ w_full, "half": ov @ w_half, "last": ov[:, -1]}

    parts, redraws = _run_chunks(work, trials, rng, 1, chunk, threads)
    f = _cat(parts, "f")
    full, half, last = _cat(parts, "full"), _cat(parts, "half"), _cat(parts, "last")
    tail_hi = 2.0 * math.exp(-tau * T) * last
    rhs_terms = full + 0.5 * tail_hi
    quad_err = abs(float(np.mean(full)) - float(np.mean(half))) / 3.0
    tail_half = 0.5 * float(np.mean(tail_hi))
    master, _ = _base(rng)
    params = {"check": "ou", "n": n, "alpha": alpha, "tau": tau, "t_max": T, "grid_points": int(t.size)}
    extra = {"quadrature_error": quad_err, "tail_half_width": tail_half, "redraws": redraws}
    return _paired_report(variance_terms(f), rhs_terms, quad_err + tail_half, master, params, extra)


# ---------------------------------------------------------------------------
# block resampling identity and the T_k ladder


@dataclass(frozen=True, eq=False)
class PDBRAnalysis:
    """Per-trial pieces shared by the resampling identity and the ladder."""

    f: np.ndarray  # lam_alpha(X) per trial
    T: np.ndarray  # (trials, m) per-trial T_k values
    seed: int
    params: dict
    redraws: int

    @property
    def m(self) -> int:
        return self.T.shape[1]

    def rhs_terms(self) -> np.ndarray:
        return self.T.sum(axis=1) / (2 * self.m)

    def identity_report(self) -> IdentityReport:
        return _paired_report(variance_terms(self.f), self.rhs_terms(), 0.0, self.seed,
                              dict(self.params, check="pdbr"), {"redraws": self.redraws})

    def ladder(self) -> "LadderReport":
        vt = variance_terms(self.f)
        est = [MCEstimate.from_samples(self.T[:, k]) for k in range(self.m)]
        var = MCEstimate.from_samples(vt)
        mono = []
        for k in range(self.m - 1):
            d = est[k].mean - est[k + 1].mean
            se = combined_se(est[k].std_error, est[k + 1].std_error)
            mono.append((k, d, se))
        bound = []
        for k in range(self.m):
            c = 2 * self.m / (k + 1)
            _, se = mean_se(self.T[:, k] - c * vt)
            bound.append((k, est[k].mean - c * var.mean, se))
        return LadderReport(tuple(est), var, tuple(mono), tuple(bound))


@dataclass(frozen=True)
class LadderReport:
    """Estimates of T_0 .. T_{m-1} with the monotonicity and upper-bound margins.

    ``monotone`` holds ``(k, T_k - T_{k+1}, combined SE)``;
    ``upper`` holds ``(k, T_k - 2m/(k+1) Var, SE of the paired difference)``.
    """

    T: tuple
    variance: MCEstimate
    monotone: tuple
    upper: tuple

    def violations(self, mono_z: float = 2.0, upper_z: float = 3.0, nonneg_z: float = 2.0) -> list[str]:
        out = []
        for k, d, se in self.monotone:
            if d < -mono_z * se:
                out.append(f"T_{k} < T_{k + 1} by {-d:.3g} (> {mono_z} SE = {mono_z * se:.3g})")
        last = self.T[-1]
        if last.mean < -nonneg_z * last.std_error:
            out.append(f"T_{len(self.T) - 1} = {last.mean:.3g} below -{nonneg_z} SE")
        for k, d, se in self.upper:
            if d > upper_z * se:
                out.append(f"T_{k} exceeds its bound by {d:.3g} (> {upper_z} SE = {upper_z * se:.3g})")
        return out


def _pdbr_cells(m: int):
    """Index arrays over all (B, A) with B not in A, grouped by |A| = k."""
    Bs, As, ks = [], [], []
    for B in range(m):
        others = [c for c in range(m) if c != B]
        for k in range(m):
            for A in itertools.combinations(others, k):
                Bs.append(B)
                As.append(sum(1 << c for c in A))
                ks.append(k)
    return np.array(Bs), np.array(As), np.array(ks)


def pdbr_analysis(n: int, p: AdmissiblePartition | None = None, alpha: int = 1, trials: int = 100_000,
                  rng=0, ensemble: Ensemble | None = None, chunk: int = DEFAULT_CHUNK,
                  threads=None) -> PDBRAnalysis:
    """Evaluate lam_alpha on X^S for every union S of blocks, per trial.

    ``X`` and one independent copy ``Y`` are drawn per trial; ``X^S`` takes
    ``Y`` on the blocks of ``S``.  From the 2^m values the per-trial
    ``T_k = C(m-1,k)^{-1} sum_B sum_{|A|=k, B not in A} (f(X) - f(X^B)) (f(X^A) - f(X^{A u B}))``
    follows exactly.
    """
    p = entries_partition(n) if p is None else p
    if p.n != n:
        raise ValueError("partition dimension differs from n")
    m = p.m
    if m > 8:
        raise ValueError(f"m={m} blocks is too many for exact enumeration (limit 8)")
    hat_index(alpha, n)
    ens = Ensemble.wigner(n) if ensemble is None else ensemble
    masks = p.masks
    subsets = np.arange(1 << m)
    sub_masks = np.zeros((1 << m, n, n), dtype=bool)
    for b in range(m):
        sub_masks |= ((subsets >> b) & 1).astype(bool)[:, None, None] & masks[b][None]
    Bs, As, ks = _pdbr_cells(m)
    bits = 1 << Bs
    norm = np.array([1.0 / math.comb(m - 1, k) for k in range(m)])
    a = alpha - 1

    def work(stream, size):
        gen = stream.generator()
        X = ens.sample(gen, size)
        Y = ens.sample(gen, size)
        XS = np.where(sub_masks[:, None], Y[None], X[None])
        lam = eigvals_desc(XS)
        if _degenerate(lam, [alpha]):
            return None
        f = lam[..., a]  # (2^m, size)
        dB = f[0][None] - f[bits]
        dA = f[As] - f[As | bits]
        prod = dB * dA  # (cells, size)
        Tk = np.zeros((size, m))
        for k in range(m):
            Tk[:, k] = prod[ks == k].sum(axis=0) * norm[k]
        return {"f": f[0], "T": Tk}

    parts, redraws = _run_chunks(work, trials, rng, 2, chunk, threads)
    master, _ = _base(rng)
    params = {"n": n, "m": m, "nu": p.nu, "alpha": alpha, "law": ens.law.kind}
    return PDBRAnalysis(_cat(parts, "f"), np.concatenate([q["T"] for q in parts]), master, params, redraws)


def pdbr_variance_identity_check(n: int, p: AdmissiblePartition | None = None, alpha: int = 1,
                                 trials: int = 100_000, rng=0, **kw) -> IdentityReport:
    """Var lam_alpha(X) against (1/2m) sum_k T_k."""
    return pdbr_analysis(n, p, alpha, trials, rng, **kw).identity_report()


def t_k_ladder(n: int, p: AdmissiblePartition | None = None, alpha: int = 1, trials: int = 100_000,
               rng=0, **kw) -> LadderReport:
    """Estimates of every T_k with monotonicity and upper-bound margins."""
    return pdbr_analysis(n, p, alpha, trials, rng, **kw).ladder()


# ---------------------------------------------------------------------------
# Poisson-clocked OU: block-difference covariances


def pdbou_diff_cov(tau: float, K_B: int, sigma2: float = 1.0) -> float:
    """E[(G - G(e_B))_ij (G(K) - G(K + e_B))_ij] for (i, j) in B.

    Equals 2 (1 - e^{-tau}) sigma2 when K_B = 0 and
    -(1 - e^{-tau})^2 e^{-tau (K_B - 1)} sigma2 when K_B >= 1.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if K_B < 0:
        raise ValueError("K_B must be nonnegative")
    q = -math.expm1(-tau)
    if K_B == 0:
        return 2.0 * q * sigma2
    return -q * q * math.exp(-tau * (K_B - 1)) * sigma2


def pdbou_diff_cov_mc(n: int, p: AdmissiblePartition | None, tau: float, K, B: int, trials: int = 100_000,
                      rng=0, ij=None, profile: VarianceProfile | None = None, chunk: int = 50_000,
                      threads=None) -> IdentityReport:
    """Monte Carlo estimate of the block-difference covariance against :func:`pdbou_diff_cov`.

    Parameters
    ----------
    K : RingCounts or sequence of m block counts
    B : int
        0-based block id.
    ij : (int, int), optional
        1-based entry inside ``B``; defaults to the smallest position of ``B``.
    """
    p = entries_partition(n) if p is None else p
    K = K if isinstance(K, RingCounts) else RingCounts.from_blocks(p, K)
    if not (0 <= B < p.m):
        raise ValueError("block id out of range")
    block = p.blocks[B]
    ij = min(block) if ij is None else tuple(ij)
    if ij not in block:
        raise ValueError(f"entry {ij} is not in block {B}")
    prof = VarianceProfile.goe(n) if profile is None else profile
    i, j = ij[0] - 1, ij[1] - 1
    bump = (p.block_of == B).astype(np.int64)
    kbar = K.per_entry

    def work(stream, size):
        gen = stream.generator()
        G = Ensemble(prof).sample(gen, size)
        path = ClockPath(G, tau, prof, gen)
        d0 = G[:, i, j] - path.at(bump)[:, i, j]
        dK = path.at(kbar)[:, i, j] - path.at(kbar + bump)[:, i, j]
        return {"x": d0 * dK}

    parts, _ = _run_chunks(work, trials, rng, 3, chunk, threads)
    x = _cat(parts, "x")
    s2 = float(prof.sigma2[i, j])
    K_B = int(K.per_block[B])
    exact = pdbou_diff_cov(tau, K_B, s2)
    est = MCEstimate.from_samples(x)
    z = abs(est.mean - exact) / est.std_error if est.std_error > 0 else math.inf
    master, _ = _base(rng)
    params = {"check": "diffcov", "n": n, "tau": tau, "K_B": K_B, "block": B, "entry": list(ij), "sigma2": s2}
    return IdentityReport(est, MCEstimate.exact(exact, est.trials), z, est.std_error, 0.0, master, params)


# ---------------------------------------------------------------------------
# T_plus / T_minus decomposition


@dataclass(frozen=True)
class TPlusMinus:
    """Estimates of the positive and negative parts and the dominance margin."""

    T_plus: MCEstimate
    T_minus: MCEstimate
    margin: MCEstimate  # per-trial (T_plus / 2 - T_minus)
    in_range: bool
    t_cap: float
    probes: tuple = ()  # (K per block, per-entry MCEstimate array of E[d_ij lam d_ij lam^K])

    def dominance_holds(self, z: float = 2.0) -> bool:
        return self.margin.mean >= -z * self.margin.std_error

    def min_probe_z(self) -> float:
        """Smallest mean / SE over all probed (K, entry) pairs."""
        zs = [e.mean / e.std_error if e.std_error > 0 else math.inf for _, ests in self.probes for e in ests]
        return min(zs) if zs else math.inf


def _goe_entry_weights(prof: VarianceProfile) -> np.ndarray:
    # (1 + [i != j]) sigma_ij^2, equal to 2 everywhere for the GOE profile
    n = prof.n
    return (1.0 + (1 - np.eye(n))) * prof.sigma2


def derivative_correlation(n: int, p: AdmissiblePartition | None, alpha: int, tau: float, K, trials: int,
                           rng=0, profile=None, chunk: int = DEFAULT_CHUNK, threads=None, salt: int = 5):
    """Per-entry estimates of E[d_ij lam_alpha(G) d_ij lam_alpha(G(K))] for fixed ring counts K.

    Returns a list of ``((i, j), MCEstimate)`` over the upper triangle.
    """
    p = entries_partition(n) if p is None else p
    K = K if isinstance(K, RingCounts) else RingCounts.from_blocks(p, K)
    prof = VarianceProfile.goe(n) if profile is None else profile
    ens = Ensemble(prof)
    a = alpha - 1
    iu = np.triu_indices(n)

    def work(stream, size):
        gen = stream.generator()
        G = ens.sample(gen, size)
        GK = ClockPath(G, tau, prof, gen).at(K.per_entry)
        lam, V = eigh_batch(G)
        lk, W = eigh_batch(GK)
        if _degenerate(lam, [alpha]) or _degenerate(lk, [alpha]):
            return None
        vw = V[:, :, a] * W[:, :, a]
        return {"x": (vw[:, :, None] * vw[:, None, :])[:, iu[0], iu[1]]}

    parts, _ = _run_chunks(work, trials, rng, salt, chunk, threads)
    x = np.concatenate([q["x"] for q in parts])
    return [((int(i) + 1, int(j) + 1), MCEstimate.from_samples(x[:, c])) for c, (i, j) in enumerate(zip(*iu))]


def t_plus_minus(n: int, p: AdmissiblePartition | None, alpha: int, eta: float, tau: float, t: float,
                 trials: int = 100_000, rng=0, profile=None, probe_k: int = 3, probe_trials: int = 20_000,
                 chunk: int = DEFAULT_CHUNK, threads=None) -> TPlusMinus:
    """Estimate the positive (K_B = 0) and negative (K_B >= 1) parts.

    Per trial a fresh ``K`` is drawn from the product Poisson law and the
    entry sums

        T_+ = 4 (1 - e^{-tau}) sum_{Kbar_ij = 0} d_ij lam d_ij lam^K
        T_- = 2 (1 - e^{-tau})^2 sum_{Kbar_ij >= 1} e^{-tau (Kbar_ij - 1)} d_ij lam d_ij lam^K

    are accumulated, with ``d_ij lam = v_i v_j`` (GOE weights; other
    profiles scale each entry by (1 + [i != j]) sigma_ij^2 / 2).
    ``probe_k`` extra ring-count vectors (K = 0 and draws from the
    product law) get per-entry estimates of E[d_ij lam d_ij lam^K].
    """
    p = entries_partition(n) if p is None else p
    hat_index(alpha, n)
    prof = VarianceProfile.goe(n) if profile is None else profile
    ens = Ensemble(prof)
    cap = pdbou_time_cap(eta, tau)
    q = -math.expm1(-tau)
    ew = _goe_entry_weights(prof) / 2.0
    a = alpha - 1

    def work(stream, size):
        gen = stream.generator()
        G = ens.sample(gen, size)
        K = pdbou_ring_counts(p, eta, t, gen, size=size)
        GK = ClockPath(G, tau, prof, gen).at(K.per_entry)
        lam, V = eigh_batch(G)
        lk, W = eigh_batch(GK)
        if _degenerate(lam, [alpha]) or _degenerate(lk, [alpha]):
            return None
        vw = V[:, :, a] * W[:, :, a]
        prod = vw[:, :, None] * vw[:, None, :] * ew
        kb = K.per_entry
        plus = 4 * q * np.where(kb == 0, prod, 0.0).sum(axis=(1, 2))
        minus_w = 2 * q * q * np.exp(-tau * np.maximum(kb - 1, 0))
        minus = np.where(kb >= 1, minus_w * prod, 0.0).sum(axis=(1, 2))
        return {"plus": plus, "minus": minus}

    parts, _ = _run_chunks(work, trials, rng, 4, chunk, threads)
    plus, minus = _cat(parts, "plus"), _cat(parts, "minus")
    probes = []
    if probe_k > 0:
        master, base = _base(rng)
        gen = _chunk_stream(master, base, 6, 0).generator()
        Ks = [np.zeros(p.m, dtype=np.int64)]
        Ks += [pdbou_ring_counts(p, eta, max(t, 1e-12), gen).per_block for _ in range(probe_k - 1)]
        for r, Kv in enumerate(Ks):
            est = derivative_correlation(n, p, alpha, tau, Kv, probe_trials, SeedStream(master, base + r + 1),
                                         prof, chunk, threads, salt=5)
            probes.append((tuple(int(x) for x in Kv), tuple(e for _, e in est)))
    return TPlusMinus(MCEstimate.from_samples(plus), MCEstimate.from_samples(minus),
                      MCEstimate.from_samples(0.5 * plus - minus), t <= cap, cap, tuple(probes))


# ---------------------------------------------------------------------------
# overlap decay along the OU process


@dataclass(frozen=True)
class OverlapCurve:
    """E overlap^2 at each time with the monotonicity check."""

    times: tuple
    estimates: tuple

    def violations(self, z: float = 2.0) -> list[tuple]:
        out = []
        for k in range(len(self.estimates) - 1):
            a, b = self.estimates[k], self.estimates[k + 1]
            se = combined_se(a.std_error, b.std_error)
            if b.mean - a.mean > z * se:
                out.append((self.times[k], self.times[k + 1], b.mean - a.mean, se))
        return out


def ou_overlap_monotonicity(n: int, alpha: int, tau: float, time_grid, trials: int, rng=0,
                            profile=None, chunk: int = 2_000, threads=None) -> OverlapCurve:
    """Estimate E <v_alpha(G(0)), v_alpha(G(t))>^2 along one OU chain per trial."""
    t = np.asarray(time_grid, dtype=float)
    if np.any(np.diff(t) < 0) or t[0] < 0:
        raise ValueError("time grid must be sorted and nonnegative")
    hat_index(alpha, n)
    prof = VarianceProfile.goe(n) if profile is None else profile
    ens = Ensemble(prof)
    a = alpha - 1

    def work(stream, size):
        gen = stream.generator()
        G = ens.sample(gen, size)
        lam, V = eigh_batch(G)
        if _degenerate(lam, [alpha]):
            return None
        v0 = V[:, :, a]
        out = np.empty((size, t.size))
        prev = 0.0
        for g, tg in enumerate(t):
            if tg == 0.0:
                out[:, g] = 1.0
                continue
            dt = tg - prev
            prev = tg
            if dt > 0:
                G = math.exp(-tau * dt) * G + math.sqrt(-math.expm1(-2 * tau * dt)) * ens.sample(gen, size)
                lam, V = eigh_batch(G)
                if _degenerate(lam, [alpha]):
                    return None
            ip = np.einsum("ti,ti->t", v0, V[:, :, a])
            out[:, g] = np.minimum(ip * ip, 1.0)
        return {"ov": out}

    parts, _ = _run_chunks(work, trials, rng, 7, chunk, threads)
    ov = np.concatenate([q["ov"] for q in parts])
    return OverlapCurve(tuple(float(x) for x in t), tuple(MCEstimate.from_samples(ov[:, g]) for g in range(t.size)))
