"""Config-driven Monte Carlo experiments.

A config names one experiment ``kind``, the dimensions ``n_list``, the
eigenvalue indices ``alpha_spec`` (an int is an absolute index, a float in
(0, 1] a quantile resolved as ceil(q n)), the ensemble, the partition, the
trial count, the master seed and kind-specific ``params``.

Trial ``r`` of the ``g``-th dimension uses the stream
``(master_seed, g * 2**32 + r)``.  Within a trial every index and control
value is evaluated on the same draws, which keeps the curves smooth
(common random numbers) and makes rows independent of the worker count.
A trial whose spectrum is near-degenerate is redrawn from a substream of
its own stream; an experiment fails if more than 0.1% of trials need it.

Decorrelation experiments measure ``mhat = E <v_alpha(X), v_alpha(X')>^2``
against a control variable:

``ou_decorrelation``
    ``X' = G(t)`` on the OU process; ``u = (1 - e^{-tau t}) ahat^{2/3} n^{1/3}``.
``resampling_decorrelation``
    ``X' = X^A`` with ``A`` a union of ``k`` blocks;
    ``c = k nu ahat^{2/3} n^{-5/3}``.  The unions are nested within a trial
    (the first ``k`` blocks of one random ordering), so each ``A`` is
    uniform over k-block unions.
``pdbou_decorrelation``
    ``X' = G(t)`` on the Poisson-clocked block OU process;
    ``u = t eta (1 ^ tau)^2 ahat^{2/3} n^{1/3}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import ou_advance, pdbou_advance, pdbou_time_cap
from .io import atomic_write_json, atomic_write_text
from .matrix_core import Ensemble, EntryLaw, VarianceProfile, eigh_batch, eigvals_desc
from .partitions import AdmissiblePartition, band_partition, entries_partition
from .seeding import SeedStream, ordered_map
from .spectral import GAP_REL, classical_position, deloc_max, delta_gaps, hat_index, inverse_spacing_sum
from .stats import MCEstimate, mean_se, variance_terms

__all__ = [
    "KINDS",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "Row",
    "load_config",
    "resolve_alpha",
    "run_experiment",
    "run_ou_decorrelation",
    "run_resampling_decorrelation",
    "run_pdbou_decorrelation",
    "run_eigenvalue_variance",
    "run_spacing_survey",
    "run_rigidity_survey",
    "run_delocalization_survey",
]

KINDS = (
    "ou_decorrelation",
    "pdbou_decorrelation",
    "resampling_decorrelation",
    "eigenvalue_variance",
    "spacing_survey",
    "rigidity_survey",
    "delocalization_survey",
)
CSV_HEADER = ("kind", "n", "alpha", "control_name", "control_value", "mean", "std_error", "trials", "wall_ms")
REDRAW_LIMIT = 0.001
BOOTSTRAP = 200


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def resolve_alpha(spec, n: int) -> int:
    """Absolute index for an int, ceil(q n) for a float quantile q in (0, 1]."""
    if isinstance(spec, bool):
        raise ConfigError("alpha must be a number")
    if isinstance(spec, (int, np.integer)):
        a = int(spec)
    elif isinstance(spec, float):
        if not (0.0 < spec <= 1.0):
            raise ConfigError(f"alpha quantile {spec} outside (0, 1]")
        a = math.ceil(spec * n)
    else:
        raise ConfigError(f"cannot resolve alpha from {spec!r}")
    if not (1 <= a <= n):
        raise ConfigError(f"alpha={a} outside [1, {n}]")
    return a


@dataclass
class ExperimentConfig:
    kind: str
    n_list: list
    alpha_spec: list = field(default_factory=lambda: [1])
    ensemble: dict = field(default_factory=lambda: {"profile": "goe", "law": "gaussian"})
    partition: dict = field(default_factory=lambda: {"kind": "entries"})
    params: dict = field(default_factory=dict)
    trials: int = 100
    master_seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not isinstance(self.alpha_spec, (list, tuple)):
            self.alpha_spec = [self.alpha_spec]
        if not self.n_list or not self.alpha_spec:
            raise ConfigError("n_list and alpha_spec must be nonempty")
        if any(not isinstance(n, (int, np.integer)) or n < 1 for n in self.n_list):
            raise ConfigError("every n must be a positive integer")
        if int(self.trials) < 10:
            raise ConfigError("trials must be at least 10")
        if not (0 <= int(self.master_seed) < 2 ** 64):
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        for n in self.n_list:
            for a in self.alpha_spec:
                resolve_alpha(a, n)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "kind" not in d or "n_list" not in d:
            raise ConfigError("config needs 'kind' and 'n_list'")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def alphas(self, n: int) -> list[int]:
        out = []
        for a in self.alpha_spec:
            r = resolve_alpha(a, n)
            if r not in out:
                out.append(r)
        return out

    def build_ensemble(self, n: int) -> Ensemble:
        e = dict(self.ensemble)
        prof = e.get("profile", "goe")
        law = EntryLaw(e.get("law", "gaussian"), float(e.get("shift", 0.8)))
        if prof == "goe":
            return Ensemble(VarianceProfile.goe(n), law)
        if prof == "wigner":
            return Ensemble(VarianceProfile.ones(n), law)
        if prof == "checkerboard":
            return Ensemble(VarianceProfile.checkerboard(n, e.get("low", 0.5), e.get("high", 1.5)), law)
        raise ConfigError(f"unknown profile {prof!r}")

    def build_partition(self, n: int) -> AdmissiblePartition:
        kind = self.partition.get("kind", "entries")
        if kind == "entries":
            return entries_partition(n)
        if kind == "band":
            return band_partition(n, int(self.partition.get("width", 1)))
        raise ConfigError(f"unknown partition kind {kind!r}")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(d)


@dataclass(frozen=True)
class Row:
    kind: str
    n: int
    alpha: int
    control_name: str
    control_value: float
    estimate: MCEstimate
    trials: int
    wall_ms: float = 0.0

    def key(self) -> tuple:
        """Everything except wall time, for reproducibility comparisons."""
        e = self.estimate
        return (self.kind, self.n, self.alpha, self.control_name, self.control_value, e.mean, e.std_error, self.trials)

    def csv_fields(self) -> list:
        e = self.estimate
        return [self.kind, self.n, self.alpha, self.control_name, repr(float(self.control_value)),
                repr(float(e.mean)), repr(float(e.std_error)), self.trials, f"{self.wall_ms:.1f}"]


@dataclass
class ExperimentResult:
    rows: list
    metadata: dict

    def select(self, n=None, alpha=None, control_name=None) -> list:
        return [r for r in self.rows
                if (n is None or r.n == n) and (alpha is None or r.alpha == alpha)
                and (control_name is None or r.control_name == control_name)]

    def curve(self, n, alpha, control_name) -> dict:
        """control value -> MCEstimate for one (n, alpha) cell."""
        return {r.control_value: r.estimate for r in self.select(n, alpha, control_name)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def write(self, path) -> tuple[Path, Path]:
        """Write the CSV and a ``.meta.json`` sidecar next to it."""
        path = Path(path)
        meta = path.with_name(path.stem + ".meta.json")
        atomic_write_json(meta, self.metadata)
        atomic_write_text(path, self.to_csv())
        return path, meta


# ---------------------------------------------------------------------------
# trial machinery


class _Degenerate(Exception):
    pass


def _gap_ok(lam, alphas) -> None:
    tol = GAP_REL * (1.0 + float(np.max(np.abs(lam))))
    for a in alphas:
        if float(delta_gaps(lam, a)) < tol:
            raise _Degenerate()


def _eig(X, alphas):
    lam, V = eigh_batch(X)
    _gap_ok(lam, alphas)
    return lam, V


def _overlap(V0, V1, a) -> float:
    ip = float(np.dot(V0[:, a - 1], V1[:, a - 1]))
    return min(1.0, ip * ip)


def _run_trials(cfg: ExperimentConfig, group: int, trial_fn, threads) -> tuple[list, int, float]:
    """Run ``trial_fn(gen)`` for every trial of one dimension group."""
    master = int(cfg.master_seed)
    base = group << 32

    def one(r):
        stream = SeedStream(master, base + r)
        for attempt in range(1000):
            try:
                return trial_fn(stream.retry(attempt).generator()), attempt
            except _Degenerate:
                continue
        raise RuntimeError("persistent near-degenerate draws")

    t0 = time.perf_counter()
    out = ordered_map(one, range(int(cfg.trials)), threads)
    wall = (time.perf_counter() - t0) * 1000.0
    redraws = sum(a for _, a in out)
    if redraws > REDRAW_LIMIT * cfg.trials:
        raise RuntimeError(f"{redraws} near-degenerate redraws exceed 0.1% of {cfg.trials} trials")
    return [v for v, _ in out], redraws, wall


def _code_identity() -> dict:
    from .version import build_info

    return build_info()


def _finish(cfg, rows, extra_meta) -> ExperimentResult:
    meta = {"config": asdict(cfg), "code": _code_identity(), "master_seed": int(cfg.master_seed)}
    meta.update(extra_meta)
    res = ExperimentResult(rows, meta)
    if cfg.output:
        res.write(cfg.output)
    return res


def _mc_rows(cfg, n, table, cells, wall, control_name):
    rows = []
    for (a, c) in cells:
        x = [t[(a, c)] for t in table]
        rows.append(Row(cfg.kind, n, a, control_name, float(c), MCEstimate.from_samples(x), len(x), wall))
    return rows


def _require(kind, cfg):
    if cfg.kind != kind:
        raise ConfigError(f"config kind is {cfg.kind!r}, expected {kind!r}")


# ---------------------------------------------------------------------------
# decorrelation experiments


def run_ou_decorrelation(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Overlap decay along the matrix OU process against ``u``.

    ``params``: ``tau`` (default 1), ``u_list`` or ``t_list``.  Cells with
    ``u`` at or beyond ``ahat^{2/3} n^{1/3}`` cannot be reached and are
    listed under ``skipped`` in the metadata.
    """
    _require("ou_decorrelation", cfg)
    tau = float(cfg.params.get("tau", 1.0))
    use_t = "t_list" in cfg.params
    controls = [float(x) for x in cfg.params.get("t_list" if use_t else "u_list", [0.0, 1.0, 2.0, 4.0])]
    rows, meta_cells, skipped, redraw_log = [], {}, [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        alphas = cfg.alphas(n)
        cells, times = [], {}
        for a in alphas:
            scale = hat_index(a, n) ** (2 / 3) * n ** (1 / 3)
            for c in controls:
                if use_t:
                    t = c
                elif c < scale:
                    t = -math.log1p(-c / scale) / tau
                else:
                    skipped.append({"n": n, "alpha": a, "u": c, "reason": f"u >= ahat^(2/3) n^(1/3) = {scale:.4g}"})
                    continue
                cells.append((a, c))
                times[(a, c)] = t
        meta_cells[n] = {f"{a}:{c}": t for (a, c), t in times.items()}
        grid = sorted(set(times.values()))

        def trial(gen, ens=ens, alphas=alphas, grid=grid, times=times, cells=cells):
            G = ens.sample(gen)
            _, V0 = _eig(G, alphas)
            ov_at = {}
            prev = 0.0
            V = V0
            for t in grid:
                if t > prev:
                    G = ou_advance(G, t - prev, tau, ens.profile, gen)
                    _, V = _eig(G, alphas)
                    prev = t
                ov_at[t] = V
            return {(a, c): 1.0 if times[(a, c)] == 0 else _overlap(V0, ov_at[times[(a, c)]], a) for a, c in cells}

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        rows += _mc_rows(cfg, n, table, cells, wall, "t" if use_t else "u")
    return _finish(cfg, rows, {"times": meta_cells, "skipped": skipped, "redraws": redraw_log})


def run_resampling_decorrelation(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Overlap between ``X`` and ``X^A`` against ``c`` (or ``k``).

    ``params``: ``c_list`` or ``k_list``; ``full`` (default true) adds the
    cell ``k = m``; ``baseline`` (default true) adds a row with control
    name ``independent`` for the overlap with an independent copy.
    """
    _require("resampling_decorrelation", cfg)
    use_k = "k_list" in cfg.params
    controls = [float(x) for x in cfg.params.get("k_list" if use_k else "c_list", [0.0, 0.5, 1.0, 2.0])]
    add_full = bool(cfg.params.get("full", True))
    add_base = bool(cfg.params.get("baseline", True))
    rows, ks_meta, skipped, redraw_log = [], {}, [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        p = cfg.build_partition(n)
        alphas = cfg.alphas(n)
        cells, ks = [], {}
        for a in alphas:
            unit = p.nu * hat_index(a, n) ** (2 / 3) * n ** (-5 / 3)
            pairs = [(c, int(round(c)) if use_k else int(round(c / unit))) for c in controls]
            if add_full:
                pairs.append((float(p.m) if use_k else p.m * unit, p.m))
            for c, k in pairs:
                if k > p.m or k < 0:
                    skipped.append({"n": n, "alpha": a, "control": c, "reason": f"k={k} outside [0, m={p.m}]"})
                    continue
                if (a, c) not in ks:
                    cells.append((a, c))
                    ks[(a, c)] = k
        ks_meta[n] = {f"{a}:{c!r}": k for (a, c), k in ks.items()}
        k_sorted = sorted(set(ks.values()))
        masks = p.masks

        def trial(gen, ens=ens, p=p, alphas=alphas, cells=cells, ks=ks, k_sorted=k_sorted, masks=masks):
            X = ens.sample(gen)
            Y = ens.sample(gen)
            order = gen.permutation(p.m)
            _, V0 = _eig(X, alphas)
            Vk = {}
            mask = np.zeros((n, n), dtype=bool)
            done = 0
            for k in k_sorted:
                for b in order[done:k]:
                    mask |= masks[b]
                done = k
                Vk[k] = V0 if k == 0 else _eig(np.where(mask, Y, X), alphas)[1]
            out = {(a, c): 1.0 if ks[(a, c)] == 0 else _overlap(V0, Vk[ks[(a, c)]], a) for a, c in cells}
            if add_base:
                _, Vi = _eig(ens.sample(gen), alphas)
                for a in alphas:
                    out[(a, "independent")] = _overlap(V0, Vi, a)
            return out

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        rows += _mc_rows(cfg, n, table, cells, wall, "k" if use_k else "c")
        if add_base:
            for a in alphas:
                x = [t[(a, "independent")] for t in table]
                rows.append(Row(cfg.kind, n, a, "independent", 0.0, MCEstimate.from_samples(x), len(x), wall))
    return _finish(cfg, rows, {"k": ks_meta, "skipped": skipped, "redraws": redraw_log})


def run_pdbou_decorrelation(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Overlap decay along the Poisson-clocked block OU process.

    ``params``: ``tau``, ``eta`` and ``u_list`` or ``t_list``.  Every time
    must respect ``eta t <= e^tau log(1 / (1 - e^{-tau}))``.
    """
    _require("pdbou_decorrelation", cfg)
    tau = float(cfg.params.get("tau", 1.0))
    eta = float(cfg.params.get("eta", 1.0))
    if not (tau > 0 and eta > 0):
        raise ConfigError("tau and eta must be positive")
    cap = pdbou_time_cap(eta, tau)
    use_t = "t_list" in cfg.params
    controls = [float(x) for x in cfg.params.get("t_list" if use_t else "u_list", [0.0, 0.5, 1.0])]
    rate = eta * min(1.0, tau) ** 2
    rows, meta_cells, redraw_log = [], {}, {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        p = cfg.build_partition(n)
        alphas = cfg.alphas(n)
        cells, times = [], {}
        for a in alphas:
            scale = hat_index(a, n) ** (2 / 3) * n ** (1 / 3)
            for c in controls:
                t = c if use_t else c / (rate * scale)
                if t > cap * (1 + 1e-12):
                    raise ConfigError(f"t={t:.6g} exceeds the time cap {cap:.6g} (n={n}, alpha={a}, control={c})")
                cells.append((a, c))
                times[(a, c)] = t
        meta_cells[n] = {f"{a}:{c}": t for (a, c), t in times.items()}
        grid = sorted(set(times.values()))

        def trial(gen, ens=ens, p=p, alphas=alphas, grid=grid, times=times, cells=cells):
            G = ens.sample(gen)
            _, V0 = _eig(G, alphas)
            prev, V, at = 0.0, V0, {}
            for t in grid:
                if t > prev:
                    G, _ = pdbou_advance(G, p, eta, t - prev, tau, ens.profile, gen)
                    _, V = _eig(G, alphas)
                    prev = t
                at[t] = V
            return {(a, c): 1.0 if times[(a, c)] == 0 else _overlap(V0, at[times[(a, c)]], a) for a, c in cells}

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        rows += _mc_rows(cfg, n, table, cells, wall, "t" if use_t else "u")
    return _finish(cfg, rows, {"times": meta_cells, "time_cap": cap, "redraws": redraw_log})


# ---------------------------------------------------------------------------
# spectral surveys


def _quantile_estimate(x, q, gen) -> MCEstimate:
    """Empirical quantile with a bootstrap standard error."""
    x = np.asarray(x, dtype=float)
    est = float(np.quantile(x, q))
    boots = np.quantile(x[gen.integers(0, x.size, (BOOTSTRAP, x.size))], q, axis=1)
    return MCEstimate(est, float(np.std(boots, ddof=1)), x.size)


def _freq_estimate(hits) -> MCEstimate:
    h = np.asarray(hits, dtype=float)
    pbar = float(h.mean())
    return MCEstimate(pbar, math.sqrt(pbar * (1 - pbar) / h.size), h.size)


def _boot_gen(cfg, g) -> np.random.Generator:
    # bootstrap resampling uses its own stream, away from the trial streams
    return SeedStream(int(cfg.master_seed), (g << 32) | 0xFFFFFFFF).generator()


def run_eigenvalue_variance(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Var lam_alpha rescaled by ahat^{2/3} n^{1/3}; one row per (n, alpha)."""
    _require("eigenvalue_variance", cfg)
    rows, redraw_log = [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        alphas = cfg.alphas(n)

        def trial(gen, ens=ens, alphas=alphas):
            lam = eigvals_desc(ens.sample(gen))
            _gap_ok(lam, alphas)
            return {a: float(lam[a - 1]) for a in alphas}

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        for a in alphas:
            s = hat_index(a, n) ** (2 / 3) * n ** (1 / 3)
            vt = variance_terms([t[a] for t in table]) * s
            rows.append(Row(cfg.kind, n, a, "rescaled_variance", s, MCEstimate.from_samples(vt), len(table), wall))
    return _finish(cfg, rows, {"redraws": redraw_log})


def run_spacing_survey(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Gap statistics of lam_alpha.

    Rows per (n, alpha): quantiles of ``Delta_alpha n^{1/6} ahat^{1/3}``
    (``params.quantiles``, default 0.1, 0.5, 0.9; bootstrap SE), the
    frequency of ``Delta_alpha < n^{-1/6-delta} ahat^{-1/3}``
    (``small_gap_freq``), the frequency of ``Delta_alpha < n^{-1/2-delta}``
    (``small_gap_freq_uniform``) and the frequency of a positive gap.
    """
    _require("spacing_survey", cfg)
    delta = float(cfg.params.get("delta", 0.3))
    qs = [float(q) for q in cfg.params.get("quantiles", [0.1, 0.5, 0.9])]
    rows, redraw_log = [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        alphas = cfg.alphas(n)

        def trial(gen, ens=ens, alphas=alphas):
            lam = eigvals_desc(ens.sample(gen))
            _gap_ok(lam, alphas)
            return {a: float(delta_gaps(lam, a)) for a in alphas}

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        bg = _boot_gen(cfg, g)
        for a in alphas:
            h = hat_index(a, n)
            d = np.array([t[a] for t in table])
            scaled = d * n ** (1 / 6) * h ** (1 / 3)
            for q in qs:
                rows.append(Row(cfg.kind, n, a, "quantile", q, _quantile_estimate(scaled, q, bg), d.size, wall))
            thr = n ** (-1 / 6 - delta) * h ** (-1 / 3)
            rows.append(Row(cfg.kind, n, a, "small_gap_freq", delta, _freq_estimate(d < thr), d.size, wall))
            rows.append(Row(cfg.kind, n, a, "small_gap_freq_uniform", delta,
                            _freq_estimate(d < n ** (-0.5 - delta)), d.size, wall))
            rows.append(Row(cfg.kind, n, a, "positive_gap_freq", 0.0, _freq_estimate(d > 0), d.size, wall))
    return _finish(cfg, rows, {"redraws": redraw_log})


def run_rigidity_survey(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Deviation of lam_beta from sqrt(n) gamma_beta.

    Rows per (n, beta): the 0.99-quantile of
    ``|lam_beta - sqrt(n) gamma_beta| bhat^{1/3} n^{1/6}`` (``quantile``),
    the mean of ``lam_beta / sqrt(n)`` (``mean_scaled_eigenvalue``) and,
    for every ``L`` in ``params.L_list``, the frequency of deviations
    beyond ``(log n)^L bhat^{-1/3} n^{-1/6}`` (``exceed_L``).
    """
    _require("rigidity_survey", cfg)
    q = float(cfg.params.get("quantile", 0.99))
    Ls = [float(x) for x in cfg.params.get("L_list", [0.5, 1.0])]
    rows, redraw_log = [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        betas = cfg.alphas(n)
        gam = {b: classical_position(n, b) for b in betas}

        def trial(gen, ens=ens, betas=betas):
            lam = eigvals_desc(ens.sample(gen))
            return {b: float(lam[b - 1]) for b in betas}

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        bg = _boot_gen(cfg, g)
        for b in betas:
            h = hat_index(b, n)
            lam = np.array([t[b] for t in table])
            dev = np.abs(lam - math.sqrt(n) * gam[b])
            rows.append(Row(cfg.kind, n, b, "quantile", q,
                            _quantile_estimate(dev * h ** (1 / 3) * n ** (1 / 6), q, bg), lam.size, wall))
            rows.append(Row(cfg.kind, n, b, "mean_scaled_eigenvalue", 0.0,
                            MCEstimate.from_samples(lam / math.sqrt(n)), lam.size, wall))
            for L in Ls:
                thr = math.log(n) ** L * h ** (-1 / 3) * n ** (-1 / 6)
                rows.append(Row(cfg.kind, n, b, "exceed_L", L, _freq_estimate(dev >= thr), lam.size, wall))
    return _finish(cfg, rows, {"redraws": redraw_log})


def run_delocalization_survey(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    """Sup-norm of eigenvectors, on single matrices and along one-block paths.

    ``params``: ``eps`` (0.25), ``q`` (grid points, 33), ``path`` (true),
    ``delta`` (0.3).  Rows with ``alpha = 0`` concern all eigenvectors:
    ``pass_freq`` and ``pass_freq_path`` (frequency of ``M <= n^{-1/2+eps}``,
    path version with the grid supremum), quantiles 0.5 and 0.99 of
    ``M sqrt(n)`` and its minimum.  Rows per alpha give the mean of
    ``sup_s S_alpha(X(s)) n^{-(1/2+delta)}`` along the path.
    """
    _require("delocalization_survey", cfg)
    eps = float(cfg.params.get("eps", 0.25))
    q = int(cfg.params.get("q", 33))
    do_path = bool(cfg.params.get("path", True))
    delta = float(cfg.params.get("delta", 0.3))
    s_grid = np.linspace(0.0, 1.0, q)
    rows, redraw_log = [], {}
    for g, n in enumerate(cfg.n_list):
        ens = cfg.build_ensemble(n)
        p = cfg.build_partition(n)
        alphas = cfg.alphas(n)
        masks = p.masks

        def trial(gen, ens=ens, p=p, alphas=alphas, masks=masks):
            X = ens.sample(gen)
            lam, V = _eig(X, [])
            out = {"M": float(deloc_max(V)) * math.sqrt(n)}
            if do_path:
                Y = np.where(masks[int(gen.integers(p.m))], ens.sample(gen), X)
                Xs = (1.0 - s_grid)[:, None, None] * X + s_grid[:, None, None] * Y
                Xs[0], Xs[-1] = X, Y
                lam_s, V_s = eigh_batch(Xs)
                for a in alphas:
                    if np.any(delta_gaps(lam_s, a) < GAP_REL * (1 + np.max(np.abs(lam_s)))):
                        raise _Degenerate()
                out["Mpath"] = float(deloc_max(V_s).max()) * math.sqrt(n)
                for a in alphas:
                    out[("S", a)] = float(inverse_spacing_sum(lam_s, a).max()) * n ** (-(0.5 + delta))
            return out

        table, redraws, wall = _run_trials(cfg, g, trial, threads)
        redraw_log[n] = redraws
        bg = _boot_gen(cfg, g)
        M = np.array([t["M"] for t in table])
        thr = n ** eps  # M <= n^{-1/2+eps}  <=>  M sqrt(n) <= n^eps
        rows.append(Row(cfg.kind, n, 0, "pass_freq", eps, _freq_estimate(M <= thr), M.size, wall))
        if do_path:
            Mp = np.array([t["Mpath"] for t in table])
            rows.append(Row(cfg.kind, n, 0, "pass_freq_path", eps, _freq_estimate(Mp <= thr), Mp.size, wall))
        for qq in (0.5, 0.99):
            rows.append(Row(cfg.kind, n, 0, "quantile_M_sqrt_n", qq, _quantile_estimate(M, qq, bg), M.size, wall))
        rows.append(Row(cfg.kind, n, 0, "min_M_sqrt_n", 0.0, MCEstimate.exact(float(M.min()), M.size), M.size, wall))
        if do_path:
            for a in alphas:
                x = [t[("S", a)] for t in table]
                rows.append(Row(cfg.kind, n, a, "sup_S_scaled", delta, MCEstimate.from_samples(x), len(x), wall))
    return _finish(cfg, rows, {"redraws": redraw_log})


_RUNNERS = {
    "ou_decorrelation": run_ou_decorrelation,
    "pdbou_decorrelation": run_pdbou_decorrelation,
    "resampling_decorrelation": run_resampling_decorrelation,
    "eigenvalue_variance": run_eigenvalue_variance,
    "spacing_survey": run_spacing_survey,
    "rigidity_survey": run_rigidity_survey,
    "delocalization_survey": run_delocalization_survey,
}


def run_experiment(cfg: ExperimentConfig, threads=None) -> ExperimentResult:
    return _RUNNERS[cfg.kind](cfg, threads)
