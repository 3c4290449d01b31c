"""Acceptance criteria 1 to 13 at full scale.

Every test is tagged with the criterion it covers; ``conftest.py`` prints a
PASS/FAIL line per criterion at the end of the session.  Thresholds below
are frozen; the decorrelation thresholds were fixed after one calibration
run on ``SEED`` and must not be retuned.

Run just this file with ``pytest tests/test_acceptance.py -v``; it takes
about 12 minutes on one core.
"""
import math
import time

import numpy as np
import pytest

from eigenchaos.dynamics import pdbou_time_cap
from eigenchaos.experiments import ExperimentConfig, run_experiment
from eigenchaos.identities import (
    ou_overlap_monotonicity,
    ou_variance_identity_check,
    pdbou_diff_cov,
    pdbou_diff_cov_mc,
    pdbr_analysis,
    t_plus_minus,
)
from eigenchaos.oracles import fd_gradient_check, fd_hessian_check
from eigenchaos.partitions import entries_partition
from eigenchaos.seeding import SeedStream
from eigenchaos.stats import combined_se

SEED = 20261019

# frozen tolerances
Z_IDENTITY = 3.0
Z_DIFFCOV = 4.0
MONO_SE = 2.0
UPPER_SE = 3.0
COLLAPSE_ABS = 0.1
COLLAPSE_SE = 4.0
MATCH_SE = 4.0
DECORR_U = 20.0
DECORR_MAX = 0.2  # frozen after the calibration run on SEED
VAR_RATIO = 2.0
MEDIAN_RATIO = 2.0
DELOC_PASS = 0.99

OU_U = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0]
RESAMPLE_C = [0.0, 0.25, 0.5, 1.0, 2.0]

pytestmark = pytest.mark.acceptance


def stream(tag):
    return SeedStream(SEED, tag)


def config(kind, **kw):
    d = dict(kind=kind, master_seed=SEED)
    d.update(kw)
    return ExperimentConfig.from_dict(d)


def note(record_property, text):
    record_property("detail", text)


def check_monotone(curve, z=MONO_SE):
    """Pairs of consecutive controls where the estimate rises by more than z SE."""
    xs = sorted(curve)
    bad = []
    for a, b in zip(xs, xs[1:]):
        ea, eb = curve[a], curve[b]
        if eb.mean - ea.mean > z * combined_se(ea.std_error, eb.std_error):
            bad.append((a, b, eb.mean - ea.mean))
    return bad


def collapse_gaps(c1, c2):
    """(control, |difference|, allowed) over shared controls."""
    out = []
    for u in sorted(set(c1) & set(c2)):
        e1, e2 = c1[u], c2[u]
        out.append((u, abs(e1.mean - e2.mean), COLLAPSE_ABS + COLLAPSE_SE * combined_se(e1.std_error, e2.std_error)))
    return out


# --- 1: derivative oracle -------------------------------------------------------------


@pytest.mark.criterion(1, "derivative oracle, n=8, 100 draws")
def test_ac01_derivative_oracle(record_property):
    t0 = time.perf_counter()
    g = fd_gradient_check(draws=100, n=8, seed=SEED)
    h = fd_hessian_check(draws=100, n=8, seed=SEED)
    wall = time.perf_counter() - t0
    note(record_property, f"grad error/tol={g.worst:.3g} hess rel={h.worst:.3g} wall={wall:.1f}s")
    assert g.passed and h.passed
    assert wall < 60


# --- 2: OU variance identity -------------------------------------------------------------


@pytest.mark.criterion(2, "OU variance identity, 1e6 trials")
@pytest.mark.parametrize("n,alpha", [(2, 1), (8, 3)])
def test_ac02_ou_identity(record_property, n, alpha):
    rep = ou_variance_identity_check(n, alpha, 1.0, trials=10 ** 6, rng=stream(200 + n))
    note(record_property, f"lhs={rep.lhs.mean:.6g} rhs={rep.rhs.mean:.6g} z={rep.z_score:.2f}")
    assert rep.trials == 10 ** 6
    assert rep.z_score <= Z_IDENTITY


# --- 3, 4: block resampling identity and T_k ladder -----------------------------------------


@pytest.fixture(scope="module")
def pdbr_n3():
    return pdbr_analysis(3, entries_partition(3), 1, 10 ** 6, stream(300))


@pytest.mark.criterion(3, "block resampling variance identity, n=3, m=6")
def test_ac03_pdbr_identity(record_property, pdbr_n3):
    rep = pdbr_n3.identity_report()
    note(record_property, f"lhs={rep.lhs.mean:.6g} rhs={rep.rhs.mean:.6g} z={rep.z_score:.2f}")
    assert pdbr_n3.m == 6 and rep.trials == 10 ** 6
    assert rep.z_score <= Z_IDENTITY


@pytest.mark.criterion(4, "T_k ladder, n=3, m=6")
def test_ac04_ladder(record_property, pdbr_n3):
    lad = pdbr_n3.ladder()
    note(record_property, " ".join(f"T{k}={e.mean:.4g}" for k, e in enumerate(lad.T)) + f" Var={lad.variance.mean:.4g}")
    assert lad.violations(mono_z=MONO_SE, upper_z=UPPER_SE, nonneg_z=MONO_SE) == []


# --- 5: block-difference covariances -----------------------------------------------------


@pytest.mark.criterion(5, "closed-form block-difference covariances")
@pytest.mark.parametrize("tau", [0.2, 1.0, 5.0])
@pytest.mark.parametrize("kb", [0, 1, 2])
def test_ac05_diff_cov(record_property, tau, kb):
    p = entries_partition(3)
    B = p.index_of(1, 2)
    K = np.full(p.m, 2, dtype=np.int64)  # other blocks must not matter
    K[B] = kb
    rep = pdbou_diff_cov_mc(3, p, tau, K, B, 10 ** 6, stream(500 + 10 * kb + int(10 * tau)))
    exact = pdbou_diff_cov(tau, kb)
    note(record_property, f"mc={rep.lhs.mean:.5g} exact={exact:.5g} z={rep.z_score:.2f}")
    assert rep.z_score <= Z_DIFFCOV
    if kb == 0:
        assert exact > 0 and rep.lhs.mean > 0
    if kb == 1:
        # the sign flips as soon as the block has rung once
        assert exact < 0 and rep.lhs.mean < 0


# --- 6: T_plus dominates T_minus ------------------------------------------------------------


@pytest.mark.criterion(6, "T+ / T- dominance, n=6, tau=eta=1, t=0.4")
def test_ac06_dominance(record_property):
    r = t_plus_minus(6, entries_partition(6), 1, 1.0, 1.0, 0.4, trials=200_000, rng=stream(600),
                     probe_k=3, probe_trials=50_000)
    note(record_property, f"T+={r.T_plus.mean:.4g} T-={r.T_minus.mean:.4g} margin={r.margin.mean:.4g}"
                          f"+-{r.margin.std_error:.2g} cap={r.t_cap:.4g} min probe z={r.min_probe_z():.3g}")
    assert r.in_range and 0.4 <= r.t_cap
    assert r.dominance_holds(MONO_SE)
    assert r.min_probe_z() >= -MONO_SE


# --- 7: overlap monotone along OU -----------------------------------------------------------


@pytest.mark.criterion(7, "overlap monotone along OU, n=32")
@pytest.mark.parametrize("alpha", [1, 16])
def test_ac07_overlap_monotone(record_property, alpha):
    c = ou_overlap_monotonicity(32, alpha, 1.0, [0.0, 0.01, 0.05, 0.2, 1.0], 4000, stream(700 + alpha))
    note(record_property, " ".join(f"{t:g}:{e.mean:.4f}" for t, e in zip(c.times, c.estimates)))
    assert c.estimates[0].mean == 1.0
    assert c.violations(MONO_SE) == []


# --- 8: OU decorrelation scaling -------------------------------------------------------------


@pytest.fixture(scope="module")
def ou_scan():
    cfg = config("ou_decorrelation", n_list=[64, 128, 256], alpha_spec=[1, 0.5], trials=500,
                 params={"tau": 1.0, "u_list": OU_U})
    return run_experiment(cfg)


def _alpha_cells(ns, frac):
    return [(n, 1 if frac is None else math.ceil(frac * n)) for n in ns]


@pytest.mark.criterion(8, "OU decorrelation scaling, n in {64,128,256}")
@pytest.mark.parametrize("frac", [None, 0.5], ids=["edge", "bulk"])
def test_ac08_ou_decorrelation(record_property, ou_scan, frac):
    ns = [64, 128, 256]
    cells = _alpha_cells(ns, frac)
    curves = {n: ou_scan.curve(n, a, "u") for n, a in cells}
    for n in ns:
        assert curves[n][0.0].mean == 1.0 and curves[n][0.0].std_error == 0.0
        assert check_monotone(curves[n]) == []
    worst = []
    for n1, n2 in zip(ns, ns[1:]):
        for u, d, allowed in collapse_gaps(curves[n1], curves[n2]):
            worst.append(d)
            assert d <= allowed, (n1, n2, u, d, allowed)
    # u is bounded by ahat^(2/3) n^(1/3); at the edge u = 20 is out of reach for these n,
    # so the threshold is read at the largest u every n can reach
    shared = set.intersection(*(set(c) for c in curves.values()))
    u_thr = DECORR_U if DECORR_U in shared else max(shared)
    vals = [curves[n][u_thr].mean for n in ns]
    note(record_property, f"u*={u_thr:g} m(u*)={[round(v, 4) for v in vals]} max cross-n diff={max(worst):.3f}")
    assert all(v <= DECORR_MAX for v in vals)


# --- 9: resampling decorrelation ---------------------------------------------------------------


@pytest.fixture(scope="module")
def resample_scan():
    cfg = config("resampling_decorrelation", n_list=[64, 128], alpha_spec=[1, 0.5], trials=400,
                 params={"c_list": RESAMPLE_C, "full": True, "baseline": True})
    return run_experiment(cfg)


@pytest.mark.criterion(9, "resampling decorrelation, n in {64,128}")
@pytest.mark.parametrize("frac", [None, 0.5], ids=["edge", "bulk"])
def test_ac09_resampling(record_property, resample_scan, frac):
    ns = [64, 128]
    res = resample_scan
    details = []
    curves = {}
    for n, a in _alpha_cells(ns, frac):
        cur = res.curve(n, a, "c")
        ks = res.metadata["k"][n]
        m = n * (n + 1) // 2
        full_c = [c for c in cur if ks[f"{a}:{c!r}"] == m]
        assert len(full_c) == 1
        full = cur.pop(full_c[0])
        assert cur[0.0].mean == 1.0 and cur[0.0].std_error == 0.0
        assert check_monotone(cur) == []
        base = res.select(n, a, "independent")[0].estimate
        z = abs(full.mean - base.mean) / combined_se(full.std_error, base.std_error)
        details.append(f"n={n} full={full.mean:.4f} indep={base.mean:.4f} z={z:.2f}")
        assert z <= MATCH_SE
        curves[n] = cur
    for u, d, allowed in collapse_gaps(curves[64], curves[128]):
        assert d <= allowed, (u, d, allowed)
    note(record_property, "; ".join(details))


# --- 10: PDBOU limits -----------------------------------------------------------------------------


PD_N = 64
PD_TRIALS = 500


@pytest.mark.criterion(10, "PDBOU limit matching")
def test_ac10_large_tau_matches_resampling(record_property):
    tau, eta = 10.0, 1.0
    cap = pdbou_time_cap(eta, tau)
    ts = [0.0, 0.05, 0.2, 0.5, min(1.0, cap)]
    pd = run_experiment(config("pdbou_decorrelation", n_list=[PD_N], alpha_spec=[1], trials=PD_TRIALS,
                               params={"tau": tau, "eta": eta, "t_list": ts}))
    m = PD_N * (PD_N + 1) // 2
    ks = [round(m * -math.expm1(-eta * t)) for t in ts]
    rs = run_experiment(config("resampling_decorrelation", n_list=[PD_N], alpha_spec=[1], trials=PD_TRIALS,
                               master_seed=SEED + 1,
                               params={"k_list": ks, "full": False, "baseline": False}))
    a, b = pd.curve(PD_N, 1, "t"), rs.curve(PD_N, 1, "k")
    worst = 0.0
    for t, k in zip(ts, ks):
        ea, eb = a[t], b[float(k)]
        d = abs(ea.mean - eb.mean)
        allowed = COLLAPSE_ABS + MATCH_SE * combined_se(ea.std_error, eb.std_error)
        worst = max(worst, d)
        assert d <= allowed, (t, k, ea.mean, eb.mean)
    note(record_property, f"tau={tau} max |diff|={worst:.3f}")


def _small_tau_runs(ou_times):
    tau = 0.05
    eta = 1.0 / tau ** 2
    cap = pdbou_time_cap(eta, tau)
    scale = PD_N ** (1 / 3)
    rate = eta * min(1.0, tau) ** 2
    us = [0.0] + [f * cap * rate * scale for f in (0.25, 0.5, 1.0)]
    pd = run_experiment(config("pdbou_decorrelation", n_list=[PD_N], alpha_spec=[1], trials=PD_TRIALS,
                               params={"tau": tau, "eta": eta, "u_list": us}))
    ou_params = {"tau": 1.0, "t_list": ou_times(us, tau, eta, rate, scale)} if ou_times else {"tau": 1.0, "u_list": us}
    ou = run_experiment(config("ou_decorrelation", n_list=[PD_N], alpha_spec=[1], trials=PD_TRIALS,
                               master_seed=SEED + 2, params=ou_params))
    a = pd.curve(PD_N, 1, "u")
    b = ou.curve(PD_N, 1, "t" if ou_times else "u")
    pairs = list(zip(us, sorted(b)))
    return a, b, pairs


@pytest.mark.criterion(10, "PDBOU limit matching")
def test_ac10_small_tau_matches_ou_at_equal_u(record_property):
    a, b, pairs = _small_tau_runs(None)
    diffs = []
    for u, ub in pairs:
        ea, eb = a[u], b[ub]
        diffs.append(f"u={u:.3g}: pdbou={ea.mean:.3f} ou={eb.mean:.3f}")
    note(record_property, "; ".join(diffs))
    for u, ub in pairs:
        ea, eb = a[u], b[ub]
        assert abs(ea.mean - eb.mean) <= COLLAPSE_ABS + MATCH_SE * combined_se(ea.std_error, eb.std_error), (u, ea, eb)


def test_small_tau_matches_ou_at_equal_clock_time(record_property):
    """Supplementary: with many short steps each entry has moved an OU time of
    about eta t (1 - e^{-tau}) by time t; matching on that time lines the
    curves up."""

    def clock_time(us, tau, eta, rate, scale):
        return [u / (rate * scale) * eta * -math.expm1(-tau) for u in us]

    a, b, pairs = _small_tau_runs(clock_time)
    out = []
    for u, t in pairs:
        ea, eb = a[u], b[t]
        out.append(f"u={u:.3g} t_ou={t:.3g}: pdbou={ea.mean:.3f} ou={eb.mean:.3f}")
        assert abs(ea.mean - eb.mean) <= COLLAPSE_ABS + MATCH_SE * combined_se(ea.std_error, eb.std_error)
    note(record_property, "; ".join(out))


# --- 11: eigenvalue variance scaling --------------------------------------------------------------


@pytest.mark.criterion(11, "Var(lambda_1) n^(1/3) within factor 2, n=64..512")
def test_ac11_variance_scaling(record_property):
    ns = [64, 128, 256, 512]
    res = run_experiment(config("eigenvalue_variance", n_list=ns, alpha_spec=[1], trials=2000))
    v = [res.select(n, 1, "rescaled_variance")[0].estimate.mean for n in ns]
    note(record_property, "rescaled Var=" + ", ".join(f"{x:.4f}" for x in v))
    assert max(v) / min(v) <= VAR_RATIO


# --- 12: spacing and delocalization surveys -------------------------------------------------------


@pytest.mark.criterion(12, "spacing median stable; delocalization pass rate at eps=0.25")
def test_ac12_spacing_median(record_property):
    ns = [64, 128, 256, 512]
    res = run_experiment(config("spacing_survey", n_list=ns, alpha_spec=[1], trials=500,
                                params={"quantiles": [0.5]}))
    med = [res.select(n, 1, "quantile")[0].estimate.mean for n in ns]
    note(record_property, "median gap n^(1/6)=" + ", ".join(f"{x:.4f}" for x in med))
    assert all(r.estimate.mean == 1.0 for r in res.rows if r.control_name == "positive_gap_freq")
    assert max(med) / min(med) <= MEDIAN_RATIO


@pytest.mark.criterion(12, "spacing median stable; delocalization pass rate at eps=0.25")
def test_ac12_delocalization(record_property):
    res = run_experiment(config("delocalization_survey", n_list=[256], alpha_spec=[1], trials=200,
                                params={"eps": 0.25, "q": 33, "path": True}))
    single = res.select(256, 0, "pass_freq")[0].estimate.mean
    path = res.select(256, 0, "pass_freq_path")[0].estimate.mean
    med = res.select(256, 0, "quantile_M_sqrt_n")[0].estimate.mean
    note(record_property, f"pass={single:.3f} path pass={path:.3f} median M sqrt(n)={med:.3f} vs n^0.25={256 ** 0.25:.3f}")
    assert res.select(256, 0, "min_M_sqrt_n")[0].estimate.mean >= 1.0
    assert single >= DELOC_PASS
    assert path >= DELOC_PASS


# --- 13: determinism across thread counts -----------------------------------------------------------


@pytest.mark.criterion(13, "bit-identical rows across thread counts")
def test_ac13_experiment_rows(record_property):
    cfg = config("ou_decorrelation", n_list=[64, 128], alpha_spec=[1, 0.5], trials=40,
                 params={"u_list": [0.0, 1.0, 3.0]})
    a = [r.key() for r in run_experiment(cfg, threads=1).rows]
    b = [r.key() for r in run_experiment(cfg, threads=2).rows]
    note(record_property, f"{len(a)} rows compared")
    assert a == b


@pytest.mark.criterion(13, "bit-identical rows across thread counts")
def test_ac13_identity_arrays():
    a = pdbr_analysis(3, entries_partition(3), 1, 20_000, stream(1300), chunk=5_000, threads=1)
    b = pdbr_analysis(3, entries_partition(3), 1, 20_000, stream(1300), chunk=5_000, threads=2)
    assert np.array_equal(a.f, b.f) and np.array_equal(a.T, b.T)
    r1 = ou_variance_identity_check(2, 1, 1.0, trials=20_000, rng=stream(1301), chunk=5_000, threads=1)
    r2 = ou_variance_identity_check(2, 1, 1.0, trials=20_000, rng=stream(1301), chunk=5_000, threads=2)
    assert r1.to_json() == r2.to_json()
