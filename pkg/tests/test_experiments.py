import json
import math

import pytest

from eigenchaos.experiments import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    load_config,
    resolve_alpha,
    run_experiment,
)


def cfg(kind_, **kw):
    base = dict(kind=kind_, n_list=[8], alpha_spec=[1], trials=20, master_seed=11)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


# --- configuration ----------------------------------------------------------------


def test_resolve_alpha():
    assert resolve_alpha(1, 10) == 1
    assert resolve_alpha(0.5, 9) == 5
    assert resolve_alpha(1.0, 7) == 7
    for bad in (0, 11, 0.0, 1.5, "x"):
        with pytest.raises(ConfigError):
            resolve_alpha(bad, 10)


@pytest.mark.parametrize("bad", [
    dict(kind="nope"),
    dict(n_list=[]),
    dict(alpha_spec=[]),
    dict(trials=9),
    dict(alpha_spec=[9]),
    dict(master_seed=-1),
    dict(colour="red"),
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        cfg("eigenvalue_variance", **bad)


def test_alphas_deduplicated():
    c = cfg("eigenvalue_variance", alpha_spec=[1, 0.1, 0.5])
    assert c.alphas(8) == [1, 4]


def test_load_config(tmp_path):
    with pytest.raises(ConfigError, match="config not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"kind": "spacing_survey", "n_list": [4], "trials": 10}), encoding="utf-8")
    assert load_config(good).kind == "spacing_survey"


def test_bad_profile_and_partition():
    with pytest.raises(ConfigError):
        cfg("eigenvalue_variance", ensemble={"profile": "flat"}).build_ensemble(8)
    with pytest.raises(ConfigError):
        cfg("eigenvalue_variance", partition={"kind": "stripes"}).build_partition(8)


# --- decorrelation drivers ------------------------------------------------------------


def test_ou_zero_control_and_range():
    r = run_experiment(cfg("ou_decorrelation", alpha_spec=[1, 0.5], params={"u_list": [0.0, 1.0, 100.0]}))
    for row in r.rows:
        e = row.estimate
        assert 0.0 <= e.mean <= 1.0 and e.std_error >= 0
        if row.control_value == 0.0:
            assert e.mean == 1.0 and e.std_error == 0.0
    # u = 100 is beyond the reachable range at n = 8
    assert {s["u"] for s in r.metadata["skipped"]} == {100.0}
    assert all(row.control_value != 100.0 for row in r.rows)


def test_resampling_zero_and_baseline_rows():
    r = run_experiment(cfg("resampling_decorrelation", n_list=[6], params={"k_list": [0, 3]}))
    names = {row.control_name for row in r.rows}
    assert names == {"k", "independent"}
    k0 = r.curve(6, 1, "k")[0.0]
    assert k0.mean == 1.0 and k0.std_error == 0.0
    assert 21.0 in r.curve(6, 1, "k")  # full resample cell k = m
    assert all(0.0 <= row.estimate.mean <= 1.0 for row in r.rows)


def test_resampling_full_matches_independent():
    r = run_experiment(cfg("resampling_decorrelation", n_list=[6], trials=400,
                           params={"k_list": [0], "full": True}))
    full = r.curve(6, 1, "k")[21.0]
    base = r.select(6, 1, "independent")[0].estimate
    assert abs(full.mean - base.mean) <= 4 * math.hypot(full.std_error, base.std_error)


def test_pdbou_zero_time_and_cap():
    r = run_experiment(cfg("pdbou_decorrelation", n_list=[4], params={"tau": 1.0, "eta": 1.0, "t_list": [0.0, 0.3]}))
    assert r.curve(4, 1, "t")[0.0].mean == 1.0
    assert r.metadata["time_cap"] > 0.3
    with pytest.raises(ConfigError, match="time cap"):
        run_experiment(cfg("pdbou_decorrelation", n_list=[4], params={"t_list": [5.0]}))


def test_kind_mismatch():
    from eigenchaos.experiments import run_spacing_survey
    with pytest.raises(ConfigError):
        run_spacing_survey(cfg("rigidity_survey"))


# --- surveys --------------------------------------------------------------------------


def test_variance_symmetry_edges():
    # the spectrum of a GOE matrix is symmetric in law
    r = run_experiment(cfg("eigenvalue_variance", n_list=[16], alpha_spec=[1, 1.0], trials=2000))
    a, b = r.curve(16, 1, "rescaled_variance"), r.curve(16, 16, "rescaled_variance")
    (ea,), (eb,) = a.values(), b.values()
    assert abs(ea.mean - eb.mean) <= 3 * math.hypot(ea.std_error, eb.std_error)


def test_variance_bulk_not_far_above_edge():
    r = run_experiment(cfg("eigenvalue_variance", n_list=[64], alpha_spec=[1, 0.5], trials=300))
    (edge,) = r.curve(64, 1, "rescaled_variance").values()
    (bulk,) = r.curve(64, 32, "rescaled_variance").values()
    assert bulk.mean <= 50 * edge.mean


def test_spacing_rows():
    r = run_experiment(cfg("spacing_survey", n_list=[32], trials=200))
    names = [row.control_name for row in r.rows]
    assert names.count("quantile") == 3
    assert r.select(32, 1, "positive_gap_freq")[0].estimate.mean == 1.0
    small = r.select(32, 1, "small_gap_freq")[0].estimate.mean
    assert small <= 20 * 32 ** -0.3


def test_rigidity_edge_mean():
    r = run_experiment(cfg("rigidity_survey", n_list=[256], trials=200))
    m = r.select(256, 1, "mean_scaled_eigenvalue")[0].estimate.mean
    assert 1.9 <= m <= 2.05
    assert len(r.select(256, 1, "exceed_L")) == 2


def test_rigidity_middle_finite():
    r = run_experiment(cfg("rigidity_survey", n_list=[16], alpha_spec=[0.5], trials=50))
    q = r.select(16, 8, "quantile")[0].estimate
    assert math.isfinite(q.mean) and q.mean > 0


def test_delocalization_rows():
    r = run_experiment(cfg("delocalization_survey", n_list=[16], trials=20, params={"q": 5}))
    assert r.select(16, 0, "min_M_sqrt_n")[0].estimate.mean >= 1.0
    assert {row.control_name for row in r.select(16, 0)} >= {"pass_freq", "pass_freq_path", "quantile_M_sqrt_n"}
    assert len(r.select(16, 1, "sup_S_scaled")) == 1


# --- reproducibility and output --------------------------------------------------------


@pytest.mark.parametrize("kind,params", [
    ("ou_decorrelation", {"u_list": [0.0, 1.0]}),
    ("resampling_decorrelation", {"k_list": [1, 5]}),
    ("spacing_survey", {}),
])
def test_rows_independent_of_threads(kind, params):
    c = cfg(kind, n_list=[6, 8], params=params)
    a = [row.key() for row in run_experiment(c, threads=1).rows]
    b = [row.key() for row in run_experiment(c, threads=3).rows]
    assert a == b


def test_seed_changes_rows():
    a = run_experiment(cfg("eigenvalue_variance"))
    b = run_experiment(cfg("eigenvalue_variance", master_seed=12))
    assert a.rows[0].estimate.mean != b.rows[0].estimate.mean


def test_write_csv_and_sidecar(tmp_path):
    r = run_experiment(cfg("eigenvalue_variance", alpha_spec=[1, 0.5]))
    csv_path, meta_path = r.write(tmp_path / "out.csv")
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == list(CSV_HEADER)
    assert len(lines) == 1 + len(r.rows)
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    assert meta["master_seed"] == 11 and meta["config"]["kind"] == "eigenvalue_variance"
    assert "build_hash" in meta["code"]
    assert not list(tmp_path.glob("*.tmp*"))
    # round trip of the float columns
    first = lines[1].split(",")
    assert float(first[5]) == r.rows[0].estimate.mean
