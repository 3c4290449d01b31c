import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigenchaos.io import atomic_write_json, atomic_write_text
from eigenchaos.seeding import SeedStream, as_generator, chunk_sizes, ordered_map, resolve_threads
from eigenchaos.stats import MCEstimate, combined_se, mean_se, variance_terms


def test_stream_reproducible_and_distinct():
    a = SeedStream(5, 3).generator().standard_normal(4)
    b = SeedStream(5, 3).generator().standard_normal(4)
    c = SeedStream(5, 4).generator().standard_normal(4)
    d = SeedStream(5, 3, 1).generator().standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_stream_frozen_key_layout():
    # key = master | stream << 64, counter = substream << 192
    bg = SeedStream(7, 9, 2).generator().bit_generator
    st_ = bg.state["state"]
    assert int(st_["key"][0]) == 7 and int(st_["key"][1]) == 9
    assert int(st_["counter"][3]) == 2


def test_stream_rejects_out_of_range():
    with pytest.raises(ValueError):
        SeedStream(-1)
    with pytest.raises(ValueError):
        SeedStream(0, 2**64)


def test_as_generator_variants():
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    assert np.array_equal(as_generator(3).random(2), SeedStream(3).generator().random(2))
    with pytest.raises(TypeError):
        as_generator("seed")


def test_resolve_threads_env(monkeypatch):
    monkeypatch.setenv("EIGENCHAOS_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    monkeypatch.delenv("EIGENCHAOS_THREADS")
    assert resolve_threads() == 1
    with pytest.raises(ValueError):
        resolve_threads(0)


def test_ordered_map_independent_of_threads():
    f = lambda k: SeedStream(1, k).generator().standard_normal(3).sum()
    assert ordered_map(f, range(20), 1) == ordered_map(f, range(20), 4)


@given(st.integers(0, 10_000), st.integers(1, 500))
def test_chunk_sizes_sum(total, chunk):
    s = chunk_sizes(total, chunk)
    assert sum(s) == total and all(0 < x <= chunk for x in s)


def test_mean_se_known_values():
    m, se = mean_se([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5
    assert math.isclose(se, math.sqrt(np.var([1, 2, 3, 4], ddof=1) / 4))


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200), st.randoms())
@settings(max_examples=50)
def test_mean_se_order_independent(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert mean_se(xs) == mean_se(ys)


def test_variance_terms_mean_is_unbiased_variance():
    x = np.random.default_rng(0).standard_normal(1000)
    assert math.isclose(variance_terms(x).mean(), x.var(ddof=1), rel_tol=1e-12)


def test_estimate_helpers():
    e = MCEstimate.from_samples([1.0, 3.0])
    assert e.trials == 2 and e.mean == 2.0
    assert MCEstimate.exact(1.0).std_error == 0.0
    assert e.scaled(-2).mean == -4 and e.scaled(-2).std_error == 2 * e.std_error
    assert combined_se(3.0, 4.0) == 5.0
    with pytest.raises(ValueError):
        MCEstimate(0.0, -1.0, 1)


def test_atomic_write_leaves_no_temp_on_failure(tmp_path):
    p = tmp_path / "out.json"
    atomic_write_json(p, {"a": np.float64(1.5), "b": np.arange(2)})
    assert json.loads(p.read_text()) == {"a": 1.5, "b": [0, 1]}
    with pytest.raises(TypeError):
        atomic_write_json(tmp_path / "bad.json", {"x": object()})
    assert sorted(os.listdir(tmp_path)) == ["out.json"]
    atomic_write_text(p, "x")
    assert p.read_text() == "x"
