import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from georisk.errors import InvalidWeights, LengthMismatch, OutOfRange, TooFewValues
from georisk.ingest import Dataset, RegionRecord
from georisk.scoring import (
    ScoreConfig,
    ScoreTable,
    exp_mean_score,
    exp_score,
    geo_scores,
    outcome_scores,
    percentile_ranks,
)


def brute_force_percentiles(values):
    """Average position / (n-1) over every sorting permutation of ``values``."""
    n = len(values)
    totals = np.zeros(n)
    count = 0
    for perm in itertools.permutations(range(n)):
        if all(values[perm[k]] <= values[perm[k + 1]] for k in range(n - 1)):
            for pos, idx in enumerate(perm):
                totals[idx] += pos / (n - 1)
            count += 1
    return totals / count


def make_dataset(vacc, dens=None, income=None, pos=None, death=None):
    n = len(vacc)
    dens = dens if dens is not None else np.linspace(100, 200, n)
    income = income if income is not None else np.linspace(30000, 90000, n)
    pos = pos if pos is not None else np.linspace(0.05, 0.2, n)
    death = death if death is not None else np.linspace(10, 300, n)
    return Dataset(tuple(
        RegionRecord(str(10001 + i), float(vacc[i]), float(dens[i]),
                     None if income[i] is None else float(income[i]), float(pos[i]), float(death[i]))
        for i in range(n)
    ))


def test_percentiles_direct():
    assert percentile_ranks([10, 20, 30], "direct").tolist() == [0.0, 0.5, 1.0]


def test_percentiles_inverted():
    assert percentile_ranks([10, 20, 30], "inverted").tolist() == [1.0, 0.5, 0.0]


def test_percentiles_ties():
    expected = brute_force_percentiles([5, 5, 9])
    np.testing.assert_allclose(expected, [0.25, 0.25, 1.0])
    np.testing.assert_allclose(percentile_ranks([5, 5, 9], "direct"), expected, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=6))
def test_percentiles_match_enumeration_oracle(values):
    np.testing.assert_allclose(percentile_ranks(values), brute_force_percentiles(values), atol=1e-12)
    inverted = brute_force_percentiles([-v for v in values])
    np.testing.assert_allclose(percentile_ranks(values, "inverted"), inverted, atol=1e-12)


def test_missing_values_get_zero():
    out = percentile_ranks([3.0, np.nan, 1.0, 2.0], "inverted", [False, True, False, False])
    assert out.tolist() == [0.0, 0.0, 1.0, 0.5]


def test_too_few_values():
    with pytest.raises(TooFewValues):
        percentile_ranks([1.0])
    with pytest.raises(TooFewValues):
        percentile_ranks([1.0, 2.0], missing_mask=[True, False])
    with pytest.raises(TooFewValues):
        percentile_ranks([])


def test_exp_score_known_values():
    assert exp_score(0.9) == pytest.approx(7.943, abs=0.05)
    assert exp_score(0.4) == pytest.approx(2.512, abs=0.05)
    assert exp_score(0.9) == pytest.approx(7.9, abs=0.05)
    assert exp_score(0.4) == pytest.approx(2.5, abs=0.05)
    assert exp_score(0.0) == 1.0
    assert exp_score(1.0) == 10.0


@pytest.mark.parametrize("bad", [-0.01, 1.01, float("nan")])
def test_exp_score_range(bad):
    with pytest.raises(OutOfRange):
        exp_score(bad)


def test_exp_mean_score_examples():
    assert exp_mean_score([1, 1, 1], [1 / 3, 1 / 3, 1 / 3]) == pytest.approx(10.0, abs=1e-12)
    assert exp_mean_score([0, 0, 0], [0.2, 0.5, 0.3]) == pytest.approx(1.0, abs=1e-12)
    assert exp_mean_score([0.9, 0.4], [0.5, 0.5]) == pytest.approx(5.228, abs=0.01)
    assert exp_mean_score([0.9, 0.4]) == pytest.approx((10 ** 0.9 + 10 ** 0.4) / 2, abs=1e-12)


def test_exp_mean_score_errors():
    with pytest.raises(InvalidWeights):
        exp_mean_score([0.1, 0.2], [0.6, 0.6])
    with pytest.raises(InvalidWeights):
        exp_mean_score([0.1, 0.2], [1.5, -0.5])
    with pytest.raises(LengthMismatch):
        exp_mean_score([0.1, 0.2], [1.0])


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1))
def test_degenerate_mixture(p):
    assert exp_mean_score([p, 0.3, 0.7], [1, 0, 0]) == exp_score(p)


def test_gs1_hand_computed():
    ds = make_dataset([0.3, 0.5, 0.9])
    np.testing.assert_allclose(geo_scores(ds)["gs1"], [10.0, 10 ** 0.5, 1.0], rtol=0, atol=1e-15)


def test_geo_score_identities():
    rng = np.random.default_rng(0)
    ds = make_dataset(rng.uniform(0, 1, 40), rng.uniform(0, 1e5, 40), rng.uniform(1e4, 2e5, 40))
    t = geo_scores(ds)
    assert t.names == ["gs1", "gs2", "gs3", "gs4", "gs5", "gs6", "gs7"]
    np.testing.assert_allclose(t["gs4"], (t["gs1"] + t["gs2"]) / 2, rtol=0, atol=1e-12)
    np.testing.assert_allclose(t["gs5"], (t["gs1"] + t["gs3"]) / 2, rtol=0, atol=1e-12)
    np.testing.assert_allclose(t["gs6"], (t["gs2"] + t["gs3"]) / 2, rtol=0, atol=1e-12)
    np.testing.assert_allclose(t["gs7"], (t["gs1"] + t["gs2"] + t["gs3"]) / 3, rtol=0, atol=1e-12)


def test_directions():
    # higher vaccination and income lower the risk; higher density raises it
    ds = make_dataset([0.2, 0.8], dens=[10.0, 1000.0], income=[20000.0, 90000.0])
    t = geo_scores(ds)
    assert t["gs1"].tolist() == [10.0, 1.0]
    assert t["gs2"].tolist() == [1.0, 10.0]
    assert t["gs3"].tolist() == [10.0, 1.0]


def test_missing_income_scores_one():
    ds = make_dataset([0.2, 0.5, 0.8], income=[None, 40000.0, 90000.0])
    t = geo_scores(ds)
    assert t["gs3"][0] == 1.0
    np.testing.assert_allclose(t["gs3"][1:], [10.0, 1.0])
    assert any("10001" in w for w in t.warnings)


def test_outcome_scores_examples():
    ds = make_dataset([0.2, 0.5, 0.8], pos=[0.1, 0.3, 0.2], death=[50.0, 50.0, 50.0])
    t = outcome_scores(ds)
    assert t["pos_score"][1] == 10.0
    np.testing.assert_allclose(t["death_score"], 10 ** 0.5)
    two = outcome_scores(make_dataset([0.2, 0.5], pos=[0.3, 0.1]))
    assert sorted(two["pos_score"].tolist()) == [1.0, 10.0]


def _random_dataset(rng, n):
    return make_dataset(
        rng.uniform(0, 1, n), rng.uniform(0, 1e5, n), rng.uniform(1e4, 3e5, n),
        rng.uniform(0, 1, n), rng.uniform(0, 500, n),
    )


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_scores_in_range_and_monotone(n, seed):
    rng = np.random.default_rng(seed)
    ds = _random_dataset(rng, n)
    t = geo_scores(ds).merge(outcome_scores(ds))
    for col in t.columns.values():
        assert col.min() >= 1.0 and col.max() <= 10.0
    for raw, score, sign in [("vacc_rate", "gs1", -1), ("pop_density", "gs2", 1), ("median_income", "gs3", -1),
                             ("positive_rate", "pos_score", 1)]:
        x = ds.column(raw)
        for i in range(n):
            for j in range(n):
                if sign * x[i] < sign * x[j]:
                    assert t[score][i] < t[score][j]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_scale_invariance(n, seed, c):
    rng = np.random.default_rng(seed)
    ds = _random_dataset(rng, n)
    scaled = make_dataset(ds.column("vacc_rate") * min(c, 1.0), ds.column("pop_density") * c,
                          ds.column("median_income") * c, ds.column("positive_rate"),
                          ds.column("death_rate") * c)
    a = geo_scores(ds).merge(outcome_scores(ds))
    b = geo_scores(scaled).merge(outcome_scores(scaled))
    for name in a.names:
        np.testing.assert_array_equal(a[name], b[name])


def test_score_table_csv(tmp_path):
    t = ScoreTable(("10001", "10002"), {"gs1": [1.0, 10 ** 0.5], "pos_score": [10.0, 1.0]})
    path = t.to_csv(tmp_path / "s.csv")
    text = path.read_text()
    assert text.splitlines() == ["region_id,gs1,pos_score", "10001,1.000000,10.000000", "10002,3.162278,1.000000"]
    back = ScoreTable.from_csv(path)
    assert back.region_ids == t.region_ids
    np.testing.assert_allclose(back["gs1"], t["gs1"], atol=5e-7)


def test_score_table_rows_and_lengths():
    t = ScoreTable(("a", "b", "c"), {"x": [1.0, 2.0, 3.0]})
    assert t.rows([0, 2])["x"].tolist() == [1.0, 3.0]
    with pytest.raises(LengthMismatch):
        ScoreTable(("a",), {"x": [1.0, 2.0]})


def test_score_config_json():
    cfg = ScoreConfig(["vaccination", "income"], [0.45, 0.55])
    doc = json.loads(cfg.to_json())
    assert doc == {"variables": ["vaccination", "income"], "weights": [0.45, 0.55]}
    assert ScoreConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(InvalidWeights):
        ScoreConfig(["vaccination"], [0.9])
    with pytest.raises(ValueError):
        ScoreConfig(["humidity"], [1.0])
