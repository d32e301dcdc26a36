import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import kolmogorov

from conftest import account, corpus, tweet
from trolltrace.features import FEATURE_NAMES, Dataset
from trolltrace.stats import (
    COMPARISON_FEATURES,
    app_usage_timeseries,
    campaign_metrics,
    comparison_report,
    cross_corpus_duplicates,
    ecdf,
    format_comparison,
    kolmogorov_sf,
    ks_two_sample,
    normalize_text,
    source_count_cdf,
    tfidf_group_scores,
    tfidf_top_terms,
)


def brute_ks(a, b):
    """Sup gap of the two ECDFs, each evaluated by direct counting."""
    best = 0.0
    for x in list(a) + list(b):
        fa = sum(v <= x for v in a) / len(a)
        fb = sum(v <= x for v in b) / len(b)
        best = max(best, abs(fa - fb))
    return best


def test_ks_examples():
    r = ks_two_sample([1, 2, 3], [1, 2, 3])
    assert (r.statistic, r.p_value, r.significant) == (0.0, 1.0, False)
    assert ks_two_sample([0, 0, 0], [1, 1, 1]).statistic == 1.0
    assert ks_two_sample([1, 2], [1.5, 2.5]).statistic == brute_ks([1, 2], [1.5, 2.5]) == 0.5
    with pytest.raises(ValueError):
        ks_two_sample([], [1])


def test_kolmogorov_series_matches_reference():
    for lam in np.linspace(0.2, 3.0, 57):
        assert kolmogorov_sf(lam) == pytest.approx(kolmogorov(lam), abs=1e-12)
    assert kolmogorov_sf(0.05) == 1.0
    assert kolmogorov_sf(10.0) == pytest.approx(0.0, abs=1e-40)


def test_ks_pvalue_formula():
    a, b = np.arange(30.0), np.arange(30.0) + 9.5
    r = ks_two_sample(a, b)
    ne = 30 * 30 / 60
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * r.statistic
    assert r.p_value == pytest.approx(kolmogorov(lam), abs=1e-12)
    assert r.significant == (r.p_value < 0.01)


samples = st.lists(st.integers(-5, 5).map(float), min_size=1, max_size=30)


@settings(max_examples=200, deadline=None)
@given(samples, samples)
def test_ks_symmetric_and_oracle(a, b):
    r1, r2 = ks_two_sample(a, b), ks_two_sample(b, a)
    assert r1.statistic == r2.statistic and r1.p_value == r2.p_value
    assert abs(r1.statistic - brute_ks(a, b)) <= 1e-12
    assert 0 <= r1.p_value <= 1


def _ds(rows, label):
    X = np.zeros((len(rows), 45))
    for i, r in enumerate(rows):
        for k, v in r.items():
            X[i, FEATURE_NAMES.index(k)] = v
    return Dataset(X, [label] * len(rows), [f"{label}{i}" for i in range(len(rows))], ["t"] * len(rows))


def test_comparison_report():
    trolls = _ds([{"retweet_fraction": 0.9}] * 20, 1)
    real = _ds([{"retweet_fraction": 0.1}] * 20, 0)
    rows = comparison_report(trolls, real)
    assert len(rows) == len(COMPARISON_FEATURES)
    by = {r.feature_name: r for r in rows}
    assert by["retweet_fraction"].ks.statistic == 1.0 and by["retweet_fraction"].ks.significant
    assert by["retweet_fraction"].mean_troll == pytest.approx(0.9)
    assert by["avg_word_count"].ks.statistic == 0.0 and not by["avg_word_count"].ks.significant
    with pytest.raises(KeyError):
        comparison_report(trolls, real, ["no_such_feature"])
    table = format_comparison(rows)
    assert len(table.splitlines()) == len(rows) + 1


def _group(*docs, prefix="a"):
    return [account(f"{prefix}{i}", [d]) for i, d in enumerate(docs)]


def test_tfidf_hand_table():
    A = _group("apple banana apple", "banana cherry", prefix="a")
    B = _group("cherry date", "banana date date", prefix="b")
    ln = math.log
    sa, sb = tfidf_group_scores(A, B)
    assert sa == {"apple": 2 * ln(4), "banana": ln(4 / 3) + ln(4 / 3), "cherry": ln(2)}
    assert sb == {"cherry": ln(2), "date": ln(2) + 2 * ln(2), "banana": ln(4 / 3)}
    ta, tb = tfidf_top_terms(A, B, k=2)
    assert ta == ["apple", "cherry"] and tb == ["date", "cherry"]


def test_tfidf_rules():
    A = _group("Common RARE https://x.co/y @someone", prefix="a")
    B = _group("common other", prefix="b")
    sa, sb = tfidf_group_scores(A, B)
    assert sa["common"] == 0.0 and "https://x.co/y" not in sa and "@someone" not in sa
    ta, tb = tfidf_top_terms(A, B, k=5)
    assert ta == ["rare", "common"]  # k beyond vocabulary returns everything ranked
    assert "rare" not in tb and "other" not in ta
    # ties break lexicographically
    ta, _ = tfidf_top_terms(_group("zeta alpha", prefix="a"), _group("x", prefix="b"), k=2)
    assert ta == ["alpha", "zeta"]
    with pytest.raises(ValueError):
        tfidf_top_terms(A, [], k=1)
    with pytest.raises(ValueError):
        tfidf_top_terms(A, B, k=0)


def test_tfidf_tweet_documents():
    A = [account("a", ["x y", "x"])]
    B = [account("b", ["y"])]
    sa, _ = tfidf_group_scores(A, B, doc_unit="tweet")
    # three documents; x in 2 of them, y in 2 of them
    assert sa == {"x": 2 * math.log(3 / 2), "y": math.log(3 / 2)}


def test_campaign_metrics():
    c = corpus([account("a", [tweet("x", client="IFTTT", tid="1"), tweet("y", client="IFTTT", tid="2")])], name="2019x_y")
    m = campaign_metrics(c)
    assert (m.scheduled_fraction, m.retweet_fraction, m.account_count, m.campaign) == (1.0, 0.0, 1, "2019x_y")
    c = corpus([
        account("a", [tweet("RT @q: x", client="IFTTT", rt=True, tid="1"), tweet("y", tid="2")]),
        account("b", [tweet("z", client="TweetDeck", tid="3"), tweet("w", client="hootsuite", tid="4")]),
    ])
    m = campaign_metrics(c)
    assert (m.scheduled_fraction, m.retweet_fraction) == (0.5, 0.25)


def test_app_usage_timeseries():
    c1 = corpus([account("a", [tweet("x", ts=t, client="IFTTT", tid=str(t)) for t in (10, 20, 30, 100)])], name="c1")
    c2 = corpus([account("b", [tweet("x", ts=15, client="IFTTT", tid="1"), tweet("y", ts=16, client="Other", tid="2")])],
                name="c2")
    s = app_usage_timeseries([c1, c2], "IFTTT", 50)
    assert s == {"c1": [(0, 3), (100, 1)], "c2": [(0, 1)]}
    assert app_usage_timeseries([c1], "TweetDeck", 50) == {"c1": []}
    with pytest.raises(ValueError):
        app_usage_timeseries([c1], "IFTTT", 0)


def test_cross_corpus_duplicates():
    advice = "When a friend does something wrong, forgive them."
    cs = [corpus([account(f"a{i}", [advice if i != 1 else f"RT @x: {advice}  "])], name=f"c{i}") for i in range(3)]
    cs.append(corpus([account("z", ["unique words"])], name="c3"))
    hits = cross_corpus_duplicates(cs, 2)
    assert len(hits) == 1
    assert hits[0].text == advice and hits[0].corpora == {"c0", "c1", "c2"} and hits[0].count == 3
    assert cross_corpus_duplicates(cs[3:] + [corpus([account("q", ["other"])], name="c4")]) == []
    assert normalize_text("  RT @name:   a \n b ") == "a b"
    with pytest.raises(ValueError):
        cross_corpus_duplicates(cs, 1)


def test_source_count_cdf():
    clients = [["A"], ["A", "B"], ["B", "C"], ["A", "B", "C", "D"]]
    accs = [account(f"a{i}", [tweet("x", client=c, tid=str(j)) for j, c in enumerate(cs)]) for i, cs in enumerate(clients)]
    assert source_count_cdf(accs) == [(1, 0.25), (2, 0.75), (4, 1.0)]
    assert source_count_cdf([accs[0]] * 1) == [(1, 1.0)]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_ecdf_against_brute_force(vals):
    pts = ecdf(vals)
    ys = [f for _, f in pts]
    assert ys == sorted(ys) and ys[-1] == 1.0
    for x, f in pts:
        assert f == sum(v <= x for v in vals) / len(vals)
