import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import account, tweet
from trolltrace.sources import (
    SourceCatalog,
    SourceClass,
    classify_source,
    collapse,
    default_catalog,
    is_fake_source,
    source_stats,
)

CAT = default_catalog()
REGULAR = ["Twitter Web Client", "Twitter for Android", "Twitter for iPhone", "Twitter for iPad", "Twitter Web App"]
SCHEDULING = ["IFTTT", "TweetDeck", "dlvr.it", "Hootsuite", "Twibble", "SocialOomph", "Zapier.com"]


def test_default_catalog_contents():
    assert CAT.regular == frozenset(REGULAR)
    assert CAT.scheduling == frozenset(SCHEDULING)
    assert CAT.canonical >= CAT.regular | {"Instagram", "HTC Peep", "Hootsuite Inc.", "Twitter for iOS"}


@pytest.mark.parametrize(
    "name, out", [("Twitter for  Android", "twitter for android"), ("  HTC Peep", "htc peep"), ("dlvr.it", "dlvr.it")]
)
def test_collapse(name, out):
    assert collapse(name) == out


@pytest.mark.parametrize(
    "name, fake",
    [
        ("Twitter for  Android", True),
        ("hootsuite", True),
        ("Twitter for Android", False),
        (" Twitter for iOS", True),
        ("  HTC Peep", True),
        ("   Instagram", True),
        ("twitter for iphone", True),
        ("dlvr.it", False),
        ("Some New App", False),
        ("Twidere for Android #5", True),
        ("Twitter for iphons", True),
    ],
)
def test_is_fake_source(name, fake):
    assert is_fake_source(name, CAT) is fake


@pytest.mark.parametrize(
    "name, cls",
    [
        ("TweetDeck", SourceClass.SCHEDULING),
        ("Twitter Web App", SourceClass.REGULAR),
        ("Moments Internal Auth", SourceClass.OTHER),
        ("Twitter for  iPad", SourceClass.FAKE),
        ("Instagram", SourceClass.OTHER),
    ],
)
def test_classify_source(name, cls):
    assert classify_source(name, CAT) is cls


def test_canonical_names_never_fake():
    assert not any(is_fake_source(c, CAT) for c in CAT.canonical)


mangle = st.tuples(st.sampled_from(sorted(CAT.canonical)), st.integers(0, 3), st.integers(0, 2), st.booleans())


@settings(max_examples=200, deadline=None)
@given(mangle)
def test_whitespace_and_case_mangles_are_fake(m):
    name, lead, extra, lower = m
    s = " " * lead + name.replace(" ", " " * (1 + extra), 1)
    if lower:
        s = s.lower()
    assert is_fake_source(s, CAT) is (s not in CAT.canonical)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=30))
def test_classification_total(name):
    assert classify_source(name, CAT) in set(SourceClass)


def test_source_stats_examples():
    s = source_stats(account("a", [tweet("x", client="Twitter for iPhone", tid=str(i)) for i in range(4)]), CAT)
    assert (s.distinct_sources, s.fraction_regular, s.fraction_fake, s.fraction_scheduled) == (1, 1.0, 0.0, 0.0)
    s = source_stats(account("a", [tweet("x", client="hootsuite", tid="1"), tweet("y", client="IFTTT", tid="2")]), CAT)
    assert (s.distinct_sources, s.fraction_fake, s.fraction_scheduled) == (2, 0.5, 0.5)
    s = source_stats(account("a", []), CAT)
    assert (s.distinct_sources, s.fraction_fake, s.fraction_regular, s.fraction_scheduled) == (0, 0, 0, 0)


def test_source_stats_order_invariant():
    tws = [tweet("x", client=c, tid=str(i)) for i, c in enumerate(["IFTTT", "hootsuite", "Twitter for iPad", "IFTTT"])]
    a = account("a", tws)
    b = account("a", list(reversed(tws)))
    assert source_stats(a, CAT) == source_stats(b, CAT)


def test_catalog_file_round_trip(tmp_path):
    p = tmp_path / "cat.json"
    d = CAT.to_dict()
    d["canonical"].append("Brand New App")
    p.write_text(json.dumps(d))
    cat = SourceCatalog.load(p)
    assert is_fake_source("brand new  app", cat)
    assert not is_fake_source("brand new  app", CAT)
    assert cat.content_hash() != CAT.content_hash()
