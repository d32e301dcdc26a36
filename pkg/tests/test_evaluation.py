from dataclasses import replace

import pytest

from conftest import account, corpus, tweet
from trolltrace.corpus import DataError
from trolltrace.evaluation import (
    ProtocolError,
    detect_in_wild,
    false_positive_eval,
    leave_one_campaign_eval,
)
from trolltrace.features import build_dataset
from trolltrace.learners import train
from trolltrace.sources import uses_fake_source
from trolltrace.synth import SynthConfig, synth_campaigns, synth_generate

HP = {"n_trees": 30}


@pytest.fixture(scope="module")
def campaigns():
    return synth_campaigns(SynthConfig(n_troll=60, n_benign=80, n_campaigns=3, seed=21, tweets_per_account=(8, 20)))


@pytest.fixture(scope="module")
def model():
    trolls, benign = synth_generate(SynthConfig(n_troll=80, n_benign=80, seed=22, tweets_per_account=(8, 20)))
    return train("rf", build_dataset([trolls, benign]), HP)


def test_leave_one_campaign(campaigns):
    camps, benign = campaigns
    reps = leave_one_campaign_eval(camps, benign, n_per_class=60, seed=0, hyperparams=HP)
    assert [r.training_campaign for r in reps] == sorted(c.name for c in camps)
    for r in reps:
        names = [t.campaign for t in r.targets]
        assert r.training_campaign not in names and len(names) == 2
        for t in r.targets:
            assert 0 <= t.detected <= t.total == 60
            assert 0 <= t.rate <= 1
        assert r.total == 120
        assert r.detection_rate >= 0.9


def test_leave_one_campaign_workers_match(campaigns):
    camps, benign = campaigns
    a = leave_one_campaign_eval(camps, benign, n_per_class=40, seed=1, hyperparams=HP, workers=1)
    b = leave_one_campaign_eval(camps, benign, n_per_class=40, seed=1, hyperparams=HP, workers=2)
    assert a == b


def test_tiny_campaign_skipped_but_targeted(campaigns):
    camps, benign = campaigns
    tiny = corpus([camps[0].accounts[0]], name="2019jun_tiny")
    with pytest.warns(UserWarning, match="2019jun_tiny"):
        reps = leave_one_campaign_eval([camps[1], tiny], benign, n_per_class=40, hyperparams=HP)
    assert [r.training_campaign for r in reps] == [camps[1].name]
    assert [t.campaign for t in reps[0].targets] == ["2019jun_tiny"]


def test_leave_one_campaign_preconditions(campaigns):
    camps, benign = campaigns
    with pytest.raises(DataError):
        leave_one_campaign_eval(camps[:1], benign)
    with pytest.raises(DataError):
        leave_one_campaign_eval(camps, corpus([], "benign"))


def test_overlapping_campaigns_trip_disjointness(campaigns):
    camps, benign = campaigns
    clone = replace(camps[0], name="2099jan_clone")
    with pytest.raises(ProtocolError):
        leave_one_campaign_eval([camps[0], clone], benign, n_per_class=40, hyperparams=HP)


def test_false_positive_eval(model):
    _, holdout = synth_generate(SynthConfig(n_troll=1, n_benign=200, seed=23, benign_name="holdout"))
    assert false_positive_eval(model, holdout) <= 0.02
    trained_neg = [a for a in model.training_ids if a.startswith("benign")]
    overlap = corpus([account(trained_neg[0], ["hi"])], "benign")
    with pytest.raises(DataError):
        false_positive_eval(model, overlap)
    assert false_positive_eval(model, corpus([], "benign", name="none")) == 0.0


def test_detect_in_wild(model):
    plain = corpus([account("w1", ["hello"]), account("w2", ["there"])], "unlabeled")
    rep = detect_in_wild(model, plain, prefilter="fake_source_users")
    assert (rep.candidate_count, rep.flagged, rep.flag_rate) == (0, (), 0.0)

    once = account("w3", [tweet("hi", tid="1"), tweet("yo", client="Twitter for  Android", tid="2")])
    trolls, _ = synth_generate(SynthConfig(n_troll=15, n_benign=1, seed=24))
    mixed = corpus([*plain.accounts, once, *trolls.accounts], "unlabeled")
    rep = detect_in_wild(model, mixed)
    assert "w3" in rep.scores
    assert rep.candidate_count == 1 + sum(uses_fake_source(a) for a in trolls)
    assert set(rep.flagged) <= set(rep.scores)
    by_id = {a.account_id: a for a in mixed}
    assert all(uses_fake_source(by_id[a]) for a in rep.flagged)
    assert list(rep.flagged) == sorted(rep.flagged)
    assert detect_in_wild(model, mixed) == rep
    every = detect_in_wild(model, mixed, prefilter="all")
    assert every.candidate_count == len(mixed)
    with pytest.raises(DataError):
        detect_in_wild(model, trolls)
