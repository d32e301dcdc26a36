import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import account, corpus, tweet, write_campaign_csv
from trolltrace.corpus import (
    CSV_REQUIRED,
    EmptyCorpusError,
    SchemaError,
    decode_client_name,
    is_campaign_name,
    load_any,
    merge_corpora,
    parse_campaign_csv,
    parse_sample_jsonl,
    parse_timestamp,
    read_corpus,
    write_corpus,
)


@pytest.mark.parametrize(
    "raw, expected",
    [
        ('<a href="http://x.y">Twitter for iPhone</a>', "Twitter for iPhone"),
        ("Twitter Web Client", "Twitter Web Client"),
        ('<a href="h">Twitter for  Android</a>', "Twitter for  Android"),
        ('<a href="h" rel="nofollow">AT&amp;T &lt;3 &quot;x&quot; &#65;</a>', 'AT&T <3 "x" A'),
        ('<a href="h">  HTC Peep</a>', "  HTC Peep"),
        ("  spaced  ", "  spaced  "),
    ],
)
def test_decode_client_name(raw, expected):
    assert decode_client_name(raw) == expected


def test_parse_timestamp_formats():
    assert parse_timestamp("1970-01-01 00:01") == 60
    assert parse_timestamp("2019-01-01 10:00") == 1546336800
    assert parse_timestamp("2019-01-01 10:00:30") == 1546336830
    assert parse_timestamp("Tue Jan 01 10:00:00 +0000 2019") == 1546336800
    assert parse_timestamp("Tue, 01 Jan 2019 12:00:00 +0200") == 1546336800
    assert parse_timestamp("2019-01-01T10:00:00Z") == 1546336800
    assert parse_timestamp("1546336800") == 1546336800
    assert parse_timestamp("1546336800000") == 1546336800
    for bad in ("", "2019-13-99", "yesterday"):
        with pytest.raises(ValueError):
            parse_timestamp(bad)


def test_campaign_name_convention():
    assert is_campaign_name("2018oct_ira")
    assert is_campaign_name("2020mar_honduras2")
    assert not is_campaign_name("benign_sample")


def test_csv_groups_tweets_by_user(tmp_path):
    p = write_campaign_csv(tmp_path / "2019jan_testland.csv", [
        {"tweetid": "1", "tweet_time": "2019-01-02 10:00"},
        {"tweetid": "2", "tweet_time": "2019-01-01 10:00", "is_retweet": "true"},
    ])
    c = parse_campaign_csv(p)
    assert len(c) == 1 and c.label == "troll"
    a = c.accounts[0]
    assert [t.tweet_id for t in a.tweets] == ["2", "1"]  # sorted by time
    assert a.tweets[0].is_retweet and not a.tweets[1].is_retweet
    assert a.campaign == "2019jan_testland" and c.name == "2019jan_testland"
    assert all(t.account_id == a.account_id for t in a.tweets)


def test_csv_rt_prefix_marks_retweet_and_spacing_kept(tmp_path):
    p = write_campaign_csv(tmp_path / "d.csv", [
        {"tweet_text": "RT @x: copied", "tweet_client_name": "Twitter for  Android"},
        {"tweetid": "2", "tweet_text": "rt @x lowercase", "tweet_client_name": " Twitter for iOS"},
    ])
    a = parse_campaign_csv(p).accounts[0]
    by_id = {t.tweet_id: t for t in a.tweets}
    assert by_id["1"].is_retweet and not by_id["2"].is_retweet
    assert by_id["1"].client_name == "Twitter for  Android"
    assert by_id["2"].client_name == " Twitter for iOS"


def test_csv_bad_timestamp_skipped_and_counted(tmp_path):
    p = write_campaign_csv(tmp_path / "d.csv", [
        {"tweetid": "1"},
        {"tweetid": "2", "tweet_time": "2019-13-99"},
    ])
    c = parse_campaign_csv(p)
    assert c.skipped == 1
    assert len(c.accounts[0].tweets) == 1


def test_csv_missing_column_named(tmp_path):
    cols = [c for c in CSV_REQUIRED if c != "tweet_client_name"]
    p = write_campaign_csv(tmp_path / "d.csv", [{}], columns=cols)
    with pytest.raises(SchemaError, match="tweet_client_name"):
        parse_campaign_csv(p)


def test_csv_extra_columns_ignored(tmp_path):
    p = write_campaign_csv(tmp_path / "d.csv", [{"junk": "x"}], columns=(*CSV_REQUIRED, "junk"))
    assert len(parse_campaign_csv(p)) == 1


def test_csv_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(EmptyCorpusError):
        parse_campaign_csv(p)


def _tw(uid, tid, text="hi", source='<a href="h">Twitter for iPhone</a>', **extra):
    obj = {
        "id_str": tid,
        "created_at": "Tue Jan 01 10:00:00 +0000 2019",
        "text": text,
        "source": source,
        "lang": "en",
        "user": {"id_str": uid, "screen_name": "s" + uid, "lang": "en", "followers_count": 3,
                 "friends_count": 4, "created_at": "Mon Jan 01 00:00:00 +0000 2018", "description": "d"},
    }
    obj.update(extra)
    return json.dumps(obj)


def test_jsonl_groups_users_and_decodes_source(tmp_path):
    p = tmp_path / "sample.jsonl"
    p.write_text("\n".join([
        _tw("1", "10"),
        _tw("2", "11", source='<a href="h">dlvr.it</a>'),
        _tw("1", "12", retweeted_status={"id": 9}),
    ]) + "\n")
    c = parse_sample_jsonl(p)
    assert len(c) == 2 and c.label == "benign"
    by_id = {a.account_id: a for a in c}
    assert by_id["2"].tweets[0].client_name == "dlvr.it"
    assert [t.is_retweet for t in by_id["1"].tweets] == [False, True]
    assert by_id["1"].followers == 3 and by_id["1"].following == 4


def test_jsonl_truncated_line_skipped(tmp_path):
    p = tmp_path / "sample.jsonl"
    p.write_text(_tw("1", "10") + "\n" + _tw("2", "11")[:40] + "\n")
    c = parse_sample_jsonl(p)
    assert len(c) == 1 and c.skipped == 1


def test_jsonl_no_valid_lines(tmp_path):
    p = tmp_path / "sample.jsonl"
    p.write_text("{not json\n")
    with pytest.raises(EmptyCorpusError):
        parse_sample_jsonl(p)


def test_canonical_round_trip(tmp_path):
    c = corpus([
        account("a", [tweet("x  y", 5, client="Twitter for  Android", aid="a", tid="1"),
                      tweet("RT @b: z", 3, rt=True, aid="a", tid="2")], desc="é ü", campaign="2018oct_ira"),
        account("b", [], lang="ar"),
    ], label="troll")
    p = tmp_path / "c.jsonl"
    write_corpus(c, p)
    back = read_corpus(p)
    assert back.accounts == c.accounts
    assert back.label == "troll"
    # writing again is byte-stable
    p2 = tmp_path / "c2.jsonl"
    write_corpus(back, p2)
    assert p.read_bytes() == p2.read_bytes()
    assert load_any(p).accounts == c.accounts


def test_csv_round_trip_through_canonical(tmp_path):
    p = write_campaign_csv(tmp_path / "d.csv", [
        {"userid": "u1", "tweetid": "1", "tweet_text": "a\nb, \"quoted\""},
        {"userid": "u2", "tweetid": "2", "tweet_client_name": "  HTC Peep"},
    ])
    c = parse_campaign_csv(p)
    out = tmp_path / "c.jsonl"
    write_corpus(c, out)
    assert read_corpus(out).accounts == c.accounts


def _shards():
    a1 = account("a", [tweet("one", 1, aid="a", tid="1")], followers=1)
    a1b = account("a", [tweet("two", 2, aid="a", tid="2")], followers=99)
    b = account("b", [tweet("three", 3, aid="b", tid="3")])
    return corpus([a1]), corpus([a1b, b]), corpus([account("c", [tweet("four", 0, aid="c", tid="4")])])


def test_merge_associative_and_leftmost_metadata():
    x, y, z = _shards()
    left = merge_corpora(merge_corpora(x, y), z)
    right = merge_corpora(x, merge_corpora(y, z))
    assert left.accounts == right.accounts
    a = {acc.account_id: acc for acc in left}["a"]
    assert a.followers == 1
    assert [t.tweet_id for t in a.tweets] == ["1", "2"]
    assert merge_corpora(x, x).accounts == x.accounts


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2**31), min_size=1, max_size=20))
def test_tweets_sorted_after_ingest(tmp_path_factory, times):
    p = tmp_path_factory.mktemp("csv") / "d.csv"
    write_campaign_csv(p, [{"tweetid": str(i), "tweet_time": str(t)} for i, t in enumerate(times)])
    ts = [t.timestamp for t in parse_campaign_csv(p).accounts[0].tweets]
    assert ts == sorted(ts)


def test_duplicate_account_ids_rejected():
    with pytest.raises(ValueError):
        corpus([account("a"), account("a")])
