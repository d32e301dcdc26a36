import csv
import zlib
from dataclasses import replace
from pathlib import Path

import pytest

from trolltrace.corpus import CSV_REQUIRED, Account, Corpus, Tweet
from trolltrace.synth import SynthConfig, synth_generate

DATA = Path(__file__).parent / "data"
T0 = 1_500_000_000  # 2017-07-14 02:40 UTC


def tweet(text="hello", ts=T0, client="Twitter for iPhone", rt=False, aid="a1", tid=None, lang="en"):
    return Tweet(tid or f"{aid}-{ts}-{zlib.crc32(text.encode())}", aid, text, ts, client, rt, lang)


def account(aid="a1", tweets=(), created=T0 - 86400 * 100, lang="en", desc="", campaign="", **kw):
    tws = tuple(
        replace(t, account_id=aid) if isinstance(t, Tweet) else tweet(t, T0 + i, aid=aid, tid=f"{aid}-{i}")
        for i, t in enumerate(tweets)
    )
    tws = tuple(sorted(tws, key=lambda t: (t.timestamp, t.tweet_id)))
    return Account(aid, kw.pop("screen_name", aid), desc, lang, kw.pop("description_language", ""),
                   kw.pop("followers", 10), kw.pop("following", 20), created, campaign, tws)


def corpus(accounts, label="troll", name="toy"):
    return Corpus(tuple(accounts), label, "", name)


def write_campaign_csv(path, rows, columns=CSV_REQUIRED):
    base = {
        "userid": "u1",
        "user_screen_name": "u1name",
        "user_profile_description": "hi",
        "account_creation_date": "2015-01-01",
        "account_language": "en",
        "follower_count": "5",
        "following_count": "7",
        "tweetid": "1",
        "tweet_text": "hello",
        "tweet_time": "2019-01-01 10:00",
        "tweet_client_name": "Twitter for iPhone",
        "tweet_language": "en",
        "is_retweet": "false",
    }
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({**base, **r})
    return path


@pytest.fixture(scope="session")
def small_synth():
    """A quick troll/benign pair for tests that only need realistic inputs."""
    return synth_generate(SynthConfig(n_troll=40, n_benign=40, seed=11, tweets_per_account=(5, 15)))
