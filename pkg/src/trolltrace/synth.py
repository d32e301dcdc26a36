"""Seeded generator of troll and benign account corpora.

Real campaign dumps are large and access-restricted, so the pipeline is
exercised end to end on synthetic populations whose behaviour is controlled
by a handful of knobs: share of tweets from scheduling apps and from
impersonated clients, retweet share, reuse of a shared copypasta pool,
concentration of posting hours in an 8-hour office shift, mention rate and
tweet verbosity.

Output corpora use the same model as parsed dumps and can be written to the
canonical account-JSONL format, so every downstream stage runs unchanged.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .corpus import Account, Corpus, Tweet

REGULAR_CLIENTS = (
    "Twitter for Android",
    "Twitter for iPhone",
    "Twitter Web Client",
    "Twitter Web App",
    "Twitter for iPad",
)
REGULAR_WEIGHTS = (0.35, 0.35, 0.12, 0.12, 0.06)
SCHEDULING_CLIENTS = ("IFTTT", "TweetDeck", "dlvr.it", "Hootsuite", "Twibble", "SocialOomph", "Zapier.com")
FAKE_CLIENTS = (
    "Twitter for  Android",
    "Twitter for  iPad",
    "hootsuite",
    " Twitter for iOS",
    "  HTC Peep",
    "   Instagram",
    "Twitter for iphons",
    "Twidere for Android #5",
)
OTHER_CLIENTS = ("Instagram", "Facebook", "Foursquare", "LinkedIn", "WordPress.com")

LANGUAGES = ("en", "es", "ar", "fr", "ru", "pt", "tr", "fa", "id", "de")
LANGUAGE_WEIGHTS = (0.40, 0.14, 0.12, 0.07, 0.07, 0.06, 0.05, 0.04, 0.03, 0.02)

_EVERYDAY = (
    "coffee morning today weekend game music friends family dinner weather rain sun "
    "movie show book work school class team win lost happy tired home city trip "
    "photo night party birthday love dog cat food pizza traffic bus train beach "
    "summer winter holiday song video phone new old good great nice fun late early "
    "watching reading playing cooking waiting thinking finally again tonight tomorrow"
).split()
_FILLERS = ("the", "a", "my", "and", "to", "with", "for", "is", "was", "so", "just", "really", "at", "in", "of")
_AGENDA = (
    "nation government truth people freedom election corruption media enemy leaders "
    "sovereignty justice security victory resistance propaganda alliance economy crisis "
    "sanctions protest patriots independence regime campaign history unity betrayal "
    "revolution prosperity"
).split()
_ADVICE_OPENERS = (
    "When a friend does something wrong,",
    "Never let anyone tell you",
    "The best way to move forward is",
    "Sometimes the smallest step",
    "If you want to be happy,",
    "Remember that every morning",
    "Real strength means",
    "Do not wait for the perfect moment,",
)

OFFICE_HOURS = 8
# diffuse daily activity profile for ordinary users, peaking in the evening (UTC)
_DIURNAL = np.array(
    [3, 2, 1.5, 1, 1, 1, 1.5, 2.5, 3.5, 4, 4.5, 5, 5.5, 5.5, 5, 5, 5.5, 6, 6.5, 7, 7, 6.5, 5.5, 4]
)
_DIURNAL = _DIURNAL / _DIURNAL.sum()

_EPOCH_START = 1451606400  # 2016-01-01
_EPOCH_END = 1577836800  # 2020-01-01


@dataclass(frozen=True)
class Behavior:
    scheduled_fraction: float
    fake_source_fraction: float
    retweet_fraction: float
    copypasta_fraction: float
    hour_concentration: float
    mention_intensity: float
    verbosity: float
    rt_prefix: bool = True

    def __post_init__(self):
        for name in ("scheduled_fraction", "fake_source_fraction", "retweet_fraction",
                     "copypasta_fraction", "hour_concentration"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.scheduled_fraction + self.fake_source_fraction > 1.0:
            raise ValueError("scheduled_fraction + fake_source_fraction exceeds 1")
        if self.mention_intensity < 0 or self.verbosity < 1:
            raise ValueError("mention_intensity must be >= 0 and verbosity >= 1")


TROLL_DEFAULT = Behavior(
    scheduled_fraction=0.30,
    fake_source_fraction=0.25,
    retweet_fraction=0.55,
    copypasta_fraction=0.5,
    hour_concentration=0.85,
    mention_intensity=2.0,
    verbosity=15.0,
)
BENIGN_DEFAULT = Behavior(
    scheduled_fraction=0.03,
    fake_source_fraction=0.0,
    retweet_fraction=0.25,
    copypasta_fraction=0.0,
    hour_concentration=0.0,
    mention_intensity=0.6,
    verbosity=11.0,
)


@dataclass(frozen=True)
class SynthConfig:
    n_troll: int = 500
    n_benign: int = 500
    seed: int = 0
    troll: Behavior = TROLL_DEFAULT
    benign: Behavior = BENIGN_DEFAULT
    copypasta_pool_size: int = 40
    office_start_hour: int = 6
    tweets_per_account: tuple[int, int] = (10, 40)
    campaign: str = "2020jan_synth"
    benign_name: str = "benign"
    n_campaigns: int = 1

    def __post_init__(self):
        if self.n_troll < 1 or self.n_benign < 1:
            raise ValueError("n_troll and n_benign must be at least 1")
        lo, hi = self.tweets_per_account
        if not 0 <= lo <= hi:
            raise ValueError("tweets_per_account must be an ordered (min, max) pair")
        if self.copypasta_pool_size < 1:
            raise ValueError("copypasta_pool_size must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        for key in ("troll", "benign"):
            if key in d and isinstance(d[key], dict):
                base = TROLL_DEFAULT if key == "troll" else BENIGN_DEFAULT
                d[key] = replace(base, **d[key])
        if "tweets_per_account" in d:
            d["tweets_per_account"] = tuple(d["tweets_per_account"])
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SynthConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)


def _stable_key(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


def copypasta_pool(size: int) -> list[str]:
    """Shared reusable messages. Depends only on ``size`` so that every
    synthetic campaign draws from the same pool."""
    rng = np.random.default_rng([0xC0FFEE, size])
    pool = []
    for i in range(size):
        if i % 2 == 0:
            opener = _ADVICE_OPENERS[rng.integers(len(_ADVICE_OPENERS))]
            words = rng.choice(_EVERYDAY, size=int(rng.integers(5, 10)))
            pool.append(f"{opener} {' '.join(words)}.")
        else:
            words = rng.choice(_AGENDA, size=int(rng.integers(8, 16)))
            pool.append(" ".join(words).capitalize() + "!")
    return pool


def _organic_text(rng, n_words: int) -> str:
    words = []
    for _ in range(n_words):
        if rng.random() < 0.35:
            words.append(_FILLERS[rng.integers(len(_FILLERS))])
        else:
            words.append(_EVERYDAY[rng.integers(len(_EVERYDAY))])
    text = " ".join(words)
    if n_words > 8 and rng.random() < 0.5:
        cut = n_words // 2
        text = " ".join(words[:cut]) + ". " + " ".join(words[cut:]).capitalize()
    return text.capitalize() + ("!" if rng.random() < 0.2 else ".")


def _client(rng, b: Behavior) -> str:
    u = rng.random()
    if u < b.fake_source_fraction:
        return FAKE_CLIENTS[rng.integers(len(FAKE_CLIENTS))]
    u -= b.fake_source_fraction
    if u < b.scheduled_fraction:
        return SCHEDULING_CLIENTS[rng.integers(len(SCHEDULING_CLIENTS))]
    if rng.random() < 0.08:
        return OTHER_CLIENTS[rng.integers(len(OTHER_CLIENTS))]
    return REGULAR_CLIENTS[rng.choice(len(REGULAR_CLIENTS), p=REGULAR_WEIGHTS)]


def _hour(rng, b: Behavior, office_start: int) -> int:
    if rng.random() < b.hour_concentration:
        return (office_start + int(rng.integers(OFFICE_HOURS))) % 24
    return int(rng.choice(24, p=_DIURNAL))


def _account(rng, account_id: str, b: Behavior, cfg: SynthConfig, pool: list[str], campaign: str) -> Account:
    created = int(rng.integers(1230768000, _EPOCH_START))  # 2009..2016
    lang = LANGUAGES[rng.choice(len(LANGUAGES), p=LANGUAGE_WEIGHTS)]
    desc_words = rng.choice(_EVERYDAY, size=int(rng.integers(0, 12)))
    lo, hi = cfg.tweets_per_account
    n_tweets = int(rng.integers(lo, hi + 1))
    tweets = []
    for j in range(n_tweets):
        day = int(rng.integers(_EPOCH_START // 86400, _EPOCH_END // 86400))
        ts = day * 86400 + _hour(rng, b, cfg.office_start_hour) * 3600 + int(rng.integers(3600))
        n_words = max(1, int(rng.poisson(b.verbosity)))
        if rng.random() < b.copypasta_fraction:
            body = pool[rng.integers(len(pool))]
        else:
            body = _organic_text(rng, n_words)
        n_mentions = int(rng.poisson(b.mention_intensity))
        if n_mentions:
            handles = " ".join(f"@user{int(rng.integers(10_000))}" for _ in range(n_mentions))
            body = f"{handles} {body}"
        is_rt = bool(rng.random() < b.retweet_fraction)
        if is_rt and b.rt_prefix:
            body = f"RT @src{int(rng.integers(1000))}: {body}"
        tweets.append(
            Tweet(
                tweet_id=f"{account_id}-{j:04d}",
                account_id=account_id,
                text=body,
                timestamp=ts,
                client_name=_client(rng, b),
                is_retweet=is_rt,
                language=lang,
            )
        )
    tweets.sort(key=lambda t: (t.timestamp, t.tweet_id))
    return Account(
        account_id=account_id,
        screen_name=f"u{_stable_key(account_id):08x}",
        description=" ".join(desc_words),
        account_language=lang,
        description_language="",
        followers=int(rng.lognormal(5.5, 1.5)),
        following=int(rng.lognormal(5.0, 1.2)),
        creation_time=created,
        campaign=campaign,
        tweets=tuple(tweets),
    )


def _population(cfg: SynthConfig, n: int, b: Behavior, name: str, label: str, campaign: str) -> Corpus:
    pool = copypasta_pool(cfg.copypasta_pool_size)
    key = _stable_key(name)
    accounts = tuple(
        _account(np.random.default_rng([cfg.seed, key, i]), f"{name}-{i:05d}", b, cfg, pool, campaign)
        for i in range(n)
    )
    return Corpus(accounts=accounts, label=label, source_path="", name=name)


def campaign_names(cfg: SynthConfig) -> list[str]:
    return [cfg.campaign if i == 0 else f"{cfg.campaign}{i}" for i in range(cfg.n_campaigns)]


def synth_generate(config: SynthConfig) -> tuple[Corpus, Corpus]:
    """One troll campaign and one benign population."""
    trolls = _population(config, config.n_troll, config.troll, config.campaign, "troll", config.campaign)
    benign = _population(config, config.n_benign, config.benign, config.benign_name, "benign", "")
    return trolls, benign


def synth_campaigns(config: SynthConfig) -> tuple[list[Corpus], Corpus]:
    """``config.n_campaigns`` troll campaigns sharing the same knobs, plus one benign population."""
    camps = [
        _population(config, config.n_troll, config.troll, name, "troll", name)
        for name in campaign_names(config)
    ]
    benign = _population(config, config.n_benign, config.benign, config.benign_name, "benign", "")
    return camps, benign
