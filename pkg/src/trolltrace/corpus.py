"""Ingest campaign CSV dumps and 1%-sample JSONL into accounts and tweets.

Both public formats end up in the same in-memory model (:class:`Corpus` of
:class:`Account` of :class:`Tweet`) and can be written to a canonical JSONL
file with one account record per line.
"""
from __future__ import annotations

import csv
import html
import json
import logging
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

LABELS = ("troll", "benign", "unlabeled")

CSV_REQUIRED = (
    "userid",
    "user_screen_name",
    "user_profile_description",
    "account_creation_date",
    "account_language",
    "follower_count",
    "following_count",
    "tweetid",
    "tweet_text",
    "tweet_time",
    "tweet_client_name",
    "tweet_language",
    "is_retweet",
)

_ANCHOR = re.compile(r"^\s*<a\b[^>]*>(.*)</a>\s*$", re.DOTALL | re.IGNORECASE)
_CAMPAIGN_NAME = re.compile(r"^\d{4}[a-z]{3}_[a-z]+\d*$")
_TRUE = {"true", "1", "yes", "t", "y"}


class DataError(ValueError):
    """Input data could not be turned into a corpus."""


class SchemaError(DataError):
    pass


class EmptyCorpusError(DataError):
    pass


@dataclass(frozen=True)
class Tweet:
    tweet_id: str
    account_id: str
    text: str
    timestamp: int
    client_name: str
    is_retweet: bool
    language: str = ""

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp for tweet {self.tweet_id}")


@dataclass(frozen=True)
class Account:
    account_id: str
    screen_name: str = ""
    description: str = ""
    account_language: str = ""
    description_language: str = ""
    followers: int = 0
    following: int = 0
    creation_time: int = 0
    campaign: str = ""
    tweets: tuple[Tweet, ...] = ()

    def __post_init__(self):
        if self.followers < 0 or self.following < 0:
            raise ValueError(f"negative follower counts for account {self.account_id}")
        for t in self.tweets:
            if t.account_id != self.account_id:
                raise ValueError(f"tweet {t.tweet_id} does not belong to account {self.account_id}")


@dataclass(frozen=True)
class Corpus:
    accounts: tuple[Account, ...]
    label: str = "unlabeled"
    source_path: str = ""
    name: str = ""
    skipped: int = 0

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown corpus label {self.label!r}")
        ids = [a.account_id for a in self.accounts]
        if len(set(ids)) != len(ids):
            raise ValueError("account ids must be unique within a corpus")
        if not self.name:
            object.__setattr__(self, "name", _default_name(self))

    def __len__(self):
        return len(self.accounts)

    def __iter__(self) -> Iterator[Account]:
        return iter(self.accounts)

    @property
    def account_ids(self) -> set[str]:
        return {a.account_id for a in self.accounts}

    def tweets(self) -> Iterator[Tweet]:
        for account in self.accounts:
            yield from account.tweets

    def relabel(self, label: str) -> "Corpus":
        return replace(self, label=label)


def _default_name(corpus: Corpus) -> str:
    campaigns = {a.campaign for a in corpus.accounts if a.campaign}
    if len(campaigns) == 1:
        return campaigns.pop()
    if corpus.source_path:
        stem = Path(corpus.source_path).name
        for suffix in (".jsonl", ".csv", ".json"):
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
        return stem
    return corpus.label


def is_campaign_name(name: str) -> bool:
    """True for names of the form ``{year}{month}_{country}{variant}``, e.g. ``2018oct_ira``."""
    return bool(_CAMPAIGN_NAME.match(name))


def decode_client_name(raw_source: str) -> str:
    """Return the visible text of an HTML anchor source field.

    Plain strings pass through untouched. Whitespace inside the anchor is kept
    verbatim because impersonated clients differ from real ones only by spacing.
    """
    m = _ANCHOR.match(raw_source)
    if not m:
        return raw_source
    return html.unescape(m.group(1))


def parse_timestamp(value: str) -> int:
    """Parse any of the supported timestamp formats into UTC epoch seconds.

    Raises ValueError when nothing matches.
    """
    value = value.strip()
    if not value:
        raise ValueError("empty timestamp")
    if value.isdigit():
        n = int(value)
        return n // 1000 if n > 10**11 else n
    for fmt in ("%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d", "%a %b %d %H:%M:%S %z %Y"):
        try:
            dt = datetime.strptime(value, fmt)
            break
        except ValueError:
            continue
    else:
        try:
            dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError:
            try:
                dt = parsedate_to_datetime(value)
            except (TypeError, ValueError, IndexError):
                raise ValueError(f"unparseable timestamp {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = int(dt.timestamp())
    if ts < 0:
        raise ValueError(f"timestamp before epoch: {value!r}")
    return ts


def _is_retweet(flag, text: str) -> bool:
    if isinstance(flag, str):
        flag = flag.strip().lower() in _TRUE
    return bool(flag) or text.startswith("RT @")


def _count(value) -> int:
    if value is None or value == "":
        return 0
    return max(0, int(float(value)))


class _AccountBuilder:
    """Mutable accumulator used while streaming rows; frozen into an Account at the end."""

    def __init__(self, **meta):
        self.meta = meta
        self.tweets: list[Tweet] = []

    def build(self) -> Account:
        tweets = tuple(sorted(self.tweets, key=lambda t: (t.timestamp, t.tweet_id)))
        return Account(tweets=tweets, **self.meta)


def _finish(builders: dict[str, _AccountBuilder], label: str, path, skipped: int) -> Corpus:
    if not builders:
        raise EmptyCorpusError(f"no usable records in {path}")
    accounts = tuple(b.build() for b in builders.values())
    return Corpus(accounts=accounts, label=label, source_path=str(path), skipped=skipped)


def parse_campaign_csv(path, label: str = "troll", campaign: str = "") -> Corpus:
    """Read a transparency-style CSV dump; one account per distinct ``userid``.

    Rows whose tweet or creation time cannot be parsed are skipped and counted
    in ``Corpus.skipped``. Extra columns are ignored.
    """
    path = Path(path)
    if not campaign:
        stem = path.name.split(".")[0]
        campaign = stem if is_campaign_name(stem) else ""
    builders: dict[str, _AccountBuilder] = {}
    skipped = 0
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise EmptyCorpusError(f"{path} is empty")
        missing = [c for c in CSV_REQUIRED if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing required column {missing[0]!r}")
        for row in reader:
            try:
                ts = parse_timestamp(row["tweet_time"] or "")
                created = parse_timestamp(row["account_creation_date"] or "")
                followers = _count(row["follower_count"])
                following = _count(row["following_count"])
            except ValueError:
                skipped += 1
                continue
            uid = row["userid"]
            b = builders.get(uid)
            if b is None:
                account_lang = row["account_language"] or ""
                b = builders[uid] = _AccountBuilder(
                    account_id=uid,
                    screen_name=row["user_screen_name"] or "",
                    description=row["user_profile_description"] or "",
                    account_language=account_lang,
                    description_language=row.get("description_language") or "",
                    followers=followers,
                    following=following,
                    creation_time=created,
                    campaign=campaign,
                )
            text = row["tweet_text"] or ""
            b.tweets.append(
                Tweet(
                    tweet_id=row["tweetid"],
                    account_id=uid,
                    text=text,
                    timestamp=ts,
                    client_name=decode_client_name(row["tweet_client_name"] or ""),
                    is_retweet=_is_retweet(row["is_retweet"], text),
                    language=row["tweet_language"] or "",
                )
            )
    if skipped:
        log.warning("%s: skipped %d rows with unparseable timestamps", path, skipped)
    return _finish(builders, label, path, skipped)


def _tweet_text(obj: dict) -> str:
    ext = obj.get("extended_tweet")
    if isinstance(ext, dict) and ext.get("full_text"):
        return ext["full_text"]
    return obj.get("full_text") or obj.get("text") or ""


def parse_sample_jsonl(path, label: str = "benign") -> Corpus:
    """Read v1.1-style tweet objects (one per line) from a 1% sample dump.

    Malformed lines, lines without a user object and deletion notices are
    skipped and counted.
    """
    path = Path(path)
    builders: dict[str, _AccountBuilder] = {}
    skipped = 0
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                user = obj["user"]
                uid = str(user.get("id_str") or user["id"])
                text = _tweet_text(obj)
                if "timestamp_ms" in obj:
                    ts = int(obj["timestamp_ms"]) // 1000
                else:
                    ts = parse_timestamp(obj["created_at"])
                tweet_id = str(obj.get("id_str") or obj["id"])
            except (ValueError, KeyError, TypeError):
                skipped += 1
                continue
            b = builders.get(uid)
            if b is None:
                try:
                    created = parse_timestamp(user.get("created_at") or "0")
                except ValueError:
                    created = 0
                b = builders[uid] = _AccountBuilder(
                    account_id=uid,
                    screen_name=user.get("screen_name") or "",
                    description=user.get("description") or "",
                    account_language=user.get("lang") or "",
                    description_language="",
                    followers=_count(user.get("followers_count")),
                    following=_count(user.get("friends_count")),
                    creation_time=created,
                )
            b.tweets.append(
                Tweet(
                    tweet_id=tweet_id,
                    account_id=uid,
                    text=text,
                    timestamp=ts,
                    client_name=decode_client_name(obj.get("source") or ""),
                    is_retweet=_is_retweet("retweeted_status" in obj, text),
                    language=obj.get("lang") or "",
                )
            )
    if skipped:
        log.warning("%s: skipped %d malformed lines", path, skipped)
    return _finish(builders, label, path, skipped)


def merge_corpora(*corpora: Corpus) -> Corpus:
    """Combine shards of one dump. Account metadata comes from the leftmost shard
    that saw the account; tweets are unioned and re-sorted, so the merge is
    associative."""
    if not corpora:
        raise EmptyCorpusError("nothing to merge")
    builders: dict[str, _AccountBuilder] = {}
    for c in corpora:
        for a in c.accounts:
            b = builders.get(a.account_id)
            if b is None:
                meta = {k: getattr(a, k) for k in _META_FIELDS}
                b = builders[a.account_id] = _AccountBuilder(**meta)
            seen = {t.tweet_id for t in b.tweets}
            # overlapping shards repeat tweets; the first copy wins
            b.tweets.extend(t for t in a.tweets if t.tweet_id not in seen)
    first = corpora[0]
    skipped = sum(c.skipped for c in corpora)
    return Corpus(
        accounts=tuple(b.build() for b in builders.values()),
        label=first.label,
        source_path=first.source_path,
        name=first.name,
        skipped=skipped,
    )


_META_FIELDS = (
    "account_id",
    "screen_name",
    "description",
    "account_language",
    "description_language",
    "followers",
    "following",
    "creation_time",
    "campaign",
)
_TWEET_FIELDS = ("tweet_id", "text", "timestamp", "client_name", "is_retweet", "language")


def account_to_record(account: Account, label: str) -> dict:
    rec = {k: getattr(account, k) for k in _META_FIELDS}
    rec["label"] = label
    rec["tweets"] = [{k: getattr(t, k) for k in _TWEET_FIELDS} for t in account.tweets]
    return rec


def account_from_record(rec: dict) -> Account:
    aid = rec["account_id"]
    tweets = tuple(
        Tweet(account_id=aid, **{k: t[k] for k in _TWEET_FIELDS}) for t in rec.get("tweets", ())
    )
    tweets = tuple(sorted(tweets, key=lambda t: (t.timestamp, t.tweet_id)))
    return Account(tweets=tweets, **{k: rec[k] for k in _META_FIELDS})


def dump_records(corpus: Corpus) -> Iterable[str]:
    for a in corpus.accounts:
        yield json.dumps(account_to_record(a, corpus.label), ensure_ascii=False)


def write_corpus(corpus: Corpus, path) -> None:
    """Write the canonical account-JSONL file."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in dump_records(corpus):
            f.write(line)
            f.write("\n")


def read_corpus(path, label: str | None = None, name: str = "") -> Corpus:
    """Read a canonical account-JSONL file written by :func:`write_corpus`."""
    path = Path(path)
    accounts = []
    labels = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                accounts.append(account_from_record(rec))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad account record ({exc})") from None
            labels.add(rec.get("label", "unlabeled"))
    if not accounts:
        raise EmptyCorpusError(f"no accounts in {path}")
    if label is None:
        label = labels.pop() if len(labels) == 1 else "unlabeled"
    return Corpus(accounts=tuple(accounts), label=label, source_path=str(path), name=name)


def load_any(path, fmt: str | None = None, label: str | None = None) -> Corpus:
    """Dispatch on format: ``csv`` (transparency dump), ``jsonl`` (1% sample)
    or ``accounts`` (canonical)."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix == ".csv" else "accounts"
    if fmt == "csv":
        return parse_campaign_csv(path, label=label or "troll")
    if fmt == "jsonl":
        return parse_sample_jsonl(path, label=label or "benign")
    if fmt == "accounts":
        return read_corpus(path, label=label)
    raise ValueError(f"unknown input format {fmt!r}")
