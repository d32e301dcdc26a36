"""The 45-feature account representation and labeled datasets built from it.

Layout (1-based, as used throughout the package):

    1-10   account metadata and interaction rates
    11-34  fraction of tweets per UTC hour
    35-42  stylometry averaged over tweets
    43-45  client/source usage
"""
from __future__ import annotations

import csv
import json
import logging
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Account, Corpus, DataError, Tweet
from .sources import SourceCatalog, default_catalog, source_stats
from .stylometry import analyze_text, count_mentions

log = logging.getLogger(__name__)

FEATURE_NAMES: tuple[str, ...] = (
    "tweet_count",
    "account_age_days",
    "followers",
    "following",
    "language_code_int",
    "description_length_chars",
    "description_language_int",
    "cumulative_mentions_per_tweet",
    "average_tweet_length_chars",
    "retweet_fraction",
    *(f"hour_{h:02d}_fraction" for h in range(24)),
    "avg_word_count",
    "avg_unique_words",
    "avg_stopword_count",
    "avg_punctuation_count",
    "avg_word_length",
    "avg_sentence_length",
    "avg_sentence_complexity",
    "function_to_nonfunction_ratio",
    "distinct_sources",
    "fraction_fake_sources",
    "fraction_regular_sources",
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 45

# 0-based column slices
FEATURE_GROUPS: dict[str, tuple[int, ...]] = {
    "metadata": tuple(range(0, 10)),
    "temporal": tuple(range(10, 34)),
    "stylometry": tuple(range(34, 42)),
    "source": tuple(range(42, 45)),
}

LABEL_CODES = {"benign": 0, "troll": 1}
LABEL_NAMES = {v: k for k, v in LABEL_CODES.items()}


class NegativeAgeError(DataError):
    pass


@dataclass(frozen=True)
class LanguageTable:
    """Ordered language codes; the i-th code encodes as i+1, unknown codes as 0."""

    codes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.codes)) != len(self.codes):
            raise ValueError("language codes must be unique")
        if len(self.codes) > 31:
            raise ValueError("at most 31 language codes are supported")
        if self.codes and self.codes[0] != "en":
            raise ValueError('"en" must map to 1')
        object.__setattr__(self, "_index", {c: i + 1 for i, c in enumerate(self.codes)})

    def encode(self, code: str) -> int:
        return self._index.get(code, 0)

    @classmethod
    def default(cls) -> "LanguageTable":
        text = (resources.files("trolltrace") / "data" / "languages.json").read_text(encoding="utf-8")
        return cls(tuple(json.loads(text)["codes"]))

    @classmethod
    def load(cls, path) -> "LanguageTable":
        return cls(tuple(json.loads(Path(path).read_text(encoding="utf-8"))["codes"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({"codes": list(self.codes)}, indent=1) + "\n", encoding="utf-8")


def build_language_table(corpora: Iterable[Corpus], size: int = 31) -> LanguageTable:
    """The ``size`` most frequent account/description language codes, with
    ``en`` pinned first. Ties break alphabetically."""
    counts: Counter[str] = Counter()
    for corpus in corpora:
        for a in corpus.accounts:
            for code in (a.account_language, a.description_language or a.account_language):
                if code:
                    counts[code] += 1
    counts.pop("en", None)
    ranked = sorted(counts, key=lambda c: (-counts[c], c))
    return LanguageTable(("en", *ranked[: size - 1]))


def encode_language(code: str, table: LanguageTable) -> int:
    return table.encode(code)


def hourly_histogram(tweets: Sequence[Tweet]) -> np.ndarray:
    out = np.zeros(24)
    if not tweets:
        return out
    hours = (np.array([t.timestamp for t in tweets], dtype=np.int64) // 3600) % 24
    out[:] = np.bincount(hours, minlength=24) / len(tweets)
    return out


@dataclass(frozen=True)
class FeatureVector:
    account_id: str
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (N_FEATURES,):
            raise ValueError(f"feature vector must have {N_FEATURES} entries")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


def extract_features(
    account: Account,
    reference_time: int,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
) -> FeatureVector:
    catalog = catalog or default_catalog()
    table = table or LanguageTable.default()
    if reference_time < account.creation_time:
        raise NegativeAgeError(
            f"reference time {reference_time} precedes creation of account {account.account_id}"
        )
    v = np.zeros(N_FEATURES)
    tweets = account.tweets
    n = len(tweets)
    v[0] = n
    v[1] = (reference_time - account.creation_time) / 86400.0
    v[2] = account.followers
    v[3] = account.following
    v[4] = table.encode(account.account_language)
    v[5] = len(account.description)
    v[6] = table.encode(account.description_language or account.account_language)
    if n == 0:
        return FeatureVector(account.account_id, v)

    texts = [t.text for t in tweets]
    v[7] = sum(count_mentions(x) for x in texts) / n
    v[8] = sum(len(x) for x in texts) / n
    v[9] = sum(t.is_retweet for t in tweets) / n
    v[10:34] = hourly_histogram(tweets)

    stats = [analyze_text(x) for x in texts]
    v[34] = sum(s.word_count for s in stats) / n
    v[35] = sum(s.unique_word_count for s in stats) / n
    v[36] = sum(s.stopword_count for s in stats) / n
    v[37] = sum(s.punctuation_count for s in stats) / n
    v[38] = sum(s.mean_word_length for s in stats) / n
    v[39] = sum(s.mean_sentence_length for s in stats) / n
    v[40] = sum(s.flesch_score for s in stats) / n
    nonfunc = sum(s.non_function_word_count for s in stats)
    v[41] = sum(s.function_word_count for s in stats) / nonfunc if nonfunc else 0.0

    ss = source_stats(account, catalog)
    v[42] = ss.distinct_sources
    v[43] = ss.fraction_fake
    v[44] = ss.fraction_regular
    return FeatureVector(account.account_id, v)


def auto_reference_time(corpora: Iterable[Corpus]) -> int:
    """Latest tweet or creation timestamp seen in the corpora."""
    latest = 0
    for c in corpora:
        for a in c.accounts:
            latest = max(latest, a.creation_time, *(t.timestamp for t in a.tweets[-1:]))
    return latest


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    account_ids: list[str]
    provenance: list[str]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, len(self.feature_names))
        self.y = np.asarray(self.y, dtype=int)
        if not (len(self.X) == len(self.y) == len(self.account_ids) == len(self.provenance)):
            raise ValueError("dataset columns have inconsistent lengths")
        if not set(np.unique(self.y)) <= {0, 1}:
            raise ValueError("labels must be 0 (benign) or 1 (troll)")

    def __len__(self):
        return len(self.y)

    @property
    def labels(self) -> list[str]:
        return [LABEL_NAMES[int(v)] for v in self.y]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(
            self.X[idx],
            self.y[idx],
            [self.account_ids[i] for i in idx],
            [self.provenance[i] for i in idx],
            self.feature_names,
        )

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise KeyError(f"unknown feature {name!r}") from None

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        return cls(
            np.vstack([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            [a for p in parts for a in p.account_ids],
            [s for p in parts for s in p.provenance],
            parts[0].feature_names,
        )

    def to_csv(self, path) -> None:
        """Write the 46-column feature CSV and a ``.provenance.csv`` sidecar."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow([*self.feature_names, "label"])
            for row, lab in zip(self.X, self.labels):
                w.writerow([*(repr(float(x)) for x in row), lab])
        with open(provenance_path(path), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["account_id", "provenance"])
            w.writerows(zip(self.account_ids, self.provenance))

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        if not rows:
            raise DataError(f"{path} is empty")
        header, body = rows[0], rows[1:]
        if header[-1] != "label" or len(header) != N_FEATURES + 1:
            raise DataError(f"{path}: expected {N_FEATURES} features plus a label column")
        try:
            X = np.array([[float(x) for x in r[:-1]] for r in body]).reshape(-1, N_FEATURES)
            y = np.array([LABEL_CODES[r[-1]] for r in body], dtype=int)
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: bad row ({exc})") from None
        side = provenance_path(path)
        if side.exists():
            with open(side, newline="", encoding="utf-8") as f:
                prov = list(csv.reader(f))[1:]
            ids = [p[0] for p in prov]
            tags = [p[1] for p in prov]
        else:
            ids = [f"row{i}" for i in range(len(y))]
            tags = [""] * len(y)
        return cls(X, y, ids, tags, tuple(header[:-1]))


def provenance_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".provenance.csv")


def _featurize_one(account, reference_time, catalog, table):
    return extract_features(account, reference_time, catalog, table).values


def featurize_accounts(
    accounts: Sequence[Account],
    reference_time: int,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Feature matrix for ``accounts`` in input order; ``workers`` never changes the result."""
    catalog = catalog or default_catalog()
    table = table or LanguageTable.default()
    if not accounts:
        return np.zeros((0, N_FEATURES))
    fn = partial(_featurize_one, reference_time=reference_time, catalog=catalog, table=table)
    if workers > 1 and len(accounts) > 64:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(fn, accounts, chunksize=32))
    else:
        rows = [fn(a) for a in accounts]
    return np.vstack(rows)


def build_dataset(
    corpora: Sequence[Corpus],
    reference_time: int | None = None,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
    workers: int = 1,
) -> Dataset:
    """Featurize troll/benign corpora into one dataset. Provenance is the corpus name."""
    if reference_time is None:
        reference_time = auto_reference_time(corpora)
    parts = []
    for c in corpora:
        if c.label not in LABEL_CODES:
            raise DataError(f"corpus {c.name!r} is {c.label}; datasets need troll or benign labels")
        X = featurize_accounts(c.accounts, reference_time, catalog, table, workers)
        parts.append(
            Dataset(X, np.full(len(c), LABEL_CODES[c.label]), [a.account_id for a in c], [c.name] * len(c))
        )
    return Dataset.concat(parts)


def _sample_accounts(corpus: Corpus, n: int, rng: np.random.Generator) -> list[Account]:
    if len(corpus) == 0:
        raise DataError(f"corpus {corpus.name!r} is empty")
    ordered = sorted(corpus.accounts, key=lambda a: a.account_id)
    if n >= len(ordered):
        if n > len(ordered):
            warnings.warn(
                f"corpus {corpus.name!r} has {len(ordered)} accounts, fewer than {n}; using all",
                stacklevel=3,
            )
        return ordered
    idx = np.sort(rng.choice(len(ordered), size=n, replace=False))
    return [ordered[i] for i in idx]


def balance_sample(
    positives: Corpus,
    negatives: Corpus,
    n_per_class: int,
    seed: int,
    reference_time: int | None = None,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
) -> Dataset:
    """Draw ``n_per_class`` accounts from each corpus without replacement and
    return them featurized and shuffled. Deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    pos = _sample_accounts(positives, n_per_class, rng)
    neg = _sample_accounts(negatives, n_per_class, rng)
    if reference_time is None:
        reference_time = auto_reference_time([positives, negatives])
    X = featurize_accounts(pos + neg, reference_time, catalog, table)
    y = np.r_[np.ones(len(pos), dtype=int), np.zeros(len(neg), dtype=int)]
    ids = [a.account_id for a in pos + neg]
    prov = [positives.name] * len(pos) + [negatives.name] * len(neg)
    order = rng.permutation(len(y))
    return Dataset(X, y, ids, prov).subset(order)
