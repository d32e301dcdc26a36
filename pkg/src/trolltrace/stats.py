"""Population statistics: two-sample KS comparison, TF-IDF contrast between
account groups, and campaign-level measurements (scheduling share, retweet
share, app usage over time, cross-corpus duplicate texts, source-count CDF).
"""
from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Account, Corpus
from .features import Dataset
from .sources import SourceCatalog, SourceClass, classify_source, default_catalog
from .stylometry import _PURE_MENTION, _is_url, _rstrip_punct, _strip_punct

# Account-level characteristics contrasted between trolls and real users.
COMPARISON_FEATURES = (
    "fraction_regular_sources",
    "cumulative_mentions_per_tweet",
    "retweet_fraction",
    "distinct_sources",
    "avg_word_count",
    "avg_unique_words",
    "avg_stopword_count",
    "avg_punctuation_count",
    "avg_word_length",
    "avg_sentence_length",
    "avg_sentence_complexity",
    "function_to_nonfunction_ratio",
)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int
    significant: bool


def ks_statistic(a, b) -> float:
    """Largest gap between the two empirical CDFs, evaluated at every pooled point."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / len(a)
    fb = np.searchsorted(b, pooled, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def kolmogorov_sf(lam: float, tol: float = 1e-12) -> float:
    """P(K > lam) for the Kolmogorov distribution, by its alternating series."""
    if lam < 0.2:
        # series converges too slowly here and the true value is 1 to double precision
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 1001):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < tol:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a, b, alpha: float = 0.01) -> KsResult:
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("KS test needs two non-empty samples")
    d = ks_statistic(a, b)
    ne = n1 * n2 / (n1 + n2)
    sq = math.sqrt(ne)
    p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
    return KsResult(d, p, n1, n2, p < alpha)


@dataclass(frozen=True)
class ComparisonRow:
    feature_name: str
    mean_troll: float
    mean_real: float
    ks: KsResult


def comparison_report(
    trolls: Dataset,
    real: Dataset,
    feature_subset: Sequence[str] = COMPARISON_FEATURES,
    alpha: float = 0.01,
) -> list[ComparisonRow]:
    if len(trolls) == 0 or len(real) == 0:
        raise ValueError("both populations must be non-empty")
    rows = []
    for name in feature_subset:
        a = trolls.column(name)
        b = real.column(name)
        rows.append(ComparisonRow(name, float(a.mean()), float(b.mean()), ks_two_sample(a, b, alpha)))
    return rows


def split_by_label(ds: Dataset) -> tuple[Dataset, Dataset]:
    """(trolls, benign) views of a dataset."""
    return ds.subset(np.flatnonzero(ds.y == 1)), ds.subset(np.flatnonzero(ds.y == 0))


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    """Aligned plain-text table."""
    header = ("feature", "trolls", "real", "KS", "p-value", "sig")
    body = [
        (
            r.feature_name,
            f"{r.mean_troll:.4g}",
            f"{r.mean_real:.4g}",
            f"{r.ks.statistic:.3f}",
            f"{r.ks.p_value:.3g}",
            "*" if r.ks.significant else "",
        )
        for r in rows
    ]
    widths = [max(len(x[i]) for x in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [header, *body]]
    return "\n".join(lines) + "\n"


# --- TF-IDF ---------------------------------------------------------------


def tfidf_tokens(text: str) -> list[str]:
    """Lowercased word tokens with URLs and mentions removed."""
    out = []
    for raw in text.split():
        if _is_url(raw) or _PURE_MENTION.match(_rstrip_punct(raw)):
            continue
        core = _strip_punct(raw).lower()
        if core:
            out.append(core)
    return out


def _documents(accounts: Sequence[Account], doc_unit: str) -> list[Counter]:
    if doc_unit == "account":
        return [Counter(tok for t in a.tweets for tok in tfidf_tokens(t.text)) for a in accounts]
    if doc_unit == "tweet":
        return [Counter(tfidf_tokens(t.text)) for a in accounts for t in a.tweets]
    raise ValueError(f"doc_unit must be 'account' or 'tweet', not {doc_unit!r}")


def tfidf_group_scores(
    group_a: Sequence[Account], group_b: Sequence[Account], doc_unit: str = "account"
) -> tuple[dict[str, float], dict[str, float]]:
    """Summed tf*idf per term for each group. tf is the raw count, idf = ln(N/df)
    over the union of both groups' documents."""
    docs_a = _documents(group_a, doc_unit)
    docs_b = _documents(group_b, doc_unit)
    n_docs = len(docs_a) + len(docs_b)
    df: Counter[str] = Counter()
    for d in docs_a + docs_b:
        df.update(d.keys())
    idf = {t: math.log(n_docs / c) for t, c in df.items()}

    def score(docs):
        s: dict[str, float] = defaultdict(float)
        for d in docs:
            for t, tf in d.items():
                s[t] += tf * idf[t]
        return dict(s)

    return score(docs_a), score(docs_b)


def _top(scores: dict[str, float], k: int) -> list[str]:
    return [t for t, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]


def tfidf_top_terms(
    group_a: Sequence[Account], group_b: Sequence[Account], k: int = 15, doc_unit: str = "account"
) -> tuple[list[str], list[str]]:
    if not group_a or not group_b:
        raise ValueError("both groups must be non-empty")
    if k < 1:
        raise ValueError("k must be at least 1")
    sa, sb = tfidf_group_scores(group_a, group_b, doc_unit)
    return _top(sa, k), _top(sb, k)


# --- campaign-level metrics -------------------------------------------------


@dataclass(frozen=True)
class CampaignMetrics:
    campaign: str
    scheduled_fraction: float
    retweet_fraction: float
    account_count: int


def campaign_metrics(corpus: Corpus, catalog: SourceCatalog | None = None) -> CampaignMetrics:
    catalog = catalog or default_catalog()
    if len(corpus) == 0:
        raise ValueError("campaign corpus is empty")
    n = sched = rt = 0
    for t in corpus.tweets():
        n += 1
        rt += t.is_retweet
        sched += classify_source(t.client_name, catalog) is SourceClass.SCHEDULING
    return CampaignMetrics(
        corpus.name,
        sched / n if n else 0.0,
        rt / n if n else 0.0,
        len(corpus),
    )


def app_usage_timeseries(
    corpora: Sequence[Corpus], app: str, bin_seconds: int
) -> dict[str, list[tuple[int, int]]]:
    """Per-corpus ``(bin_start, count)`` points for tweets posted with exactly ``app``.
    Corpora with no matching tweet map to an empty series."""
    if bin_seconds <= 0:
        raise ValueError("bin width must be positive")
    out = {}
    for c in corpora:
        counts: Counter[int] = Counter(
            (t.timestamp // bin_seconds) * bin_seconds for t in c.tweets() if t.client_name == app
        )
        out[c.name] = sorted(counts.items())
    return out


_RT_PREFIX = re.compile(r"^RT @\w+:\s*")


def normalize_text(text: str) -> str:
    text = " ".join(text.split())
    return _RT_PREFIX.sub("", text, count=1).strip()


@dataclass(frozen=True)
class SharedText:
    text: str
    corpora: frozenset[str]
    count: int


def cross_corpus_duplicates(corpora: Sequence[Corpus], min_corpora: int = 2) -> list[SharedText]:
    """Normalized texts posted in at least ``min_corpora`` distinct corpora,
    widest spread first, then most frequent."""
    if min_corpora < 2:
        raise ValueError("min_corpora must be at least 2")
    where: dict[str, set[str]] = defaultdict(set)
    counts: Counter[str] = Counter()
    for c in corpora:
        for t in c.tweets():
            key = normalize_text(t.text)
            if not key:
                continue
            where[key].add(c.name)
            counts[key] += 1
    hits = [SharedText(t, frozenset(s), counts[t]) for t, s in where.items() if len(s) >= min_corpora]
    hits.sort(key=lambda h: (-len(h.corpora), -h.count, h.text))
    return hits


def ecdf(values: Iterable[float]) -> list[tuple[float, float]]:
    """(x, F(x)) at each distinct observed value."""
    vals = sorted(values)
    if not vals:
        raise ValueError("ECDF of an empty sample")
    n = len(vals)
    out = []
    for i, v in enumerate(vals):
        if i + 1 < n and vals[i + 1] == v:
            continue
        out.append((v, (i + 1) / n))
    return out


def source_count_cdf(accounts: Sequence[Account]) -> list[tuple[int, float]]:
    return [(int(x), f) for x, f in ecdf(len({t.client_name for t in a.tweets}) for a in accounts)]
