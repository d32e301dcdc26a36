"""Cross-campaign transfer, false-positive estimation and in-the-wild detection."""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, DataError
from .features import (
    Dataset,
    LanguageTable,
    auto_reference_time,
    featurize_accounts,
)
from .learners.models import TrainedModel, resolve_algorithm, train
from .sources import SourceCatalog, default_catalog, uses_fake_source

PREFILTERS = ("fake_source_users", "all")


class ProtocolError(RuntimeError):
    """A training row leaked into an evaluation target set."""


@dataclass(frozen=True)
class TargetResult:
    campaign: str
    detected: int
    total: int

    @property
    def rate(self) -> float:
        return self.detected / self.total if self.total else 0.0


@dataclass(frozen=True)
class CrossCampaignReport:
    training_campaign: str
    targets: tuple[TargetResult, ...]

    @property
    def detected(self) -> int:
        return sum(t.detected for t in self.targets)

    @property
    def total(self) -> int:
        return sum(t.total for t in self.targets)

    @property
    def detection_rate(self) -> float:
        return self.detected / self.total if self.total else 0.0


@dataclass(frozen=True)
class WildReport:
    candidate_count: int
    flagged: tuple[str, ...]
    scores: Mapping[str, float]

    @property
    def flag_rate(self) -> float:
        return len(self.flagged) / self.candidate_count if self.candidate_count else 0.0


def _sample_rows(ids: Sequence[str], n: int, rng) -> np.ndarray:
    """Same draw as feature-level balanced sampling: sort by id, pick ``n`` without replacement."""
    order = np.argsort(np.asarray(ids, dtype=object), kind="stable")
    if n >= len(order):
        return order
    return order[np.sort(rng.choice(len(order), size=n, replace=False))]


def _train_and_score(job):
    (name, X_pos, ids_pos, X_neg, ids_neg, algorithm, hyperparams, seed, threshold, targets) = job
    ds = Dataset(
        np.vstack([X_pos, X_neg]),
        np.r_[np.ones(len(X_pos), dtype=int), np.zeros(len(X_neg), dtype=int)],
        list(ids_pos) + list(ids_neg),
        [name] * len(X_pos) + ["benign"] * len(X_neg),
    )
    model = train(algorithm, ds, hyperparams, seed)
    results = []
    for tname, X_t, ids_t in targets:
        if model.training_ids & set(ids_t):
            raise ProtocolError(f"target campaign {tname} shares accounts with training campaign {name}")
        detected = int(model.predict_labels(X_t, threshold).sum()) if len(X_t) else 0
        results.append(TargetResult(tname, detected, len(ids_t)))
    return CrossCampaignReport(name, tuple(results))


def leave_one_campaign_eval(
    campaigns: Sequence[Corpus],
    benign: Corpus,
    algorithm: str = "random_forest",
    n_per_class: int = 500,
    seed: int = 0,
    threshold: float = 0.5,
    hyperparams: Mapping | None = None,
    reference_time: int | None = None,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
    workers: int = 1,
) -> list[CrossCampaignReport]:
    """Train on each campaign in turn and count how many accounts of every
    other campaign are predicted troll.

    The benign negatives are one seed-sampled pool shared by every training
    run. Campaigns with fewer than two accounts are skipped as training
    sources but still count as targets. Reports follow campaign-name order.
    """
    algorithm = resolve_algorithm(algorithm)
    if len(campaigns) < 2:
        raise DataError("cross-campaign evaluation needs at least two campaigns")
    if len(benign) == 0:
        raise DataError("benign corpus is empty")
    names = [c.name for c in campaigns]
    if len(set(names)) != len(names):
        raise DataError("campaign names must be unique")
    if reference_time is None:
        reference_time = auto_reference_time(list(campaigns) + [benign])
    catalog = catalog or default_catalog()

    feats = {}
    for c in sorted(campaigns, key=lambda c: c.name):
        feats[c.name] = (
            featurize_accounts(c.accounts, reference_time, catalog, table, workers),
            [a.account_id for a in c.accounts],
        )
    neg_rng = np.random.default_rng([seed, 0])
    b_ids = [a.account_id for a in benign.accounts]
    pick = _sample_rows(b_ids, n_per_class, neg_rng)
    neg_accounts = [benign.accounts[i] for i in pick]
    X_neg = featurize_accounts(neg_accounts, reference_time, catalog, table, workers)
    ids_neg = [a.account_id for a in neg_accounts]

    jobs = []
    for i, name in enumerate(sorted(feats)):
        X_c, ids_c = feats[name]
        if len(ids_c) < 2:
            warnings.warn(f"campaign {name!r} has {len(ids_c)} account(s); skipped as a training source", stacklevel=2)
            continue
        rows = _sample_rows(ids_c, n_per_class, np.random.default_rng([seed, 1, i]))
        targets = [(t, X_t, ids_t) for t, (X_t, ids_t) in feats.items() if t != name]
        jobs.append((name, X_c[rows], [ids_c[r] for r in rows], X_neg, ids_neg,
                     algorithm, hyperparams, seed, threshold, targets))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            return list(pool.map(_train_and_score, jobs))
    return [_train_and_score(j) for j in jobs]


def false_positive_eval(
    model: TrainedModel,
    benign_holdout: Corpus,
    reference_time: int | None = None,
    catalog: SourceCatalog | None = None,
    table: LanguageTable | None = None,
    threshold: float = 0.5,
) -> float:
    """Fraction of a benign holdout the model flags as troll."""
    overlap = model.training_ids & benign_holdout.account_ids
    if overlap:
        raise DataError(
            f"holdout shares {len(overlap)} account(s) with the model's training rows, e.g. {min(overlap)}"
        )
    if len(benign_holdout) == 0:
        return 0.0
    if reference_time is None:
        reference_time = auto_reference_time([benign_holdout])
    X = featurize_accounts(benign_holdout.accounts, reference_time, catalog, table)
    return float(model.predict_labels(X, threshold).mean())


def detect_in_wild(
    model: TrainedModel,
    corpus: Corpus,
    catalog: SourceCatalog | None = None,
    prefilter: str = "fake_source_users",
    reference_time: int | None = None,
    table: LanguageTable | None = None,
    threshold: float = 0.5,
) -> WildReport:
    """Classify an unlabeled population, optionally only accounts that posted
    at least once from an impersonated client."""
    if prefilter not in PREFILTERS:
        raise ValueError(f"prefilter must be one of {PREFILTERS}")
    if corpus.label == "troll":
        raise DataError("in-the-wild detection expects an unlabeled or benign corpus")
    catalog = catalog or default_catalog()
    if prefilter == "fake_source_users":
        candidates = [a for a in corpus.accounts if uses_fake_source(a, catalog)]
    else:
        candidates = list(corpus.accounts)
    if not candidates:
        return WildReport(0, (), {})
    if reference_time is None:
        reference_time = auto_reference_time([corpus])
    X = featurize_accounts(candidates, reference_time, catalog, table)
    s = model.scores(X)
    scores = {a.account_id: float(v) for a, v in zip(candidates, s)}
    flagged = tuple(sorted(a.account_id for a, v in zip(candidates, s) if v >= threshold))
    return WildReport(len(candidates), flagged, scores)
