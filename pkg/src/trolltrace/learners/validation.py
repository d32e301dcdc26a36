"""Stratified k-fold evaluation, confusion-matrix metrics and per-group ablation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..features import FEATURE_GROUPS, Dataset
from .models import ModelError, resolve_algorithm, train


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    flags: tuple[str, ...] = ()


def compute_metrics(predictions, truth) -> Metrics:
    """Binary metrics with troll (1) as the positive class.

    Precision or recall with an empty denominator is reported as 0 and named
    in ``flags``.
    """
    pred = np.asarray(predictions, dtype=int)
    true = np.asarray(truth, dtype=int)
    if pred.shape != true.shape:
        raise ValueError("predictions and truth differ in length")
    if pred.size == 0:
        raise ValueError("no predictions to score")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    flags = []
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        flags.append("precision_undefined")
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        flags.append("recall_undefined")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics((tp + tn) / pred.size, precision, recall, f1, tp, fp, fn, tn, tuple(flags))


@dataclass(frozen=True)
class EvalReport:
    algorithm: str
    folds: tuple[Metrics, ...]
    aggregate: Metrics
    predictions: np.ndarray = field(repr=False, compare=False, default=None)


def stratified_folds(y, k: int, seed: int) -> np.ndarray:
    """Fold id for each row. Each class is shuffled with ``seed`` and dealt
    round-robin, so per-class fold sizes differ by at most one."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=int)
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if len(members) < k:
            raise ModelError(
                f"class {cls} has {len(members)} rows, fewer than {k} folds; use a smaller fold count"
            )
        members = rng.permutation(members)
        fold[members] = np.arange(len(members)) % k
    return fold


def cross_validate(
    algorithm: str,
    dataset: Dataset,
    folds: int = 10,
    seed: int = 0,
    hyperparams: Mapping | None = None,
    threshold: float = 0.5,
) -> EvalReport:
    """Fit on k-1 folds, predict the held-out fold; aggregate metrics pool all held-out predictions."""
    algorithm = resolve_algorithm(algorithm)
    if folds < 2:
        raise ModelError("need at least 2 folds")
    fold_of = stratified_folds(dataset.y, folds, seed)
    pred = np.empty(len(dataset), dtype=int)
    per_fold = []
    for k in range(folds):
        test = np.flatnonzero(fold_of == k)
        train_idx = np.flatnonzero(fold_of != k)
        model = train(algorithm, dataset.subset(train_idx), hyperparams, seed)
        pred[test] = model.predict_labels(dataset.X[test], threshold)
        per_fold.append(compute_metrics(pred[test], dataset.y[test]))
    return EvalReport(algorithm, tuple(per_fold), compute_metrics(pred, dataset.y), pred)


def restrict(dataset: Dataset, columns: Sequence[int]) -> Dataset:
    columns = list(columns)
    return Dataset(
        dataset.X[:, columns],
        dataset.y,
        dataset.account_ids,
        dataset.provenance,
        tuple(dataset.feature_names[c] for c in columns),
    )


def ablate_components(
    dataset: Dataset,
    algorithm: str = "random_forest",
    folds: int = 10,
    seed: int = 0,
    groups: Mapping[str, Sequence[int]] = FEATURE_GROUPS,
    hyperparams: Mapping | None = None,
) -> dict[str, EvalReport]:
    """Cross-validate on each feature group alone, then on all features."""
    reports = {}
    for name, cols in groups.items():
        reports[name] = cross_validate(algorithm, restrict(dataset, cols), folds, seed, hyperparams)
    reports["all"] = cross_validate(algorithm, dataset, folds, seed, hyperparams)
    return reports
