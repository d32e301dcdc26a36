"""Train, apply and persist the four account classifiers.

Every model is fully determined by ``(algorithm, data, hyperparams, seed)``.
Scores are troll probabilities-ish in [0, 1]; the label is troll iff the
score reaches the threshold (0.5 by default, ties go to troll).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..corpus import DataError
from ..features import FEATURE_NAMES, Dataset, FeatureVector, LABEL_NAMES
from . import trees as _trees

ALGORITHMS = ("knn", "decision_tree", "linear_svm", "random_forest")
ALIASES = {"rf": "random_forest", "dt": "decision_tree", "knn": "knn", "svm": "linear_svm"}

DEFAULTS: dict[str, dict] = {
    "knn": {"k": 5},
    "decision_tree": {"max_depth": None, "min_samples_leaf": 1},
    "random_forest": {"n_trees": 100, "max_features": "sqrt", "max_depth": None, "min_samples_leaf": 1},
    "linear_svm": {"C": 1.0, "epochs": 200, "batch_size": 32},
}

MAGIC = "TROLLTRACE-MODEL"
FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


def resolve_algorithm(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ModelError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return name


@dataclass
class TrainedModel:
    algorithm: str
    hyperparams: dict
    seed: int
    feature_names: tuple[str, ...]
    payload: dict
    importances: np.ndarray | None = None
    training_ids: frozenset[str] = frozenset()
    language_codes: tuple[str, ...] = ()
    catalog_hash: str = ""

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise ModelError(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        return _SCORERS[self.algorithm](self, X)

    def predict_labels(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.scores(X) >= threshold).astype(int)


# --- scaling --------------------------------------------------------------


def _fit_scaler(X):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return lo, span


def _scale(model, X):
    return (X - model.payload["scaler_min"]) / model.payload["scaler_span"]


# --- per-algorithm fit / score ---------------------------------------------


def _fit_knn(X, y, hp, seed):
    lo, span = _fit_scaler(X)
    return {"scaler_min": lo, "scaler_span": span, "X": (X - lo) / span, "y": y.copy()}


def _score_knn(model, X):
    train_X, train_y = model.payload["X"], model.payload["y"]
    k = min(int(model.hyperparams["k"]), len(train_y))
    Q = _scale(model, X)
    out = np.empty(len(Q))
    for c in range(0, len(Q), 64):
        q = Q[c : c + 64]
        d2 = ((q[:, None, :] - train_X[None, :, :]) ** 2).sum(axis=2)
        # stable sort: equidistant neighbours resolve to the lower training index
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out[c : c + 64] = train_y[nearest].mean(axis=1)
    return out


def _fit_tree(X, y, hp, seed):
    return {"trees": [_trees.Tree.fit(X, y, None, hp["min_samples_leaf"], hp["max_depth"], seed)]}


def _tree_list(model):
    return model.payload["trees"]


def _score_tree(model, X):
    return _tree_list(model)[0].predict_score(X)


def _max_features(hp, p):
    mf = hp.get("max_features", "sqrt")
    if mf == "sqrt":
        return _trees.sqrt_features(p)
    if mf in (None, "all"):
        return p
    return int(mf)


def _fit_forest(X, y, hp, seed):
    forest = _trees.fit_forest(
        X,
        y,
        n_trees=int(hp["n_trees"]),
        max_features=_max_features(hp, X.shape[1]),
        min_samples_leaf=hp["min_samples_leaf"],
        max_depth=hp["max_depth"],
        seed=seed,
    )
    return {"trees": forest}


def _score_forest(model, X):
    return _trees.forest_score(_tree_list(model), X)


def _fit_svm(X, y, hp, seed):
    """Hinge loss with L2 penalty, minibatch stochastic subgradient steps of
    size 1/(lambda*t) on min-max scaled features. The bias is carried as a
    constant input column. Returns the average of the last epoch's iterates."""
    lo, span = _fit_scaler(X)
    Z = np.hstack([(X - lo) / span, np.ones((len(X), 1))])
    s = np.where(y == 1, 1.0, -1.0)
    n, d = Z.shape
    lam = 1.0 / (float(hp["C"]) * n)
    bs = int(hp["batch_size"])
    epochs = int(hp["epochs"])
    rng = np.random.default_rng(seed)
    w = np.zeros(d)
    avg = np.zeros(d)
    n_avg = 0
    t = 0
    radius = 1.0 / np.sqrt(lam)
    for epoch in range(epochs):
        order = rng.permutation(n)
        for b0 in range(0, n, bs):
            t += 1
            batch = order[b0 : b0 + bs]
            zb, sb = Z[batch], s[batch]
            viol = sb * (zb @ w) < 1
            eta = 1.0 / (lam * t)
            w = (1 - eta * lam) * w + (eta / len(batch)) * (sb[viol] @ zb[viol])
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            if epoch == epochs - 1:
                avg += w
                n_avg += 1
    w = avg / n_avg
    return {"scaler_min": lo, "scaler_span": span, "w": w[:-1], "b": float(w[-1])}


def _score_svm(model, X):
    margin = _scale(model, X) @ model.payload["w"] + model.payload["b"]
    return 1.0 / (1.0 + np.exp(-np.clip(margin, -500, 500)))


_FITTERS = {"knn": _fit_knn, "decision_tree": _fit_tree, "random_forest": _fit_forest, "linear_svm": _fit_svm}
_SCORERS = {"knn": _score_knn, "decision_tree": _score_tree, "random_forest": _score_forest, "linear_svm": _score_svm}


def train(
    algorithm: str,
    dataset: Dataset,
    hyperparams: Mapping | None = None,
    seed: int = 0,
    language_codes=(),
    catalog_hash: str = "",
) -> TrainedModel:
    algorithm = resolve_algorithm(algorithm)
    hp = dict(DEFAULTS[algorithm])
    unknown = set(hyperparams or {}) - set(hp)
    if unknown:
        raise ModelError(f"unknown hyperparameters for {algorithm}: {sorted(unknown)}")
    hp.update(hyperparams or {})
    X, y = dataset.X, dataset.y
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise ModelError("training needs at least two rows covering both classes")
    if not np.all(np.isfinite(X)):
        raise ModelError("feature matrix contains non-finite values")
    payload = _FITTERS[algorithm](X, y, hp, seed)
    model = TrainedModel(
        algorithm=algorithm,
        hyperparams=hp,
        seed=int(seed),
        feature_names=tuple(dataset.feature_names),
        payload=payload,
        training_ids=frozenset(dataset.account_ids),
        language_codes=tuple(language_codes),
        catalog_hash=catalog_hash,
    )
    if algorithm == "random_forest":
        model.importances = _trees.forest_importance(_tree_list(model), X.shape[1])
    return model


def predict(model: TrainedModel, fv, threshold: float = 0.5) -> tuple[str, float]:
    values = fv.values if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    if values.shape != (len(model.feature_names),):
        raise ModelError(f"expected a vector of {len(model.feature_names)} features")
    score = float(model.scores(values)[0])
    return LABEL_NAMES[int(score >= threshold)], score


def gini_importance(model: TrainedModel) -> np.ndarray:
    if model.algorithm != "random_forest" or model.importances is None:
        raise ModelError("Gini importance is only defined for random forests")
    return model.importances.copy()


# --- persistence -------------------------------------------------------------


def _payload_json(payload: dict) -> dict:
    out = {}
    for k, v in payload.items():
        if k == "trees":
            v = [t.to_dict() for t in v]
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out


def _payload_from_json(doc: dict) -> dict:
    out = {}
    for k, v in doc.items():
        if k == "trees":
            v = [_trees.Tree.from_dict(d) for d in v]
        elif isinstance(v, list):
            v = np.asarray(v)
        out[k] = v
    return out


def save_model(model: TrainedModel, path) -> None:
    """Write ``MAGIC VERSION`` on the first line followed by one JSON document."""
    doc = {
        "algorithm": model.algorithm,
        "hyperparams": model.hyperparams,
        "seed": model.seed,
        "feature_names": list(model.feature_names),
        "language_codes": list(model.language_codes),
        "catalog_hash": model.catalog_hash,
        "training_ids": sorted(model.training_ids),
        "importances": None if model.importances is None else model.importances.tolist(),
        "payload": _payload_json(model.payload),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{MAGIC} {FORMAT_VERSION}\n")
        json.dump(doc, f, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        f.write("\n")


def load_model(path, expected_features=FEATURE_NAMES) -> TrainedModel:
    with open(path, encoding="utf-8") as f:
        head = f.readline().split()
        if len(head) != 2 or head[0] != MAGIC:
            raise DataError(f"{path} is not a model file")
        if int(head[1]) != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported model format version {head[1]}")
        doc = json.load(f)
    names = tuple(doc["feature_names"])
    if expected_features is not None and names != tuple(expected_features):
        raise DataError(f"{path}: model feature names do not match this build")
    imp = doc.get("importances")
    return TrainedModel(
        algorithm=doc["algorithm"],
        hyperparams=doc["hyperparams"],
        seed=doc["seed"],
        feature_names=names,
        payload=_payload_from_json(doc["payload"]),
        importances=None if imp is None else np.asarray(imp),
        training_ids=frozenset(doc.get("training_ids", ())),
        language_codes=tuple(doc.get("language_codes", ())),
        catalog_hash=doc.get("catalog_hash", ""),
    )
