from .models import (
    ALGORITHMS,
    ModelError,
    TrainedModel,
    gini_importance,
    load_model,
    predict,
    resolve_algorithm,
    save_model,
    train,
)
from .validation import (
    EvalReport,
    Metrics,
    ablate_components,
    compute_metrics,
    cross_validate,
    restrict,
    stratified_folds,
)

__all__ = [
    "ALGORITHMS",
    "EvalReport",
    "Metrics",
    "ModelError",
    "TrainedModel",
    "ablate_components",
    "compute_metrics",
    "cross_validate",
    "gini_importance",
    "load_model",
    "predict",
    "resolve_algorithm",
    "restrict",
    "save_model",
    "stratified_folds",
    "train",
]
