"""Margin-based difficulty from a teacher model's features.

Target-sample features are read from the penultimate probe of a teacher
trained on some other (source) task; one-vs-rest linear SVCs are fitted
on those features, and a sample's difficulty is the negated multiclass
margin: decision value of the true class minus the best other class.
Points far on the correct side of every boundary come out strongly
negative (easy).

The SVC fit is deterministic full-batch subgradient descent on the
L2-regularised hinge objective (Pegasos step sizes 1/(lambda * t)), with
a fixed iteration budget. The bias is not regularised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigurationError, InputError
from .model import batch_activations
from .scoring import DifficultyScores
from .training import RunRecord


@dataclass(frozen=True)
class SvcSpec:
    l2_reg: float = 1e-3
    iterations: int = 2000

    def __post_init__(self):
        if self.l2_reg <= 0:
            raise ConfigurationError(f"l2_reg must be positive, got {self.l2_reg}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be positive, got {self.iterations}")


def fit_linear_svc(
    features: np.ndarray, labels: np.ndarray, num_classes: int, spec: SvcSpec
) -> tuple[np.ndarray, np.ndarray]:
    """One-vs-rest hinge fit; returns weights (D, C) and biases (C,)."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int64)
    n, dim = x.shape
    if len(np.unique(y)) < 2:
        raise InputError("svc fit needs at least two classes in the target data")

    lam = spec.l2_reg
    weights = np.zeros((dim, num_classes))
    biases = np.zeros(num_classes)
    for c in range(num_classes):
        sign = np.where(y == c, 1.0, -1.0)
        w = np.zeros(dim)
        b = 0.0
        for t in range(1, spec.iterations + 1):
            margins = sign * (x @ w + b)
            active = margins < 1.0
            eta = 1.0 / (lam * t)
            grad_w = lam * w - (sign[active, None] * x[active]).sum(axis=0) / n
            grad_b = -float(sign[active].sum()) / n
            w = w - eta * grad_w
            b = b - eta * grad_b
        weights[:, c] = w
        biases[c] = b
    return weights, biases


def decision_values(features: np.ndarray, weights: np.ndarray, biases: np.ndarray) -> np.ndarray:
    return features @ weights + biases


def multiclass_margin(decisions: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """True-class decision value minus the best competing class."""
    n = decisions.shape[0]
    rows = np.arange(n)
    true_vals = decisions[rows, labels]
    masked = decisions.copy()
    masked[rows, labels] = -np.inf
    return true_vals - masked.max(axis=1)


def penultimate_features(teacher_state, ds: Dataset) -> np.ndarray:
    """Representation feeding the teacher's output layer (the input itself
    for a model without hidden layers)."""
    if ds.dim != teacher_state.spec.input_dim:
        raise InputError(
            f"target width {ds.dim} != teacher input_dim {teacher_state.spec.input_dim}"
        )
    return batch_activations(teacher_state, ds.features)[-2]


def score_tt(ds_target: Dataset, teacher: RunRecord, spec: SvcSpec | None = None) -> DifficultyScores:
    spec = spec or SvcSpec()
    feats = penultimate_features(teacher.best_state, ds_target)
    num_classes = int(ds_target.labels.max()) + 1
    weights, biases = fit_linear_svc(feats, ds_target.labels, num_classes, spec)
    margins = multiclass_margin(decision_values(feats, weights, biases), ds_target.labels)
    values = {int(i): float(-m) for i, m in zip(ds_target.ids, margins)}
    return DifficultyScores(
        values, "tt", (teacher.config_digest,), ds_target.name, transform="negated margin"
    )
