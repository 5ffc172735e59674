"""Prediction depth: where kNN probes start agreeing with the model.

A probe sits at every representation the model exposes (input, each
hidden activation, post-softmax output). Each probe classifies every
training sample by majority label among its k nearest training samples
(Euclidean distance, the sample itself excluded). A sample's depth is
the shallowest probe from which every probe, down to the deepest one,
agrees with the model's final prediction; if even the deepest probe
disagrees, the maximum depth is assigned. Scores are depth / L, so they
take at most L+1 distinct values.

Representations wider than max_rep_dim are mean-pooled over contiguous
chunks before the distance computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigurationError
from .model import batch_activations
from .scoring import DifficultyScores
from .training import RunRecord


@dataclass(frozen=True)
class ProbeSpec:
    knn_k: int = 30
    max_rep_dim: int = 8192

    def __post_init__(self):
        if self.knn_k < 1:
            raise ConfigurationError(f"knn_k must be positive, got {self.knn_k}")
        if self.max_rep_dim < 1:
            raise ConfigurationError(f"max_rep_dim must be positive, got {self.max_rep_dim}")


def pool_representation(rep: np.ndarray, max_rep_dim: int) -> np.ndarray:
    """Mean-pool contiguous chunks until the width fits max_rep_dim."""
    width = rep.shape[1]
    if width <= max_rep_dim:
        return rep
    chunk = int(np.ceil(width / max_rep_dim))
    n_chunks = int(np.ceil(width / chunk))
    pooled = np.empty((rep.shape[0], n_chunks))
    for j in range(n_chunks):
        pooled[:, j] = rep[:, j * chunk:(j + 1) * chunk].mean(axis=1)
    return pooled


def knn_predictions(rep: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Leave-one-out kNN majority vote on one representation.

    Equidistant neighbours rank by smaller row index (stable sort); vote
    ties resolve to the smaller class index.
    """
    n = rep.shape[0]
    if k >= n:
        raise ConfigurationError(f"knn_k={k} needs at least k+1 samples, got {n}")
    sq = (rep * rep).sum(axis=1)
    dists = sq[:, None] + sq[None, :] - 2.0 * (rep @ rep.T)
    np.fill_diagonal(dists, np.inf)
    neighbors = np.argsort(dists, axis=1, kind="stable")[:, :k]

    num_classes = int(labels.max()) + 1
    preds = np.empty(n, dtype=np.int64)
    neighbor_labels = labels[neighbors]
    for i in range(n):
        counts = np.bincount(neighbor_labels[i], minlength=num_classes)
        preds[i] = int(np.argmax(counts))  # argmax takes the smaller class on ties
    return preds


def depth_from_agreement(agree: np.ndarray) -> np.ndarray:
    """First probe index from which agreement holds through the deepest
    probe; L (the probe count) when the deepest probe disagrees."""
    n_probes, n = agree.shape
    suffix_ok = np.logical_and.accumulate(agree[::-1], axis=0)[::-1]
    depths = np.full(n, n_probes, dtype=np.int64)
    for probe in range(n_probes - 1, -1, -1):
        depths[suffix_ok[probe]] = probe
    return depths


def score_pd(run: RunRecord, ds_train: Dataset, spec: ProbeSpec | None = None) -> DifficultyScores:
    spec = spec or ProbeSpec()
    if spec.knn_k >= ds_train.n:
        raise ConfigurationError(
            f"knn_k={spec.knn_k} must be smaller than the training set size {ds_train.n}"
        )
    reps = batch_activations(run.best_state, ds_train.features)
    final_pred = np.argmax(reps[-1], axis=1)

    agree = np.zeros((len(reps), ds_train.n), dtype=bool)
    for probe, rep in enumerate(reps):
        pooled = pool_representation(rep, spec.max_rep_dim)
        agree[probe] = knn_predictions(pooled, ds_train.labels, spec.knn_k) == final_pred

    depths = depth_from_agreement(agree)
    n_probes = len(reps)
    values = {int(i): float(d) / n_probes for i, d in zip(ds_train.ids, depths)}
    return DifficultyScores(
        values, "pd", (run.config_digest,), ds_train.name, transform=f"depth / {n_probes}"
    )
