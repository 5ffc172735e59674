"""Rank statistics, robustness summaries, and late fusion.

Report conventions: standard deviations are population (not sample) —
the pair set summarised is fixed, not sampled — and argmax predictions
break ties toward the lower class index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset
from .errors import ConfigurationError, InputError, UndefinedCorrelationError
from .model import ModelState, batch_probs
from .scoring import DifficultyScores, build_ensemble


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the average of their positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"pearson needs equal-length vectors, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise InputError("pearson needs at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    if denom == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return float((xc * yc).sum() / denom)


def _aligned_values(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, DifficultyScores) and isinstance(b, DifficultyScores):
        if set(a.values) != set(b.values):
            raise InputError("score sets cover different ids")
        ids = a.ids
        return (
            np.asarray([a.values[int(i)] for i in ids]),
            np.asarray([b.values[int(i)] for i in ids]),
        )
    return np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)


def spearman(a, b) -> float:
    """Rank correlation with average-rank tie handling.

    Accepts two DifficultyScores (aligned by id) or two plain vectors
    (aligned by position).
    """
    va, vb = _aligned_values(a, b)
    if va.shape != vb.shape:
        raise InputError("spearman needs inputs of identical length")
    if len(va) < 2:
        raise InputError("spearman needs at least two points")
    return pearson(average_ranks(va), average_ranks(vb))


@dataclass
class CorrelationReport:
    pairs: list[tuple[str, str, float]]
    mean: float
    std: float  # population
    std_kind: str = "population"


def pairwise_report(
    scores: Sequence[DifficultyScores], labels: Sequence[str] | None = None
) -> CorrelationReport:
    """Spearman over every unordered pair of inputs (no self-pairs)."""
    if len(scores) < 2:
        raise InputError("pairwise report needs at least two score sets")
    if labels is None:
        labels = [f"{s.sf_name}[{i}]" for i, s in enumerate(scores)]
    if len(labels) != len(scores):
        raise InputError("labels must match the number of score sets")
    pairs = []
    for i in range(len(scores)):
        for j in range(i + 1, len(scores)):
            pairs.append((labels[i], labels[j], spearman(scores[i], scores[j])))
    rhos = np.asarray([p[2] for p in pairs])
    return CorrelationReport(pairs, float(rhos.mean()), float(rhos.std()))


@dataclass
class GranularityReport:
    unique_values: int
    max_bin: int


def granularity(scores: DifficultyScores) -> GranularityReport:
    _, vals = scores.as_arrays()
    if len(vals) == 0:
        raise InputError("granularity needs a non-empty score set")
    _, counts = np.unique(vals, return_counts=True)
    return GranularityReport(len(counts), int(counts.max()))


def robustness_vs_ensemble(
    pool: Sequence[DifficultyScores],
    ensemble_sizes: Sequence[int],
    replicas: int = 3,
    seed: int | None = None,
) -> list[tuple[int, float]]:
    """Mean pairwise spearman among disjoint ensembles per ensemble size.

    For each size, `replicas` ensembles are built from disjoint members of
    the pool (pool order, or a seeded shuffle when seed is given).
    """
    members = list(pool)
    if seed is not None:
        perm = np.random.default_rng(seed).permutation(len(members))
        members = [members[int(i)] for i in perm]
    results = []
    for size in ensemble_sizes:
        if size < 1:
            raise ConfigurationError(f"ensemble size must be positive, got {size}")
        if replicas * size > len(members):
            raise ConfigurationError(
                f"need {replicas * size} disjoint score sets for size {size}, "
                f"pool has {len(members)}"
            )
        ensembles = [
            build_ensemble(members[r * size:(r + 1) * size]) for r in range(replicas)
        ]
        rhos = [
            spearman(ensembles[i], ensembles[j])
            for i in range(replicas)
            for j in range(i + 1, replicas)
        ]
        results.append((int(size), float(np.mean(rhos))))
    return results


def late_fuse(states: Sequence[ModelState], ds_eval: Dataset) -> tuple[float, np.ndarray]:
    """Mean of post-softmax probabilities across models; returns accuracy
    and the fused probability matrix."""
    if not states:
        raise InputError("late fusion needs at least one model state")
    n_classes = {s.spec.num_classes for s in states}
    if len(n_classes) != 1:
        raise InputError(f"fused models must share num_classes, got {sorted(n_classes)}")
    fused = np.zeros((ds_eval.n, n_classes.pop()))
    for state in states:
        fused += batch_probs(state, ds_eval.features)
    fused /= len(states)
    predictions = np.argmax(fused, axis=1)
    accuracy = float((predictions == ds_eval.labels).mean())
    return accuracy, fused


def robustness_performance_correlation(
    points_by_group: Mapping[str, Sequence[tuple[float, float]]]
) -> dict[str, float]:
    """Macro (mean of per-group Pearson) and micro (pooled Pearson) of
    (performance, robustness) point sets."""
    per_group = []
    pooled_x: list[float] = []
    pooled_y: list[float] = []
    for name, points in points_by_group.items():
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        per_group.append(pearson(np.asarray(xs), np.asarray(ys)))
        pooled_x.extend(xs)
        pooled_y.extend(ys)
    return {
        "macro": float(np.mean(per_group)),
        "micro": pearson(np.asarray(pooled_x), np.asarray(pooled_y)),
    }
