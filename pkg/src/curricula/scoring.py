"""Sample-difficulty scores, ensembles, and difficulty orderings.

Convention: lower score = easier sample, for every scoring function.
Directions that naturally point the other way are transformed (accuracy
rates complemented, margins negated) and the applied transform is
recorded in the score metadata. Orderings sort by (value, id) so equal
scores fall back to the original dataset order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset, KFoldSpec, kfold_partitions
from .digest import short_digest
from .errors import ConfigurationError, DivergenceError, InputError
from .model import ModelSpec
from .training import RunRecord, TrainConfig, TrainingTrace, evaluate, train


@dataclass
class DifficultyScores:
    values: dict[int, float]  # id -> difficulty, lower = easier
    sf_name: str
    provenance: tuple[str, ...] = ()
    dataset_name: str = "dataset"
    transform: str = "identity"

    def __post_init__(self):
        bad = [i for i, v in self.values.items() if not np.isfinite(v)]
        if bad:
            raise InputError(f"non-finite difficulty values for ids {bad[:5]}")

    @property
    def ids(self) -> np.ndarray:
        return np.asarray(sorted(self.values), dtype=np.int64)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ids = self.ids
        return ids, np.asarray([self.values[int(i)] for i in ids])

    def digest(self) -> str:
        ids, vals = self.as_arrays()
        return short_digest(
            {"sf": self.sf_name, "ids": ids.tolist(), "values": [repr(v) for v in vals]}
        )


@dataclass
class DifficultyOrdering:
    order: np.ndarray  # ids, easiest first
    source: str

    def __post_init__(self):
        self.order = np.ascontiguousarray(self.order, dtype=np.int64)
        if len(np.unique(self.order)) != len(self.order):
            raise InputError("ordering contains duplicate ids")


def make_ordering(scores: DifficultyScores) -> DifficultyOrdering:
    ids, vals = scores.as_arrays()
    perm = np.lexsort((ids, vals))  # value first, id breaks ties
    return DifficultyOrdering(ids[perm], source=scores.digest())


def reverse_ordering(ordering: DifficultyOrdering) -> DifficultyOrdering:
    return DifficultyOrdering(ordering.order[::-1].copy(), source=f"reversed:{ordering.source}")


def random_ordering(ids: np.ndarray, seed: int) -> DifficultyOrdering:
    ids = np.asarray(ids, dtype=np.int64)
    perm = np.random.default_rng(seed).permutation(len(ids))
    return DifficultyOrdering(ids[perm], source=f"random:{seed}")


# --- single-run scoring functions -------------------------------------------

def score_celoss(run: RunRecord, ds_train: Dataset) -> DifficultyScores:
    """Cross-entropy loss of each training sample under the best state."""
    result = evaluate(run.best_state, ds_train)
    values = {int(i): float(v) for i, v in zip(ds_train.ids, result.per_sample_loss)}
    return DifficultyScores(values, "celoss", (run.config_digest,), ds_train.name)


def score_cumacc(trace: TrainingTrace) -> DifficultyScores:
    """Complement of the fraction of epochs a sample was classified correctly."""
    rates = trace.correct.sum(axis=1) / trace.num_epochs
    values = {int(i): float(1.0 - r) for i, r in zip(trace.ids, rates)}
    return DifficultyScores(
        values, "cumacc", (), trace.dataset_name, transform="1 - accuracy rate"
    )


def score_fit(trace: TrainingTrace) -> DifficultyScores:
    """Normalised first epoch after which a sample stays correct.

    A sample that is never stably learnt gets (T+1)/T, ranking it strictly
    after samples learnt at the last epoch.
    """
    t = trace.num_epochs
    values = {}
    for i, row in zip(trace.ids, trace.correct):
        wrong = np.flatnonzero(~row)
        first_stable = 1 if len(wrong) == 0 else int(wrong[-1]) + 2
        values[int(i)] = first_stable / t
    return DifficultyScores(values, "fit", (), trace.dataset_name)


# --- held-out scoring functions ----------------------------------------------

def score_cvloss(
    ds: Dataset,
    model_spec: ModelSpec,
    train_config: TrainConfig,
    kfold: KFoldSpec,
) -> tuple[DifficultyScores, list[RunRecord]]:
    """Held-out cross-entropy under k-fold cross-validation.

    Trains k models, each on k-1 folds with the held-out fold as its eval
    split; each sample is scored by the one model that held it out. The
    fold runs are returned so callers can persist them.
    """
    runs: list[RunRecord] = []
    values: dict[int, float] = {}
    for fold_idx, (train_rows, heldout_rows) in enumerate(kfold_partitions(ds, kfold)):
        ds_fold_train = ds.take(train_rows, name=f"{ds.name}-fold{fold_idx}-train")
        ds_heldout = ds.take(heldout_rows, name=f"{ds.name}-fold{fold_idx}-heldout")
        try:
            record = train(ds_fold_train, ds_heldout, model_spec, train_config)
        except DivergenceError as exc:
            raise DivergenceError(
                f"fold {fold_idx} diverged: {exc}",
                diagnostic={**exc.diagnostic, "fold": fold_idx},
            ) from exc
        runs.append(record)
        heldout_eval = evaluate(record.best_state, ds_heldout)
        for sample_id, loss in zip(ds_heldout.ids, heldout_eval.per_sample_loss):
            values[int(sample_id)] = float(loss)
    scores = DifficultyScores(
        values, "cvloss", tuple(r.config_digest for r in runs), ds.name
    )
    return scores, runs


@dataclass(frozen=True)
class CScoreSpec:
    subset_ratios: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    subsets_per_ratio: int = 20
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "subset_ratios", tuple(float(r) for r in self.subset_ratios))
        if not self.subset_ratios:
            raise ConfigurationError("subset_ratios must be non-empty")
        if any(not 0 < r < 1 for r in self.subset_ratios):
            raise ConfigurationError(
                f"subset ratios must lie strictly in (0, 1), got {self.subset_ratios}"
            )
        if self.subsets_per_ratio < 1:
            raise ConfigurationError("subsets_per_ratio must be positive")


@dataclass
class CScoreRun:
    """Correctness bookkeeping for one (ratio, subset) training."""

    ratio: float
    subset_index: int
    run_digest: str
    excluded_ids: np.ndarray
    excluded_correct: np.ndarray


def score_cscore(
    ds: Dataset,
    model_spec: ModelSpec,
    train_config: TrainConfig,
    spec: CScoreSpec,
) -> tuple[DifficultyScores, list[CScoreRun]]:
    """Consistency of held-out classification across training subsets.

    For each ratio a fixed number of subsets of size round(ratio * N) is
    drawn uniformly; every sample outside a subset is evaluated under that
    subset's best model state (the excluded complement doubles as the eval
    split). A sample's score is one minus its mean held-out correctness;
    samples excluded by no subset at all get 1 and a coverage warning.
    """
    n = ds.n
    sums = {int(i): 0.0 for i in ds.ids}
    counts = {int(i): 0 for i in ds.ids}
    table: list[CScoreRun] = []
    for ratio_idx, ratio in enumerate(spec.subset_ratios):
        size = int(round(ratio * n))
        if not 0 < size < n:
            raise ConfigurationError(
                f"ratio {ratio} yields degenerate subset size {size} for N={n}"
            )
        for subset_idx in range(spec.subsets_per_ratio):
            rng = np.random.default_rng([spec.seed, ratio_idx, subset_idx])
            subset_rows = np.sort(rng.choice(n, size=size, replace=False))
            mask = np.zeros(n, dtype=bool)
            mask[subset_rows] = True
            ds_subset = ds.take(subset_rows, name=f"{ds.name}-r{ratio_idx}s{subset_idx}")
            ds_excluded = ds.take(np.flatnonzero(~mask), name=f"{ds.name}-excl")
            record = train(ds_subset, ds_excluded, model_spec, train_config)
            excluded_eval = evaluate(record.best_state, ds_excluded)
            for sample_id, ok in zip(ds_excluded.ids, excluded_eval.per_sample_correct):
                sums[int(sample_id)] += float(ok)
                counts[int(sample_id)] += 1
            table.append(
                CScoreRun(
                    ratio, subset_idx, record.config_digest,
                    ds_excluded.ids.copy(), excluded_eval.per_sample_correct.copy(),
                )
            )

    uncovered = [i for i, c in counts.items() if c == 0]
    if uncovered:
        warnings.warn(
            f"{len(uncovered)} sample(s) were never excluded from any subset; "
            "assigning maximum difficulty 1.0"
        )
    values = {
        i: (1.0 - sums[i] / counts[i]) if counts[i] else 1.0 for i in counts
    }
    scores = DifficultyScores(
        values, "cscore", tuple(r.run_digest for r in table), ds.name,
        transform="1 - held-out accuracy rate",
    )
    return scores, table


# --- ensembles ---------------------------------------------------------------

def build_ensemble(members: list[DifficultyScores]) -> DifficultyScores:
    """Arithmetic mean of raw score values across members of one SF."""
    if not members:
        raise InputError("ensemble needs at least one member")
    names = {m.sf_name for m in members}
    if len(names) != 1:
        raise InputError(f"ensemble members must share sf_name, got {sorted(names)}")
    id_sets = [frozenset(m.values) for m in members]
    if any(s != id_sets[0] for s in id_sets[1:]):
        raise InputError("ensemble members cover different id sets")
    values = {
        i: float(np.mean([m.values[i] for m in members])) for i in id_sets[0]
    }
    return DifficultyScores(
        values,
        members[0].sf_name,
        tuple(m.digest() for m in members),
        members[0].dataset_name,
        transform=f"mean of {len(members)} members",
    )
