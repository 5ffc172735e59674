"""Curriculum training: class-balanced growing subsets over an ordering.

The training subset is a per-class prefix of the difficulty ordering and
only grows at pass boundaries — a pass must use every sample of the
current subset at least once before new samples are introduced. The
total number of optimizer steps equals what full-dataset training would
use (epochs * ceil(N / batch_size)), independent of the pacing family.

Within a pass, the subset is shuffled with the same permutation rule the
baseline loop uses per epoch, applied to the subset sorted by id. With
b = 1 this makes the curriculum batch stream identical to the baseline's,
so the degenerate curriculum reproduces baseline training bit-for-bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import Dataset
from .digest import short_digest
from .errors import ConfigurationError, DivergenceError, InputError
from .model import ModelSpec, ModelState, init_model, loss_and_grad_at
from .optim import Optimizer
from .pacing import PacingSpec, pacing_fraction
from .scoring import DifficultyOrdering
from .training import RunRecord, TrainConfig, TrainingTrace, epoch_order, evaluate


@dataclass
class ScheduleState:
    """Iteration bookkeeping for one curriculum run."""

    iteration: int
    total_iterations: int
    current_subset: np.ndarray  # ids, ordering order
    passes_completed: int
    subset_series: list[tuple[int, int]] = field(default_factory=list)  # (iteration, size)


@dataclass
class CurriculumRun:
    record: RunRecord
    pacing: PacingSpec
    ordering_source: str
    subset_series: list[tuple[int, int]]
    total_iterations: int


def subset_target(
    ordering: DifficultyOrdering | np.ndarray,
    fraction: float,
    class_labels: Mapping[int, int],
) -> np.ndarray:
    """Ids of the class-balanced subset at the given fraction.

    Per class, the first floor(fraction * N_c) ids in ordering order; the
    remaining seats up to ceil(fraction * N) go to classes in ascending
    class index, one each, taking each class's next-easiest id. On an
    unbalanced dataset this falls back (with a warning) to the plain
    ordering prefix of length ceil(fraction * N).

    The result keeps ordering order and is a superset of any target at a
    smaller fraction.
    """
    order = ordering.order if isinstance(ordering, DifficultyOrdering) else np.asarray(ordering)
    n = len(order)
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"fraction must be in (0, 1], got {fraction}")
    labels = np.asarray([class_labels[int(i)] for i in order], dtype=np.int64)
    classes, counts = np.unique(labels, return_counts=True)

    total_target = int(np.ceil(fraction * n))
    if len(set(counts)) != 1:
        warnings.warn("dataset is not class-balanced; using a plain ordering prefix")
        return order[:total_target].copy()

    take = {int(c): int(np.floor(fraction * cnt)) for c, cnt in zip(classes, counts)}
    count_by_class = {int(c): int(cnt) for c, cnt in zip(classes, counts)}
    seats = total_target - sum(take.values())
    while seats > 0:
        assigned = False
        for c in sorted(take):
            if seats == 0:
                break
            if take[c] < count_by_class[c]:
                take[c] += 1
                seats -= 1
                assigned = True
        if not assigned:
            break

    keep = np.zeros(n, dtype=bool)
    taken = {c: 0 for c in take}
    for pos, (sample_id, label) in enumerate(zip(order, labels)):
        if taken[int(label)] < take[int(label)]:
            keep[pos] = True
            taken[int(label)] += 1
    return order[keep].copy()


def curriculum_train(
    ds_train: Dataset,
    ds_eval: Dataset,
    ordering: DifficultyOrdering,
    pacing: PacingSpec,
    model_spec: ModelSpec,
    config: TrainConfig,
) -> CurriculumRun:
    if set(int(i) for i in ordering.order) != set(int(i) for i in ds_train.ids):
        raise InputError("ordering does not cover exactly the training ids")

    n = ds_train.n
    steps_per_epoch = int(np.ceil(n / config.batch_size))
    total_iterations = config.epochs * steps_per_epoch
    labels_by_id = {int(i): int(c) for i, c in zip(ds_train.ids, ds_train.labels)}
    row_of_id = {int(i): r for r, i in enumerate(ds_train.ids)}

    state = init_model(model_spec)
    params = state.parameters.copy()
    opt = Optimizer(config.optimizer, model_spec.param_count)

    correct = np.zeros((n, config.epochs), dtype=bool)
    losses = np.zeros((n, config.epochs))
    eval_acc = np.zeros(config.epochs)
    best_params = None
    best_acc = -1.0
    best_epoch = 0

    schedule = ScheduleState(
        iteration=0,
        total_iterations=total_iterations,
        current_subset=subset_target(ordering, pacing_fraction(pacing, 0, total_iterations),
                                     labels_by_id),
        passes_completed=0,
    )
    schedule.subset_series.append((0, len(schedule.current_subset)))

    def end_of_epoch_bookkeeping() -> None:
        nonlocal best_params, best_acc, best_epoch
        epoch = schedule.iteration // steps_per_epoch
        snapshot = ModelState(params, model_spec, epoch_tag=epoch)
        train_eval = evaluate(snapshot, ds_train)
        correct[:, epoch - 1] = train_eval.per_sample_correct
        losses[:, epoch - 1] = train_eval.per_sample_loss
        acc = evaluate(snapshot, ds_eval).accuracy
        eval_acc[epoch - 1] = acc
        if acc > best_acc:
            best_acc, best_epoch = acc, epoch
            best_params = params.copy()

    while schedule.iteration < total_iterations:
        pass_number = schedule.passes_completed + 1
        subset_sorted = np.sort(schedule.current_subset)
        perm = epoch_order(len(subset_sorted), pass_number, config.shuffle_seed)
        stream = subset_sorted[perm]
        for start in range(0, len(stream), config.batch_size):
            if schedule.iteration >= total_iterations:
                break
            batch_ids = stream[start:start + config.batch_size]
            rows = np.asarray([row_of_id[int(i)] for i in batch_ids])
            x = ds_train.features[rows]
            y = ds_train.labels[rows]
            loss, grad = loss_and_grad_at(params, model_spec, x, y)
            if not np.isfinite(loss):
                raise DivergenceError(
                    "curriculum training diverged (non-finite loss)",
                    diagnostic={"iteration": schedule.iteration, "loss": float(loss)},
                )
            params = opt.step(params, grad, lambda p: loss_and_grad_at(p, model_spec, x, y))
            schedule.iteration += 1
            if schedule.iteration % steps_per_epoch == 0:
                end_of_epoch_bookkeeping()
        schedule.passes_completed += 1
        if schedule.iteration >= total_iterations:
            break
        fraction = pacing_fraction(pacing, schedule.iteration, total_iterations)
        target = subset_target(ordering, fraction, labels_by_id)
        if len(target) > len(schedule.current_subset):
            schedule.current_subset = target
            schedule.subset_series.append((schedule.iteration, len(target)))

    trace = TrainingTrace(correct, losses, eval_acc, ds_train.ids.copy(), ds_train.name)
    digest = short_digest(
        {
            "train": ds_train.content_digest(),
            "eval": ds_eval.content_digest(),
            "model": model_spec,
            "config": config,
            "pacing": pacing,
            "ordering": ordering.source,
        }
    )
    record = RunRecord(
        trace=trace,
        best_state=ModelState(best_params, model_spec, epoch_tag=best_epoch),
        final_state=ModelState(params, model_spec, epoch_tag=config.epochs),
        config_digest=digest,
    )
    return CurriculumRun(
        record=record,
        pacing=pacing,
        ordering_source=ordering.source,
        subset_series=schedule.subset_series,
        total_iterations=schedule.iteration,
    )
