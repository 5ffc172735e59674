"""Baseline training loop with full per-sample dynamics tracing.

Every epoch ends with a dedicated evaluation pass over the complete
training set (not the mini-batch outputs seen during the epoch), so the
per-epoch correctness/loss statistics are order-independent within an
epoch. The best state is the one with the highest eval-set accuracy,
earliest epoch on ties.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .digest import short_digest
from .errors import ConfigurationError, DivergenceError, InputError
from .model import ModelSpec, ModelState, batch_probs, init_model, loss_and_grad_at
from .optim import Optimizer, OptimizerSpec


@dataclass(frozen=True)
class TrainConfig:
    optimizer: OptimizerSpec
    epochs: int = 50
    batch_size: int = 16
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be positive, got {self.batch_size}")


@dataclass
class TrainingTrace:
    correct: np.ndarray        # (N, T) bool, end-of-epoch train-set evaluation
    loss: np.ndarray           # (N, T) float64
    eval_accuracy: np.ndarray  # (T,)
    ids: np.ndarray            # (N,) sample ids aligned with the rows
    dataset_name: str = "dataset"

    @property
    def num_epochs(self) -> int:
        return self.correct.shape[1]

    @property
    def best_epoch(self) -> int:
        """1-based epoch with the highest eval accuracy, first on ties."""
        return int(np.argmax(self.eval_accuracy)) + 1


@dataclass
class RunRecord:
    trace: TrainingTrace
    best_state: ModelState
    final_state: ModelState
    config_digest: str


@dataclass
class EvalResult:
    accuracy: float
    per_sample_loss: np.ndarray
    per_sample_correct: np.ndarray
    probs: np.ndarray


def evaluate(state: ModelState, ds: Dataset) -> EvalResult:
    probs = batch_probs(state, ds.features)
    predictions = np.argmax(probs, axis=1)  # argmax ties go to the lower class
    correct = predictions == ds.labels
    losses = -np.log(probs[np.arange(ds.n), ds.labels])
    return EvalResult(float(correct.mean()), losses, correct, probs)


def epoch_order(n: int, epoch: int, shuffle_seed: int) -> np.ndarray:
    """Deterministic permutation of 0..n-1 for a given (seed, epoch)."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    return np.random.default_rng([shuffle_seed, epoch]).permutation(n)


def _check_compatible(ds: Dataset, spec: ModelSpec) -> None:
    if ds.n == 0:
        raise InputError("dataset is empty")
    if ds.dim != spec.input_dim:
        raise InputError(f"dataset width {ds.dim} != model input_dim {spec.input_dim}")
    if ds.labels.max() >= spec.num_classes:
        raise InputError(
            f"label {ds.labels.max()} out of range for {spec.num_classes} classes"
        )


def run_config_digest(ds_train: Dataset, ds_eval: Dataset, model_spec: ModelSpec,
                      config: TrainConfig) -> str:
    return short_digest(
        {
            "train": ds_train.content_digest(),
            "eval": ds_eval.content_digest(),
            "model": model_spec,
            "config": config,
        }
    )


def train(ds_train: Dataset, ds_eval: Dataset, model_spec: ModelSpec,
          config: TrainConfig) -> RunRecord:
    _check_compatible(ds_train, model_spec)
    _check_compatible(ds_eval, model_spec)

    n = ds_train.n
    epochs = config.epochs
    state = init_model(model_spec)
    params = state.parameters.copy()
    opt = Optimizer(config.optimizer, model_spec.param_count)

    correct = np.zeros((n, epochs), dtype=bool)
    losses = np.zeros((n, epochs))
    eval_acc = np.zeros(epochs)
    best_params: np.ndarray | None = None
    best_acc = -1.0
    best_epoch = 0

    for epoch in range(1, epochs + 1):
        order = epoch_order(n, epoch, config.shuffle_seed)
        for start in range(0, n, config.batch_size):
            rows = order[start:start + config.batch_size]
            x = ds_train.features[rows]
            y = ds_train.labels[rows]
            loss, grad = loss_and_grad_at(params, model_spec, x, y)
            if not np.isfinite(loss):
                raise DivergenceError(
                    "training diverged (non-finite loss)",
                    diagnostic={"epoch": epoch, "batch_start": start, "loss": float(loss)},
                )
            params = opt.step(
                params, grad, lambda p: loss_and_grad_at(p, model_spec, x, y)
            )

        snapshot = ModelState(params, model_spec, epoch_tag=epoch)
        train_eval = evaluate(snapshot, ds_train)
        correct[:, epoch - 1] = train_eval.per_sample_correct
        losses[:, epoch - 1] = train_eval.per_sample_loss
        acc = evaluate(snapshot, ds_eval).accuracy
        eval_acc[epoch - 1] = acc
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_params = params.copy()

    trace = TrainingTrace(correct, losses, eval_acc, ds_train.ids.copy(), ds_train.name)
    assert trace.best_epoch == best_epoch
    return RunRecord(
        trace=trace,
        best_state=ModelState(best_params, model_spec, epoch_tag=best_epoch),
        final_state=ModelState(params, model_spec, epoch_tag=epochs),
        config_digest=run_config_digest(ds_train, ds_eval, model_spec, config),
    )


# --- trace serialization ---------------------------------------------------

def _epoch_header(t: int) -> list[str]:
    return ["id"] + [f"e{e}" for e in range(1, t + 1)]


def write_trace_csv(trace: TrainingTrace, correct_path: str | Path,
                    loss_path: str | Path) -> None:
    t = trace.num_epochs
    with Path(correct_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_epoch_header(t))
        for i, sample_id in enumerate(trace.ids):
            writer.writerow([int(sample_id)] + [int(v) for v in trace.correct[i]])
    with Path(loss_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_epoch_header(t))
        for i, sample_id in enumerate(trace.ids):
            writer.writerow([int(sample_id)] + [repr(float(v)) for v in trace.loss[i]])


def read_trace_csv(correct_path: str | Path, loss_path: str | Path,
                   dataset_name: str = "dataset") -> TrainingTrace:
    def read(path, cast):
        with Path(path).open("r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            ids, rows = [], []
            for row in reader:
                ids.append(int(row[0]))
                rows.append([cast(v) for v in row[1:]])
        return np.asarray(ids, dtype=np.int64), np.asarray(rows)

    ids, correct = read(correct_path, lambda v: bool(int(v)))
    ids2, losses = read(loss_path, float)
    if not np.array_equal(ids, ids2):
        raise InputError("correct/loss traces cover different ids")
    # eval accuracies live in the run summary, not the trace files
    return TrainingTrace(
        correct.astype(bool), losses.astype(np.float64), np.zeros(correct.shape[1]),
        ids, dataset_name,
    )


def write_run_summary(record: RunRecord, path: str | Path) -> None:
    payload = {
        "config_digest": record.config_digest,
        "dataset": record.trace.dataset_name,
        "epochs": record.trace.num_epochs,
        "eval_accuracy": [float(a) for a in record.trace.eval_accuracy],
        "best_epoch": record.trace.best_epoch,
        "final_epoch_tag": record.final_state.epoch_tag,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
