"""Content-addressed artifact directories.

Every run/score/ordering lives under ``<out root>/<config digest>/`` with
a fixed file set; ``manifest.json`` is written last and doubles as the
completeness marker. All writers are deterministic (sorted JSON keys,
repr-formatted floats, no timestamps), so re-running a command with an
unchanged config reproduces every artifact byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .checkpoint import load_state, save_state
from .errors import ConfigurationError, InputError
from .scoring import DifficultyOrdering, DifficultyScores
from .training import RunRecord, read_trace_csv, write_run_summary, write_trace_csv

RUN_FILES = ("summary.json", "correct.csv", "loss.csv", "best.ckpt", "manifest.json")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def is_complete(directory: Path) -> bool:
    return (directory / "manifest.json").exists()


def write_run_dir(directory: Path, record: RunRecord, manifest: dict) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    write_trace_csv(record.trace, directory / "correct.csv", directory / "loss.csv")
    save_state(record.best_state, directory / "best.ckpt")
    write_run_summary(record, directory / "summary.json")
    write_json(directory / "manifest.json", manifest)


def load_run_trace(directory: Path):
    directory = Path(directory)
    if not is_complete(directory):
        raise ConfigurationError(f"run directory {directory} is missing or incomplete")
    summary = read_json(directory / "summary.json")
    trace = read_trace_csv(
        directory / "correct.csv", directory / "loss.csv", summary.get("dataset", "dataset")
    )
    trace.eval_accuracy = np.asarray(summary["eval_accuracy"], dtype=np.float64)
    return trace, summary


def load_run_best_state(directory: Path):
    directory = Path(directory)
    if not is_complete(directory):
        raise ConfigurationError(f"run directory {directory} is missing or incomplete")
    return load_state(directory / "best.ckpt")


def write_scores_dir(directory: Path, scores: DifficultyScores, manifest: dict) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    ids, values = scores.as_arrays()
    with (directory / "scores.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "score"])
        for sample_id, value in zip(ids, values):
            writer.writerow([int(sample_id), repr(float(value))])
    write_json(
        directory / "scores.json",
        {
            "sf_name": scores.sf_name,
            "dataset": scores.dataset_name,
            "transform": scores.transform,
            "provenance": list(scores.provenance),
            "digest": scores.digest(),
        },
    )
    write_json(directory / "manifest.json", manifest)


def read_scores(path: Path) -> DifficultyScores:
    """Read scores from a directory (scores.csv + scores.json) or a CSV path
    with its sidecar alongside."""
    path = Path(path)
    csv_path = path / "scores.csv" if path.is_dir() else path
    sidecar = csv_path.with_name("scores.json")
    if not csv_path.exists():
        raise ConfigurationError(f"scores file not found: {csv_path}")
    values: dict[int, float] = {}
    with csv_path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["id", "score"]:
            raise InputError(f"{csv_path} is not an id,score file")
        for row in reader:
            values[int(row[0])] = float(row[1])
    meta = read_json(sidecar) if sidecar.exists() else {}
    return DifficultyScores(
        values,
        meta.get("sf_name", "scores"),
        tuple(meta.get("provenance", ())),
        meta.get("dataset", "dataset"),
        meta.get("transform", "identity"),
    )


def write_ordering_dir(directory: Path, ordering: DifficultyOrdering, manifest: dict) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    text = "\n".join(str(int(i)) for i in ordering.order)
    (directory / "ordering.txt").write_text(text + "\n", encoding="utf-8")
    write_json(directory / "ordering.json", {"source": ordering.source, "count": len(ordering.order)})
    write_json(directory / "manifest.json", manifest)


def read_ordering(path: Path) -> DifficultyOrdering:
    path = Path(path)
    txt_path = path / "ordering.txt" if path.is_dir() else path
    if not txt_path.exists():
        raise ConfigurationError(f"ordering file not found: {txt_path}")
    ids = [int(line) for line in txt_path.read_text(encoding="utf-8").split() if line.strip()]
    sidecar = txt_path.with_name("ordering.json")
    source = read_json(sidecar).get("source", txt_path.stem) if sidecar.exists() else txt_path.stem
    return DifficultyOrdering(np.asarray(ids, dtype=np.int64), source=source)
