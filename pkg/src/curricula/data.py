"""Datasets: synthetic planted-difficulty generation, CSV ingestion, splits.

A Dataset keeps a stable integer id per sample. Fresh datasets number
their samples 0..N-1 in generation/file order; splits preserve the parent
ids, so ids — not row positions — are the currency of orderings and
difficulty scores. Ties everywhere break toward the smaller id.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .digest import bytes_digest
from .errors import ConfigurationError, ParseError, StratificationError


@dataclass(eq=False)
class Dataset:
    features: np.ndarray  # (N, D) float64
    labels: np.ndarray    # (N,) int64 in [0, C)
    ids: np.ndarray       # (N,) int64, stable across splits
    name: str = "dataset"

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        self.ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        if self.features.ndim != 2:
            raise ConfigurationError(f"features must be 2-D, got shape {self.features.shape}")
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.ids.shape != (n,):
            raise ConfigurationError("features, labels and ids must have matching lengths")
        if len(np.unique(self.ids)) != n:
            raise ConfigurationError("ids must be unique")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0

    def take(self, rows: np.ndarray, name: str | None = None) -> "Dataset":
        """Row subset, parent ids preserved."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows], self.labels[rows], self.ids[rows], name or self.name
        )

    def rows_for_ids(self, ids: np.ndarray) -> np.ndarray:
        """Row positions of the given ids (ids must all be present)."""
        order = np.argsort(self.ids, kind="stable")
        pos = np.searchsorted(self.ids, ids, sorter=order)
        if np.any(pos >= self.n) or np.any(self.ids[order[np.minimum(pos, self.n - 1)]] != ids):
            raise ConfigurationError("requested ids not present in dataset")
        return order[pos]

    def content_digest(self) -> str:
        return bytes_digest(
            self.features.tobytes() + self.labels.tobytes() + self.ids.tobytes()
            + self.name.encode("utf-8")
        )


@dataclass(frozen=True)
class KFoldSpec:
    k: int
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ConfigurationError(f"k must be >= 2, got {self.k}")


@dataclass(frozen=True)
class PlantedSpec:
    """Gaussian class clusters with a known fraction of flipped labels.

    Class c is an isotropic unit-variance Gaussian centred at
    class_separation * e_c (the c-th coordinate axis), which keeps every
    pair of class means at distance class_separation * sqrt(2). Requires
    dim >= num_classes so each class gets its own axis.
    """

    n_per_class: int
    num_classes: int
    dim: int
    class_separation: float
    noise_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1:
            raise ConfigurationError(f"n_per_class must be positive, got {self.n_per_class}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.dim < self.num_classes:
            raise ConfigurationError(
                f"dim must be >= num_classes (one axis per class), got {self.dim} < {self.num_classes}"
            )
        if self.class_separation <= 0:
            raise ConfigurationError("class_separation must be positive")
        if not 0 <= self.noise_fraction < 1:
            raise ConfigurationError(
                f"noise_fraction must be in [0, 1), got {self.noise_fraction}"
            )


def generate_planted(spec: PlantedSpec) -> tuple[Dataset, np.ndarray]:
    """Build the planted dataset; returns it plus the flipped-label ids."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_per_class * spec.num_classes
    labels = np.repeat(np.arange(spec.num_classes, dtype=np.int64), spec.n_per_class)
    centers = np.zeros((spec.num_classes, spec.dim))
    centers[np.arange(spec.num_classes), np.arange(spec.num_classes)] = spec.class_separation
    features = centers[labels] + rng.standard_normal((n, spec.dim))

    n_flips = int(np.floor(spec.noise_fraction * n))
    planted_hard = np.sort(rng.choice(n, size=n_flips, replace=False)).astype(np.int64)
    if n_flips:
        shift = rng.integers(1, spec.num_classes, size=n_flips)
        labels[planted_hard] = (labels[planted_hard] + shift) % spec.num_classes

    ds = Dataset(features, labels, np.arange(n, dtype=np.int64), name=f"planted-{spec.seed}")
    return ds, planted_hard


def load_csv(
    path: str | Path,
    label_column: str = "label",
    label_map: dict[str, int] | None = None,
) -> tuple[Dataset, dict[str, int]]:
    """Read a UTF-8, comma-separated, headered file into a Dataset.

    Labels are re-indexed densely in order of first occurrence unless an
    explicit label_map is given (then unseen labels are parse errors).
    Returns the dataset together with the label map actually used.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ParseError(f"missing required column {label_column!r}", line=1)
        label_idx = header.index(label_column)
        feature_cols = [i for i in range(len(header)) if i != label_idx]
        if not feature_cols:
            raise ParseError("no feature columns", line=1)

        fixed_map = label_map is not None
        mapping: dict[str, int] = dict(label_map) if label_map else {}
        rows: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", line=lineno
                )
            feats = []
            for i in feature_cols:
                try:
                    feats.append(float(row[i]))
                except ValueError:
                    raise ParseError(
                        f"non-numeric feature {row[i]!r} in column {header[i]!r}", line=lineno
                    ) from None
            raw_label = row[label_idx].strip()
            if not raw_label:
                raise ParseError("empty label", line=lineno)
            if raw_label not in mapping:
                if fixed_map:
                    raise ParseError(f"unknown label {raw_label!r}", line=lineno)
                mapping[raw_label] = len(mapping)
            rows.append(feats)
            labels.append(mapping[raw_label])

    if not rows:
        raise ParseError("no data rows", line=2)
    ds = Dataset(
        np.asarray(rows, dtype=np.float64),
        np.asarray(labels, dtype=np.int64),
        np.arange(len(rows), dtype=np.int64),
        name=path.stem,
    )
    return ds, mapping


def stratified_split(ds: Dataset, eval_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Per-class split; eval gets round(eval_fraction * class count) samples.

    Rounding is half-up. Row order (and therefore ids) follows the parent.
    """
    if not 0 < eval_fraction < 1:
        raise ConfigurationError(f"eval_fraction must be in (0, 1), got {eval_fraction}")
    rng = np.random.default_rng(seed)
    eval_rows: list[np.ndarray] = []
    for c in range(ds.num_classes):
        rows_c = np.flatnonzero(ds.labels == c)
        if len(rows_c) < 2:
            raise StratificationError(
                f"class {c} has {len(rows_c)} sample(s); need >= 2 to stratify"
            )
        n_eval = int(np.floor(eval_fraction * len(rows_c) + 0.5))
        perm = rng.permutation(len(rows_c))
        eval_rows.append(rows_c[perm[:n_eval]])
    eval_mask = np.zeros(ds.n, dtype=bool)
    if eval_rows:
        eval_mask[np.concatenate(eval_rows)] = True
    train = ds.take(np.flatnonzero(~eval_mask), name=f"{ds.name}-train")
    evalset = ds.take(np.flatnonzero(eval_mask), name=f"{ds.name}-eval")
    return train, evalset


def kfold_partitions(ds: Dataset, spec: KFoldSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row-position folds; each row is held out exactly once.

    Sizes differ by at most one, with earlier folds taking the remainder.
    """
    if spec.k > ds.n:
        raise ConfigurationError(f"k={spec.k} exceeds dataset size {ds.n}")
    perm = np.random.default_rng(spec.seed).permutation(ds.n)
    base, extra = divmod(ds.n, spec.k)
    folds = []
    start = 0
    for f in range(spec.k):
        size = base + (1 if f < extra else 0)
        heldout = np.sort(perm[start:start + size])
        start += size
        mask = np.ones(ds.n, dtype=bool)
        mask[heldout] = False
        folds.append((np.flatnonzero(mask), heldout))
    return folds
