"""Experiment configuration files.

Plain-text INI: ``[section]`` headers, one ``key = value`` per line,
``#``/``;`` comments. Values are typed by the reader: integers, floats,
booleans (true/false), strings, and comma-separated sequences. The full
grammar and every recognised key are documented in the README.

A configuration digests to a stable content hash (CSV datasets hash file
content too), and every artifact directory is named by that hash.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .data import Dataset, PlantedSpec, generate_planted, load_csv, stratified_split
from .digest import bytes_digest, short_digest, stable_digest
from .errors import ConfigurationError
from .model import ModelSpec
from .optim import OptimizerSpec
from .training import TrainConfig


class Section:
    """Typed access to one config section."""

    def __init__(self, name: str, raw: dict[str, str]):
        self.name = name
        self.raw = dict(raw)

    def _fetch(self, key: str, default):
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigurationError(f"[{self.name}] is missing required key {key!r}")
            return None
        return self.raw[key]

    def get_str(self, key: str, default=None) -> str | None:
        value = self._fetch(key, default)
        return default if value is None else value.strip()

    def _convert(self, key: str, value: str, conv, kind: str):
        try:
            return conv(value.strip())
        except ValueError:
            raise ConfigurationError(
                f"[{self.name}] {key} = {value!r} is not a valid {kind}"
            ) from None

    def get_int(self, key: str, default=None) -> int | None:
        value = self._fetch(key, default)
        return default if value is None else self._convert(key, value, int, "integer")

    def get_float(self, key: str, default=None) -> float | None:
        value = self._fetch(key, default)
        return default if value is None else self._convert(key, value, float, "float")

    def get_bool(self, key: str, default=None) -> bool | None:
        value = self._fetch(key, default)
        if value is None:
            return default
        lowered = value.strip().lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigurationError(f"[{self.name}] {key} = {value!r} is not a valid boolean")

    def _split(self, value: str) -> list[str]:
        return [part.strip() for part in value.split(",") if part.strip()]

    def get_int_list(self, key: str, default=None) -> list[int] | None:
        value = self._fetch(key, default)
        if value is None:
            return default
        return [self._convert(key, v, int, "integer") for v in self._split(value)]

    def get_float_list(self, key: str, default=None) -> list[float] | None:
        value = self._fetch(key, default)
        if value is None:
            return default
        return [self._convert(key, v, float, "float") for v in self._split(value)]


_REQUIRED = object()
REQUIRED = _REQUIRED


@dataclass
class ExperimentConfig:
    sections: dict[str, Section]
    path: Path | None = None
    overrides: dict[str, dict[str, str]] = field(default_factory=dict)

    def section(self, name: str) -> Section:
        if name not in self.sections:
            raise ConfigurationError(f"missing required section [{name}]")
        return self.sections[name]

    def has(self, name: str) -> bool:
        return name in self.sections

    def override(self, section: str, key: str, value: str) -> None:
        self.sections.setdefault(section, Section(section, {})).raw[key] = value
        self.overrides.setdefault(section, {})[key] = value

    def resolved(self) -> dict[str, dict[str, str]]:
        return {name: dict(sec.raw) for name, sec in sorted(self.sections.items())}


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    sections = {
        name: Section(name, dict(parser.items(name))) for name in parser.sections()
    }
    return ExperimentConfig(sections, path=path)


# --- resolution helpers used by the CLI -------------------------------------

def build_dataset(cfg: ExperimentConfig) -> tuple[Dataset, Dataset, dict]:
    """Materialise (train, eval) splits plus provenance metadata."""
    sec = cfg.section("dataset")
    kind = sec.get_str("kind", REQUIRED)
    meta: dict = {"kind": kind}
    if kind == "planted":
        spec = PlantedSpec(
            n_per_class=sec.get_int("n_per_class", REQUIRED),
            num_classes=sec.get_int("num_classes", REQUIRED),
            dim=sec.get_int("dim", REQUIRED),
            class_separation=sec.get_float("class_separation", REQUIRED),
            noise_fraction=sec.get_float("noise_fraction", 0.0),
            seed=sec.get_int("seed", 0),
        )
        ds, planted_hard = generate_planted(spec)
        meta["planted_hard"] = [int(i) for i in planted_hard]
        meta["generator"] = stable_digest(spec)
    elif kind == "csv":
        path = Path(sec.get_str("path", REQUIRED))
        ds, label_map = load_csv(path, label_column=sec.get_str("label_column", "label"))
        meta["label_map"] = label_map
        meta["file_sha256"] = bytes_digest(path.read_bytes())
    else:
        raise ConfigurationError(f"[dataset] kind must be 'planted' or 'csv', got {kind!r}")

    eval_fraction = sec.get_float("eval_fraction", 0.2)
    split_seed = sec.get_int("split_seed", 0)
    train_ds, eval_ds = stratified_split(ds, eval_fraction, split_seed)
    meta["eval_fraction"] = eval_fraction
    meta["split_seed"] = split_seed
    meta["train_digest"] = train_ds.content_digest()
    meta["eval_digest"] = eval_ds.content_digest()
    return train_ds, eval_ds, meta


def build_model_spec(cfg: ExperimentConfig, input_dim: int, num_classes: int) -> ModelSpec:
    sec = cfg.section("model")
    return ModelSpec(
        input_dim=input_dim,
        hidden_dims=tuple(sec.get_int_list("hidden_dims", [])),
        num_classes=num_classes,
        activation=sec.get_str("activation", "relu"),
        seed=sec.get_int("seed", 0),
    )


def build_optimizer_spec(cfg: ExperimentConfig) -> OptimizerSpec:
    sec = cfg.section("optimizer")
    return OptimizerSpec(
        family=sec.get_str("family", "adam"),
        learning_rate=sec.get_float("learning_rate", 0.001),
        momentum=sec.get_float("momentum", 0.9),
        adam_beta1=sec.get_float("adam_beta1", 0.9),
        adam_beta2=sec.get_float("adam_beta2", 0.999),
        adam_eps=sec.get_float("adam_eps", 1e-8),
        sam_rho=sec.get_float("sam_rho", 0.05),
    )


def build_train_config(cfg: ExperimentConfig) -> TrainConfig:
    sec = cfg.section("train")
    return TrainConfig(
        optimizer=build_optimizer_spec(cfg),
        epochs=sec.get_int("epochs", 50),
        batch_size=sec.get_int("batch_size", 16),
        shuffle_seed=sec.get_int("shuffle_seed", 0),
    )


def train_digest(cfg: ExperimentConfig) -> str:
    """Digest of the sections that determine a baseline run's artifacts."""
    payload = {
        name: dict(cfg.sections[name].raw)
        for name in ("dataset", "model", "train", "optimizer")
        if name in cfg.sections
    }
    sec = cfg.sections.get("dataset")
    if sec is not None and sec.raw.get("kind", "").strip() == "csv":
        csv_path = Path(sec.raw["path"].strip())
        if csv_path.exists():
            payload["__csv_sha256__"] = bytes_digest(csv_path.read_bytes())
    return short_digest(payload)
