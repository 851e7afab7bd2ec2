"""Run configuration: a JSON file validated field by field.

Unknown keys are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .trigan import G_Y_LOSS_MODES, TrainConfig
from .variants import VariantKind

VARIANTS = ("proposed", "inverted", "symmetric", "symmetric-intended", "baseline")

_TOY_KEYS = {"kind", "n_per_class", "dim", "means", "cov_scale", "data_seed"}
_CORPUS_KEYS = {"kind", "path", "embed_dim", "embed_seed"}
_DATASET_KEYS = {"kind", "path"}

_TOP_KEYS = {
    "data",
    "variant",
    "iterations",
    "batch_size",
    "seed",
    "noise_dim",
    "hidden",
    "optimizer",
    "learning_rate",
    "learning_rates",
    "g_y_loss_mode",
    "eval_every",
    "similarity_sample_cap",
    "pairing",
    "repeats",
    "split",
    "split_seed",
    "priors",
}


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending fields."""


@dataclass
class DataSpec:
    kind: str  # "toy-mixture" | "corpus" | "dataset"
    n_per_class: int = 5000
    dim: int = 2
    means: list = field(default_factory=lambda: [[-2.0, -2.0], [2.0, 2.0]])
    cov_scale: float = 1.0
    data_seed: int = 0
    path: str = ""
    embed_dim: int = 64
    embed_seed: int = 0


@dataclass
class RunConfig:
    data: DataSpec
    variant: str = "proposed"
    iterations: int = 2000
    batch_size: int = 64
    seed: int = 0
    noise_dim: int = 8
    hidden: int = 64
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    learning_rates: dict = field(default_factory=dict)
    g_y_loss_mode: str = "alg1-line14"
    eval_every: int = 10
    similarity_sample_cap: int = 20000
    pairing: str = "nearest"
    repeats: int = 5
    split: tuple = (0.8, 0.1, 0.1)
    split_seed: int = 0
    priors: tuple | None = None  # override for (pi_p, pi_n)

    def train_config(self, seed: int | None = None) -> TrainConfig:
        return TrainConfig(
            iterations=self.iterations,
            batch_size=self.batch_size,
            seed=self.seed if seed is None else seed,
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            learning_rates=dict(self.learning_rates),
            g_y_loss_mode=self.g_y_loss_mode,
            eval_every=self.eval_every,
            similarity_sample_cap=self.similarity_sample_cap,
            pairing=self.pairing,
        )

    def variant_kind(self) -> VariantKind | None:
        return None if self.variant == "proposed" else VariantKind(self.variant)


def _parse_data(obj) -> DataSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("data: must be an object with a 'kind' field")
    kind = obj["kind"]
    allowed = {
        "toy-mixture": _TOY_KEYS,
        "corpus": _CORPUS_KEYS,
        "dataset": _DATASET_KEYS,
    }.get(kind)
    if allowed is None:
        raise ConfigError(f"data.kind: unknown kind {kind!r}")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"data: unknown keys {sorted(unknown)} for kind {kind!r}")
    spec = DataSpec(kind=kind)
    for k, v in obj.items():
        if k != "kind":
            setattr(spec, k, v)
    problems = []
    if kind == "toy-mixture":
        if spec.n_per_class < 0:
            problems.append("data.n_per_class: must be nonnegative")
        if spec.dim < 1:
            problems.append("data.dim: must be positive")
        if spec.cov_scale <= 0:
            problems.append("data.cov_scale: must be positive")
    else:
        if not spec.path:
            problems.append("data.path: required")
        if kind == "corpus" and spec.embed_dim < 8:
            problems.append("data.embed_dim: must be at least 8")
    if problems:
        raise ConfigError("; ".join(problems))
    return spec


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "data" not in doc:
        raise ConfigError("data: required")
    cfg = RunConfig(data=_parse_data(doc["data"]))
    for k, v in doc.items():
        if k == "data":
            continue
        if k == "split":
            v = tuple(v)
        if k == "priors" and v is not None:
            v = tuple(v)
        setattr(cfg, k, v)
    problems = []
    if cfg.variant not in VARIANTS:
        problems.append(f"variant: must be one of {VARIANTS}")
    if cfg.iterations < 0:
        problems.append("iterations: must be nonnegative")
    if cfg.batch_size < 1:
        problems.append("batch_size: must be at least 1")
    if cfg.noise_dim < 1:
        problems.append("noise_dim: must be positive")
    if cfg.hidden < 1:
        problems.append("hidden: must be positive")
    if cfg.optimizer not in ("sgd", "adam"):
        problems.append("optimizer: must be sgd or adam")
    if cfg.learning_rate <= 0:
        problems.append("learning_rate: must be positive")
    if cfg.g_y_loss_mode not in G_Y_LOSS_MODES:
        problems.append(f"g_y_loss_mode: must be one of {G_Y_LOSS_MODES}")
    if cfg.eval_every < 0:
        problems.append("eval_every: must be nonnegative")
    if cfg.pairing not in ("nearest", "random"):
        problems.append("pairing: must be nearest or random")
    if cfg.repeats < 1:
        problems.append("repeats: must be at least 1")
    if len(cfg.split) != 3 or any(f < 0 for f in cfg.split) or abs(sum(cfg.split) - 1) > 1e-9:
        problems.append("split: three nonnegative fractions summing to 1")
    if cfg.priors is not None:
        if len(cfg.priors) != 2 or any(p < 0 for p in cfg.priors) or abs(sum(cfg.priors) - 1) > 1e-9:
            problems.append("priors: two nonnegative values summing to 1")
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from e
    return parse_config(doc)
