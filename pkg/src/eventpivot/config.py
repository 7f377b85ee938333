"""Flat key=value experiment configuration.

One file format covers corpus generation, model shape, and the training
schedule. Precedence is flag > file > default. Validation reports every
problem at once rather than stopping at the first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping

from .corpus import GenConfig
from .model import ModelConfig
from .pivots import PIVOT_MODES
from .training import TrainConfig

ENV_CONFIG = "EVENTPIVOT_CONFIG"


class ConfigError(ValueError):
    """One or more invalid configuration entries; the message lists all."""


@dataclass(frozen=True)
class KeySpec:
    kind: str                       # int | float | bool | str
    default: object
    choices: tuple | None = None
    help: str = ""


KEYS: dict[str, KeySpec] = {
    # corpus generation
    "corpus.n_types": KeySpec("int", 5, help="event types drawn from the catalog (2-5)"),
    "corpus.train_sents": KeySpec("int", 2000),
    "corpus.dev_sents": KeySpec("int", 300),
    "corpus.test_sents": KeySpec("int", 300),
    "corpus.trigger_lexicon_size": KeySpec("int", 0, help="total distinct trigger surfaces; 0 = all"),
    "corpus.multi_event_fraction": KeySpec("float", 0.30),
    "corpus.distractor_fraction": KeySpec("float", 0.25),
    "corpus.seed": KeySpec("int", 7),
    # model shape
    "model.dim": KeySpec("int", 64),
    "model.ffn_dim": KeySpec("int", 128),
    "model.max_len": KeySpec("int", 256),
    # label side
    "lsl.layers": KeySpec("int", 3),
    "lsl.heads": KeySpec("int", 4),
    "lsl.tau": KeySpec("float", 0.1),
    "lsl.mode": KeySpec("str", "straight_through", choices=PIVOT_MODES),
    "lsl.copy_bias": KeySpec("float", 12.0, help="identity anchor on the label selection; 0 disables"),
    # sentence side
    "tc.layers": KeySpec("int", 4),
    "tc.heads": KeySpec("int", 4),
    # schedule
    "train.lr": KeySpec("float", 3e-4),
    "train.batch_size": KeySpec("int", 8),
    "train.max_epochs": KeySpec("int", 50),
    "train.patience": KeySpec("int", 5),
    "train.dropout_keep": KeySpec("float", 0.9),
    "train.seed": KeySpec("int", 0),
    "train.no_labels": KeySpec("bool", False),
    "train.small_tc": KeySpec("bool", False),
    "train.eventful_only": KeySpec("bool", False),
    "train.clip_norm": KeySpec("float", 1.0),
}

_BOOL_WORDS = {"true": True, "1": True, "yes": True,
               "false": False, "0": False, "no": False}


def _convert(key: str, raw: str) -> object:
    spec = KEYS[key]
    if spec.kind == "int":
        return int(raw)
    if spec.kind == "float":
        return float(raw)
    if spec.kind == "bool":
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"not a boolean: {raw!r}")
        return _BOOL_WORDS[word]
    value = raw.strip()
    if spec.choices is not None and value not in spec.choices:
        raise ValueError(f"must be one of {spec.choices}, got {value!r}")
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Returns raw
    string values keyed by config key."""
    out: dict[str, str] = {}
    problems: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            problems.append(f"{source}:{lineno}: expected key = value, got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key in out:
            problems.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        out[key] = value
    if problems:
        raise ConfigError("\n".join(problems))
    return out


def parse_config_file(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as f:
        return parse_config_text(f.read(), source=str(path))


class Config:
    """Fully resolved configuration: every known key has a typed value."""

    def __init__(self, values: dict[str, object]):
        self.values = values

    def __getitem__(self, key: str):
        return self.values[key]

    def as_dict(self) -> dict[str, object]:
        return dict(sorted(self.values.items()))

    def gen_config(self) -> GenConfig:
        size = self["corpus.trigger_lexicon_size"]
        return GenConfig(
            n_types=self["corpus.n_types"],
            train_sents=self["corpus.train_sents"],
            dev_sents=self["corpus.dev_sents"],
            test_sents=self["corpus.test_sents"],
            trigger_lexicon_size=size if size else None,
            multi_event_fraction=self["corpus.multi_event_fraction"],
            distractor_fraction=self["corpus.distractor_fraction"],
            seed=self["corpus.seed"],
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            dim=self["model.dim"],
            lsl_layers=self["lsl.layers"],
            lsl_heads=self["lsl.heads"],
            tc_layers=self["tc.layers"],
            tc_heads=self["tc.heads"],
            ffn_dim=self["model.ffn_dim"],
            max_len=self["model.max_len"],
            tau=self["lsl.tau"],
            lsl_mode=self["lsl.mode"],
            use_labels=not self["train.no_labels"],
            drop_rate=1.0 - self["train.dropout_keep"],
            copy_bias=self["lsl.copy_bias"],
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self["train.lr"],
            batch_size=self["train.batch_size"],
            max_epochs=self["train.max_epochs"],
            patience=self["train.patience"],
            dropout_keep=self["train.dropout_keep"],
            tau=self["lsl.tau"],
            seed=self["train.seed"],
            bypass_lsl=self["lsl.mode"] == "bypass",
            no_labels=self["train.no_labels"],
            small_tc=self["train.small_tc"],
            eventful_only=self["train.eventful_only"],
            clip_norm=self["train.clip_norm"],
        )


def resolve_config(file_values: Mapping[str, str] | None = None,
                   overrides: Mapping[str, str] | None = None) -> Config:
    """Merge defaults, file values, and flag overrides into a Config,
    reporting every unknown key and bad value together."""
    problems: list[str] = []
    values: dict[str, object] = {k: spec.default for k, spec in KEYS.items()}
    for layer_name, layer in (("config file", file_values or {}),
                              ("override", overrides or {})):
        for key, raw in layer.items():
            if key not in KEYS:
                problems.append(f"unknown {layer_name} key: {key}")
                continue
            try:
                values[key] = _convert(key, raw)
            except ValueError as exc:
                problems.append(f"bad value for {key}: {exc}")
    if problems:
        raise ConfigError("\n".join(problems))
    return Config(values)


def load_config(path=None, overrides: Mapping[str, str] | None = None) -> Config:
    """Resolve from an optional file (or $EVENTPIVOT_CONFIG) plus overrides."""
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    file_values = parse_config_file(path) if path else None
    return resolve_config(file_values, overrides)


def default_config_text() -> str:
    lines = ["# eventpivot configuration (key = value; # starts a comment)"]
    for key, spec in KEYS.items():
        val = spec.default
        if spec.kind == "bool":
            val = "true" if val else "false"
        comment = f"  # {spec.help}" if spec.help else ""
        lines.append(f"{key} = {val}{comment}")
    return "\n".join(lines) + "\n"
