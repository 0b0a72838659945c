"""Run configuration: JSON in, validated and fully-defaulted dict out.

A run config describes one experiment end to end: where the data comes from
(a CSV file or a synthetic generator), how it is split, the model
architecture, the loss, and the optimizer.  Resolution fills every omitted
key with its default and rejects unknown keys, so the resolved config
written next to a trained model is a complete, reproducible record.
"""

from __future__ import annotations

import copy
import json

from .exceptions import ConfigError

DEFAULT_CONFIG = {
    "task": "regression",
    "dataset": {
        "kind": "synthetic",
        "path": None,
        "target": None,
        "categorical": [],
        "synthetic": {"name": "cubic-1d", "n": 1000, "seed": 0, "params": {}},
        "split": {"train": 0.72, "val": 0.18, "test": 0.10, "seed": 0},
    },
    "model": {
        "hidden_sizes": [64, 32],
        "activation": "relu",
        "separate_nets": False,
        "link_at_sum": False,
        "evidence_link": "softplus",
    },
    "loss": {
        "lam": 0.1,
        "p": 1.0,
        "kl_anneal_epochs": 10,
        "classification_variant": "brier",
    },
    "train": {
        "lr": 1e-3,
        "batch_size": 128,
        "max_epochs": 5000,
        "patience": 50,
        "min_delta": 1e-6,
        "scheduler_factor": 0.5,
        "scheduler_patience": 10,
        "min_lr": 1e-6,
        "seed": 0,
    },
    "explain": {"grid_size": 100, "smooth": False},
}

SYNTH_DEFAULTS = {"name": "cubic-1d", "n": 1000, "seed": 0, "params": {}}


def _merge(defaults: dict, override: dict, path: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and defaults[key] and key != "params":
            if not isinstance(value, dict):
                raise ConfigError(f"{path + key!r} must be an object")
            out[key] = _merge(defaults[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(payload: dict) -> dict:
    """Fill defaults, reject unknown keys, and sanity-check the structure.

    Numeric ranges are validated where the values are consumed (dataclass
    ``validate`` methods); this layer guarantees shape and spelling.
    """
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    cfg = _merge(DEFAULT_CONFIG, payload, "")
    if cfg["task"] not in ("regression", "classification"):
        raise ConfigError(f"task must be regression or classification, got {cfg['task']!r}")
    ds = cfg["dataset"]
    if ds["kind"] not in ("synthetic", "csv"):
        raise ConfigError(f"dataset.kind must be synthetic or csv, got {ds['kind']!r}")
    if ds["kind"] == "csv":
        if not ds["path"]:
            raise ConfigError("dataset.path is required for csv datasets")
        if not ds["target"]:
            raise ConfigError("dataset.target is required for csv datasets")
    if not isinstance(ds["categorical"], list):
        raise ConfigError("dataset.categorical must be a list of column names")
    synth = ds["synthetic"]
    if not isinstance(synth.get("params", {}), dict):
        raise ConfigError("dataset.synthetic.params must be an object")
    if not isinstance(cfg["model"]["hidden_sizes"], list) or not cfg["model"]["hidden_sizes"]:
        raise ConfigError("model.hidden_sizes must be a non-empty list")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return resolve_config(payload)


def override_seed(cfg: dict, seed: int | None) -> dict:
    """Apply a command-line seed to every seeded stage of the run."""
    if seed is None:
        return cfg
    cfg = copy.deepcopy(cfg)
    cfg["dataset"]["synthetic"]["seed"] = int(seed)
    cfg["dataset"]["split"]["seed"] = int(seed)
    cfg["train"]["seed"] = int(seed)
    return cfg
