"""Model persistence: a versioned, deterministic JSON format.

Weights are float64 arrays encoded as base64 of their little-endian bytes,
so a round trip is bitwise exact.  Keys are sorted and nothing
time-dependent is stored, which makes saving the same trained estimator
twice produce byte-identical files.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .data import Normalizer
from .exceptions import ModelFormatError
from .model import EviNamModel

FORMAT_NAME = "evinam-model"
FORMAT_VERSION = 1


def _encode_array(arr: np.ndarray) -> dict:
    # asarray (not ascontiguousarray) so 0-d values keep their shape; astype
    # produces a contiguous copy for tobytes
    arr = np.asarray(arr, dtype=np.float64)
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.astype("<f8").tobytes()).decode("ascii"),
    }


def _decode_array(payload: dict) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in payload["shape"])
        raw = base64.b64decode(payload["data"].encode("ascii"), validate=True)
        arr = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    except (KeyError, TypeError, ValueError) as err:
        raise ModelFormatError(f"bad array payload: {err}") from err
    if arr.size != int(np.prod(shape)):
        raise ModelFormatError(
            f"array payload length {arr.size} does not match shape {shape}")
    return arr.reshape(shape)


def _net_weights(model: EviNamModel) -> dict:
    nets = []
    for net in model.nets:
        nets.append({
            "trunks": [[{"w": _encode_array(w.data), "b": _encode_array(b.data)}
                        for (w, b) in trunk] for trunk in net.trunks],
            "heads": [{"w": _encode_array(w.data), "b": _encode_array(b.data)}
                      for (w, b) in net.heads],
        })
    payload = {"nets": nets}
    if model.biases is not None:
        payload["biases"] = [_encode_array(b.data) for b in model.biases]
    return payload


def _load_net_weights(model: EviNamModel, payload: dict) -> None:
    nets = payload.get("nets")
    if not isinstance(nets, list) or len(nets) != len(model.nets):
        raise ModelFormatError("weight payload does not match the model's nets")

    def fill(tensor, entry):
        arr = _decode_array(entry)
        if arr.shape != tensor.data.shape:
            raise ModelFormatError(
                f"weight shape {arr.shape} does not match expected {tensor.data.shape}")
        tensor.data = arr

    try:
        for net, stored in zip(model.nets, nets):
            if len(stored["trunks"]) != len(net.trunks):
                raise ModelFormatError("trunk count mismatch")
            for trunk, stored_trunk in zip(net.trunks, stored["trunks"]):
                if len(stored_trunk) != len(trunk):
                    raise ModelFormatError("trunk depth mismatch")
                for (w, b), layer in zip(trunk, stored_trunk):
                    fill(w, layer["w"])
                    fill(b, layer["b"])
            if len(stored["heads"]) != len(net.heads):
                raise ModelFormatError("head count mismatch")
            for (w, b), layer in zip(net.heads, stored["heads"]):
                fill(w, layer["w"])
                fill(b, layer["b"])
        if model.biases is not None:
            stored_biases = payload.get("biases")
            if not isinstance(stored_biases, list) or len(stored_biases) != len(model.biases):
                raise ModelFormatError("bias payload missing or wrong length")
            for b, entry in zip(model.biases, stored_biases):
                fill(b, entry)
    except (KeyError, TypeError) as err:
        raise ModelFormatError(f"malformed weight payload: {err}") from err


def _json_safe_params(params: dict) -> dict:
    out = {}
    for key, value in params.items():
        if isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, np.ndarray):
            value = value.tolist()
        elif isinstance(value, (np.integer,)):
            value = int(value)
        elif isinstance(value, (np.floating,)):
            value = float(value)
        out[key] = value
    return out


def model_to_dict(estimator, dataset_schema: dict | None = None) -> dict:
    """Serialize a fitted estimator (and optional dataset schema) to a dict."""
    model: EviNamModel | None = getattr(estimator, "model_", None)
    if model is None:
        raise ModelFormatError("estimator is not fitted; nothing to save")
    normalizer: Normalizer | None = getattr(estimator, "normalizer_", None)
    payload = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "task": model.task,
        "estimator_class": type(estimator).__name__,
        "params": _json_safe_params(estimator.get_params(deep=False)),
        "raw_feature_names": list(getattr(estimator, "feature_names_")),
        "model_feature_names": list(model.feature_names),
        "class_names": list(model.class_names) if model.class_names else None,
        "normalizer": normalizer.to_dict() if normalizer is not None else None,
        "weights": _net_weights(model),
        "dataset_schema": dataset_schema,
    }
    return payload


def model_from_dict(payload: dict):
    """Rebuild a fitted estimator from :func:`model_to_dict` output.

    Returns ``(estimator, dataset_schema)``.  Raises
    :class:`ModelFormatError` for wrong format names, unsupported versions,
    or weight payloads that do not match the declared architecture.
    """
    from .estimators import EviNamClassifier, EviNamRegressor

    if not isinstance(payload, dict):
        raise ModelFormatError("model payload must be a JSON object")
    if payload.get("format") != FORMAT_NAME:
        raise ModelFormatError(
            f"not a model file (format={payload.get('format')!r})")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version!r}")
    classes = {"EviNamRegressor": EviNamRegressor, "EviNamClassifier": EviNamClassifier}
    est_cls = classes.get(payload.get("estimator_class"))
    if est_cls is None:
        raise ModelFormatError(
            f"unknown estimator class {payload.get('estimator_class')!r}")
    try:
        params = dict(payload["params"])
        if "hidden_sizes" in params:
            params["hidden_sizes"] = tuple(params["hidden_sizes"])
        estimator = est_cls(**params)
        task = payload["task"]
        model_features = list(payload["model_feature_names"])
        class_names = payload.get("class_names")
        model = EviNamModel.build(
            task=task, feature_names=model_features,
            hidden_sizes=tuple(int(h) for h in params.get("hidden_sizes", (64, 32))),
            activation=params.get("activation", "relu"),
            separate_nets=bool(params.get("separate_nets", False)),
            seed=int(params.get("random_state", 0)),
            link_at_sum=bool(params.get("link_at_sum", False)),
            evidence_link=params.get("evidence_link", "softplus"),
            class_names=tuple(class_names) if class_names else None)
        _load_net_weights(model, payload["weights"])
        estimator.model_ = model
        estimator.feature_names_ = list(payload["raw_feature_names"])
        estimator.n_features_in_ = len(estimator.feature_names_)
        norm = payload.get("normalizer")
        estimator.normalizer_ = Normalizer.from_dict(norm) if norm else None
        if task == "classification":
            estimator.classes_ = np.asarray(class_names)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ModelFormatError(f"malformed model payload: {err}") from err
    return estimator, payload.get("dataset_schema")


def dumps_model(estimator, dataset_schema: dict | None = None) -> str:
    """Deterministic JSON text for a fitted estimator."""
    payload = model_to_dict(estimator, dataset_schema)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def save_model(path, estimator, dataset_schema: dict | None = None) -> None:
    text = dumps_model(estimator, dataset_schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def load_model(path):
    """Read a model file; returns ``(estimator, dataset_schema)``."""
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as err:
        raise ModelFormatError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{path} is not valid JSON: {err}") from err
    return model_from_dict(payload)
