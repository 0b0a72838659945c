"""Shape-curve construction: what each feature contributes, with bands.

A shape curve sweeps one raw feature over its observed range while reading
the model's partial head (bias terms plus that feature alone), giving the
feature's contribution curve and its aleatoric/epistemic bands, plus a
histogram of the training values so readers can see where the curve is
supported by data.  Optional LOWESS smoothing is cosmetic and kept separate
from the raw values.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInputError
from .smoothing import lowess
from .uncertainty import per_feature_uncertainty

HISTOGRAM_BINS = 30
SMOOTH_FRACTION = 0.3


def _listify(arr) -> list[float]:
    return [float(v) for v in np.asarray(arr, dtype=np.float64).ravel()]


def shape_curve(estimator, raw_values: np.ndarray, feature_name: str,
                grid_size: int = 100, smooth: bool = False) -> dict:
    """Build one feature's curve payload from its observed raw values.

    ``raw_values`` are the feature's values in original units (typically the
    training column); the grid spans their range.  The curve reports the
    feature's post-link contribution to the location parameter (regression)
    or per-class evidence (classification), along with uncertainty bands
    from the partial head.
    """
    estimator._check_fitted()
    model = estimator.model_
    if feature_name not in model.feature_names:
        raise InvalidInputError(
            f"feature {feature_name!r} not among model features {model.feature_names}")
    j = model.feature_names.index(feature_name)
    raw_values = np.asarray(raw_values, dtype=np.float64).ravel()
    if raw_values.size < 2:
        raise InvalidInputError("need at least two observed values for a curve")
    if int(grid_size) < 2:
        raise InvalidInputError(f"grid_size must be >= 2, got {grid_size}")
    lo, hi = float(raw_values.min()), float(raw_values.max())
    if not lo < hi:
        raise InvalidInputError(f"feature {feature_name!r} is constant; no curve")
    grid_raw = np.linspace(lo, hi, int(grid_size))

    norm = getattr(estimator, "normalizer_", None)
    if norm is not None and norm.scaled[norm.names.index(feature_name)]:
        full_index = norm.names.index(feature_name)
        grid_encoded = (grid_raw - norm.mean[full_index]) / norm.std[full_index]
    else:
        grid_encoded = grid_raw.copy()

    counts, edges = np.histogram(raw_values, bins=HISTOGRAM_BINS)
    payload: dict = {
        "feature": feature_name,
        "grid": _listify(grid_raw),
        "grid_encoded": _listify(grid_encoded),
        "histogram": {
            "bin_edges": _listify(edges),
            "counts": [int(c) for c in counts],
        },
    }

    profile = per_feature_uncertainty(model, j, grid_encoded)
    if model.task == "regression":
        outputs = model.nets[j].forward(_column_tensor(grid_encoded))
        contribution = model.links.link("gamma").np_fn(outputs[0].data)
        payload["contribution"] = _listify(contribution)
        payload["aleatoric"] = _listify(profile.aleatoric)
        payload["epistemic"] = _listify(profile.epistemic)
        if smooth:
            payload["smoothed"] = {
                "contribution": _listify(lowess(grid_raw, contribution, SMOOTH_FRACTION)),
                "aleatoric": _listify(lowess(grid_raw, profile.aleatoric, SMOOTH_FRACTION)),
                "epistemic": _listify(lowess(grid_raw, profile.epistemic, SMOOTH_FRACTION)),
            }
    else:
        from .heads import LINKS

        outputs = model.nets[j].forward(_column_tensor(grid_encoded))
        link_fn = LINKS[model.evidence_link].np_fn
        contributions = {
            str(cname): _listify(link_fn(outputs[c].data))
            for c, cname in enumerate(model.class_names)
        }
        payload["contribution_per_class"] = contributions
        payload["vacuity"] = _listify(profile.vacuity)
        payload["expected_entropy"] = _listify(profile.expected_entropy)
        if smooth:
            payload["smoothed"] = {
                "vacuity": _listify(lowess(grid_raw, profile.vacuity, SMOOTH_FRACTION)),
                "expected_entropy": _listify(
                    lowess(grid_raw, profile.expected_entropy, SMOOTH_FRACTION)),
            }
    return payload


def _column_tensor(values: np.ndarray):
    from .autodiff import Tensor

    return Tensor(np.asarray(values, dtype=np.float64).reshape(-1, 1))
