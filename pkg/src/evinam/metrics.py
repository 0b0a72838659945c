"""Evaluation metrics for both heads.

The regression trio is MAE, mean NLL under the predictive Student-t, and
CRPS; the classification quartet is accuracy, multiclass Brier score,
one-vs-rest AUROC, and expected calibration error.  CRPS uses the closed
form for the Student-t distribution, so no sampling is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln
from scipy.stats import rankdata
from scipy.stats import t as student_t

from . import losses
from .exceptions import DomainError, InvalidInputError
from .heads import NIGParams
from .uncertainty import PredictiveDist

__all__ = [
    "MetricReport",
    "mae",
    "r_squared",
    "nll_metric",
    "crps_student_t",
    "accuracy",
    "brier_score",
    "auroc_ovr",
    "expected_calibration_error",
    "regression_report",
    "classification_report",
]


@dataclass
class MetricReport:
    """Named metric values over a fixed evaluation set."""

    values: dict[str, float]
    count: int

    def to_dict(self) -> dict:
        return {"count": self.count,
                "metrics": {k: float(v) for k, v in sorted(self.values.items())}}


def _column(y, name: str) -> np.ndarray:
    arr = np.asarray(y, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInputError(f"{name} must not be empty")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def mae(y, predictions) -> float:
    y = _column(y, "targets")
    pred = _column(predictions, "predictions")
    if y.shape != pred.shape:
        raise InvalidInputError("targets and predictions differ in length")
    return float(np.mean(np.abs(y - pred)))


def r_squared(y, predictions) -> float:
    """Coefficient of determination; requires non-constant targets."""
    y = _column(y, "targets")
    pred = _column(predictions, "predictions")
    if y.shape != pred.shape:
        raise InvalidInputError("targets and predictions differ in length")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DomainError("R^2 is undefined for constant targets")
    ss_res = float(np.sum((y - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def nll_metric(y, params: NIGParams) -> float:
    """Mean negative log-likelihood under the predictive Student-t."""
    y = _column(y, "targets")
    per_sample = losses.nig_nll(y, params)
    return float(np.mean(per_sample.data))


def crps_student_t(y, dist: PredictiveDist) -> np.ndarray:
    """Closed-form CRPS of a location-scale Student-t, elementwise.

    For standardized z = (y - location) / scale and dof nu > 1:

        scale * [ z * (2 F_nu(z) - 1) + 2 f_nu(z) (nu + z^2) / (nu - 1)
                  - 2 sqrt(nu) B(1/2, nu - 1/2) / ((nu - 1) B(1/2, nu/2)^2) ]

    with F/f the standard-t cdf/pdf and B the beta function.  The mean
    absolute moment only exists for nu > 1, below that CRPS is undefined.
    """
    y = np.asarray(y, dtype=np.float64)
    loc = np.asarray(dist.location, dtype=np.float64)
    scale = np.asarray(dist.scale, dtype=np.float64)
    dof = np.asarray(dist.dof, dtype=np.float64)
    if y.size == 0:
        raise InvalidInputError("targets must not be empty")
    if np.min(scale, initial=np.inf) <= 0.0:
        raise DomainError("scale must be > 0")
    if np.min(dof, initial=np.inf) <= 1.0:
        raise DomainError("CRPS of a Student-t requires dof > 1")
    z = (y - loc) / scale
    cdf = student_t.cdf(z, df=dof)
    pdf = student_t.pdf(z, df=dof)
    const = (2.0 * np.sqrt(dof) / (dof - 1.0)) * np.exp(
        betaln(0.5, dof - 0.5) - 2.0 * betaln(0.5, dof / 2.0))
    value = z * (2.0 * cdf - 1.0) + 2.0 * pdf * (dof + z * z) / (dof - 1.0) - const
    return scale * value


def _check_probs(labels, probs) -> tuple[np.ndarray, np.ndarray]:
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise InvalidInputError("probabilities must be a non-empty [n, classes] matrix")
    if labels.shape != (probs.shape[0],):
        raise InvalidInputError("labels and probabilities differ in length")
    labels = labels.astype(np.int64)
    if labels.min() < 0 or labels.max() >= probs.shape[1]:
        raise InvalidInputError("label index out of range")
    if not np.isfinite(probs).all() or (probs < 0).any():
        raise InvalidInputError("probabilities must be finite and non-negative")
    return labels, probs


def accuracy(labels, probs) -> float:
    labels, probs = _check_probs(labels, probs)
    return float(np.mean(probs.argmax(axis=1) == labels))


def brier_score(labels, probs) -> float:
    """Multiclass Brier score: mean over samples of sum_c (p_c - y_c)^2."""
    labels, probs = _check_probs(labels, probs)
    onehot = np.eye(probs.shape[1])[labels]
    return float(np.mean(np.sum((probs - onehot) ** 2, axis=1)))


def auroc_ovr(labels, probs) -> float:
    """Macro one-vs-rest AUROC via the rank statistic; ties get mid-ranks.

    Classes absent from the labels are skipped; if no class has both a
    positive and a negative example the score is undefined.
    """
    labels, probs = _check_probs(labels, probs)
    aucs = []
    for c in range(probs.shape[1]):
        positive = labels == c
        n_pos = int(positive.sum())
        n_neg = positive.size - n_pos
        if n_pos == 0 or n_neg == 0:
            continue
        ranks = rankdata(probs[:, c])
        u_stat = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
        aucs.append(u_stat / (n_pos * n_neg))
    if not aucs:
        raise InvalidInputError("AUROC needs a class with both outcomes present")
    return float(np.mean(aucs))


def expected_calibration_error(labels, probs, n_bins: int = 10) -> float:
    """Top-label ECE over equal-width confidence bins.

    Bins partition [0, 1]; each contributes its sample share times the
    absolute gap between mean confidence and accuracy inside the bin.
    """
    labels, probs = _check_probs(labels, probs)
    if n_bins < 1:
        raise InvalidInputError(f"n_bins must be >= 1, got {n_bins}")
    confidence = probs.max(axis=1)
    predicted = probs.argmax(axis=1)
    correct = (predicted == labels).astype(np.float64)
    bins = np.clip((confidence * n_bins).astype(np.int64), 0, n_bins - 1)
    ece = 0.0
    n = labels.size
    for b in range(n_bins):
        inside = bins == b
        count = int(inside.sum())
        if count == 0:
            continue
        gap = abs(float(confidence[inside].mean()) - float(correct[inside].mean()))
        ece += (count / n) * gap
    return float(ece)


def regression_report(y, params: NIGParams) -> MetricReport:
    """MAE, mean NLL, mean CRPS, and R^2 against the NIG head's marginal."""
    from .uncertainty import predictive_dist

    y = _column(y, "targets")
    gamma = params.arrays()[0]
    dist = predictive_dist(params)
    values = {
        "mae": mae(y, gamma),
        "nll": nll_metric(y, params),
        "crps": float(np.mean(crps_student_t(y, dist))),
        "r2": r_squared(y, gamma),
    }
    return MetricReport(values=values, count=int(y.size))


def classification_report(labels, probs) -> MetricReport:
    """Accuracy, Brier, macro AUROC, and calibration error from probabilities."""
    labels, probs = _check_probs(labels, probs)
    values = {
        "accuracy": accuracy(labels, probs),
        "brier": brier_score(labels, probs),
        "auroc": auroc_ovr(labels, probs),
        "ece": expected_calibration_error(labels, probs),
    }
    return MetricReport(values=values, count=int(labels.size))
