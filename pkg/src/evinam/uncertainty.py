"""Closed-form uncertainty readouts from evidential parameters.

Regression: the NIG marginal over the target is Student-t with 2*alpha
degrees of freedom, location gamma, and width sqrt(beta*(1+nu)/(alpha*nu)).
The width is the aleatoric uncertainty; nu**-0.5 is the epistemic one, since
nu counts the virtual observations backing the mean estimate.

Classification: the Dirichlet mean gives the class probabilities, vacuity
n_classes / strength is the epistemic signal, and the expected entropy of a
categorical drawn from the Dirichlet is the aleatoric one.

Everything here is plain-array arithmetic; no gradients are recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import digamma_values
from .exceptions import DomainError, InvalidInputError
from .heads import DirichletParams, NIGParams


@dataclass(frozen=True)
class PredictiveDist:
    """Student-t marginal: location, scale (width), degrees of freedom."""

    location: np.ndarray
    scale: np.ndarray
    dof: np.ndarray

    def validate(self) -> None:
        if np.min(np.asarray(self.scale), initial=np.inf) <= 0.0:
            raise DomainError("predictive scale must be > 0")
        if np.min(np.asarray(self.dof), initial=np.inf) <= 2.0:
            raise DomainError("degrees of freedom must exceed 2")


@dataclass(frozen=True)
class UncertaintyPair:
    """Aleatoric (data noise) and epistemic (model ignorance) magnitudes."""

    aleatoric: np.ndarray
    epistemic: np.ndarray


@dataclass(frozen=True)
class DirichletUncertainty:
    """Mean probabilities plus the two Dirichlet uncertainty readouts."""

    probs: np.ndarray
    vacuity: np.ndarray
    expected_entropy: np.ndarray


def predictive_dist(params: NIGParams) -> PredictiveDist:
    """The Student-t marginal implied by NIG parameters."""
    params.validate()
    gamma, nu, alpha, beta = params.arrays()
    scale = np.sqrt(beta * (1.0 + nu) / (alpha * nu))
    return PredictiveDist(location=gamma, scale=scale, dof=2.0 * alpha)


def regression_uncertainty(params: NIGParams) -> UncertaintyPair:
    """Aleatoric = predictive width; epistemic = nu**-0.5."""
    params.validate()
    _, nu, alpha, beta = params.arrays()
    aleatoric = np.sqrt(beta * (1.0 + nu) / (alpha * nu))
    epistemic = 1.0 / np.sqrt(nu)
    return UncertaintyPair(aleatoric=aleatoric, epistemic=epistemic)


def dirichlet_uncertainty(params: DirichletParams) -> DirichletUncertainty:
    """Probabilities alpha/S, vacuity C/S, and expected categorical entropy.

    The expected entropy under p ~ Dirichlet(alpha) has the closed form
    -sum_c (alpha_c / S) * (psi(alpha_c + 1) - psi(S + 1)).
    """
    params.validate()
    alpha = params.matrix()
    strength = alpha.sum(axis=1, keepdims=True)
    probs = alpha / strength
    vacuity = alpha.shape[1] / strength[:, 0]
    expected_entropy = -np.sum(
        probs * (digamma_values(alpha + 1.0) - digamma_values(strength + 1.0)),
        axis=1)
    return DirichletUncertainty(probs=probs, vacuity=vacuity,
                                expected_entropy=expected_entropy)


def per_feature_uncertainty(model, feature_index: int, grid: np.ndarray):
    """Uncertainty profile of a single feature over a grid of encoded values.

    Assembles partial parameters from the bias terms plus only this
    feature's contribution, then reads the uncertainties off the partial
    head.  For regression the result is an :class:`UncertaintyPair` over the
    grid; for classification a :class:`DirichletUncertainty` whose partial
    concentrations are one plus this feature's evidence.

    The grid is interpreted in the model's encoded input space and should
    stay within the range seen in training; extrapolated values answer a
    different question (what the model would claim there, not what it
    learned).
    """
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise InvalidInputError("grid must contain at least one value")
    n_features = len(model.feature_names)
    if not (0 <= int(feature_index) < n_features):
        raise InvalidInputError(
            f"feature_index {feature_index} out of range for {n_features} features")
    params = model.partial_params(int(feature_index), grid)
    if model.task == "regression":
        return regression_uncertainty(params)
    return dirichlet_uncertainty(params)
