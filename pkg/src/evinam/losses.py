"""Training losses for the evidential heads.

Regression: the exact negative log marginal likelihood of the target under
the Normal-Inverse-Gamma head (a Student-t density), plus a regularizer that
scales the prediction error, measured in units of the predictive width, by
the total evidence 2*nu + alpha.  Errors the model claims to be confident
about are penalized hardest, which pushes evidence down where the model is
wrong.

Classification: the expected Brier score under the Dirichlet (or, by
configuration, the expected cross-entropy), plus a KL term toward the
uniform Dirichlet computed on concentrations with the true class's evidence
removed.  The KL weight anneals linearly over the first epochs so the model
fits before it is asked to be humble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ConfigError, DomainError, InvalidInputError
from .heads import DirichletParams, NIGParams

CLASSIFICATION_VARIANTS = ("brier", "log")


@dataclass(frozen=True)
class LossConfig:
    """Loss hyperparameters.

    lam: weight of the regression evidence regularizer (>= 0).
    p: exponent on the width-scaled error in the regularizer (> 0).
    kl_anneal_epochs: epochs over which the classification KL weight ramps
        from 0 to 1; 0 means the full weight applies immediately.
    classification_variant: "brier" for the expected Brier score data term,
        "log" for the expected cross-entropy.
    """

    lam: float = 0.1
    p: float = 1.0
    kl_anneal_epochs: int = 10
    classification_variant: str = "brier"

    def validate(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ConfigError(f"lam must be finite and >= 0, got {self.lam}")
        if not (math.isfinite(self.p) and self.p > 0.0):
            raise ConfigError(f"p must be finite and > 0, got {self.p}")
        if int(self.kl_anneal_epochs) < 0:
            raise ConfigError(
                f"kl_anneal_epochs must be >= 0, got {self.kl_anneal_epochs}")
        if self.classification_variant not in CLASSIFICATION_VARIANTS:
            raise ConfigError(
                f"classification_variant must be one of {CLASSIFICATION_VARIANTS}, "
                f"got {self.classification_variant!r}")


@dataclass
class LossBreakdown:
    """Per-sample data term and regularizer plus the scalar objective.

    ``total`` is mean(nll) + weight * mean(reg), where the weight is the
    regularizer coefficient for regression and the annealed KL factor for
    classification.
    """

    nll: Tensor
    reg: Tensor
    total: Tensor


def _check_finite_targets(y: np.ndarray) -> None:
    if not np.isfinite(y).all():
        raise InvalidInputError("targets contain non-finite values")


def nig_nll(y, params: NIGParams) -> Tensor:
    """Per-sample negative log marginal likelihood of the NIG head.

    The marginal over the target is Student-t with 2*alpha degrees of
    freedom, location gamma, and squared width beta*(1+nu)/(alpha*nu);
    this evaluates its exact negative log density.
    """
    params.validate()
    y_t = ad._as_tensor(y)
    _check_finite_targets(y_t.data)
    gamma, nu, alpha, beta = params.gamma, params.nu, params.alpha, params.beta
    omega = 2.0 * ad._as_tensor(beta) * (1.0 + ad._as_tensor(nu))
    resid = y_t - ad._as_tensor(gamma)
    nll = (
        0.5 * ad.log(math.pi / ad._as_tensor(nu))
        - ad._as_tensor(alpha) * ad.log(omega)
        + (ad._as_tensor(alpha) + 0.5) * ad.log(resid * resid * ad._as_tensor(nu) + omega)
        + ad.log_gamma(ad._as_tensor(alpha))
        - ad.log_gamma(ad._as_tensor(alpha) + 0.5)
    )
    return nll


def evidential_regularizer(y, params: NIGParams, config: LossConfig) -> Tensor:
    """Per-sample penalty |(y - gamma) / width|^p * (2*nu + alpha).

    The error is scaled by the predictive width (the aleatoric uncertainty),
    so the penalty is in signal-to-noise units rather than target units.
    """
    config.validate()
    params.validate()
    y_t = ad._as_tensor(y)
    _check_finite_targets(y_t.data)
    gamma, nu, alpha, beta = params.gamma, params.nu, params.alpha, params.beta
    width_sq = (ad._as_tensor(beta) * (1.0 + ad._as_tensor(nu))) / (
        ad._as_tensor(alpha) * ad._as_tensor(nu))
    width = width_sq ** 0.5
    scaled = ad.absolute((y_t - ad._as_tensor(gamma)) / width)
    if config.p != 1.0:
        scaled = scaled ** float(config.p)
    evidence = 2.0 * ad._as_tensor(nu) + ad._as_tensor(alpha)
    return scaled * evidence


def regression_loss(y, params: NIGParams, config: LossConfig) -> LossBreakdown:
    """Full regression objective: mean NLL plus lam * mean regularizer."""
    nll = nig_nll(y, params)
    reg = evidential_regularizer(y, params, config)
    total = ad.tensor_mean(nll) + float(config.lam) * ad.tensor_mean(reg)
    return LossBreakdown(nll=nll, reg=reg, total=total)


def kl_dirichlet_uniform(alphas: Sequence[Tensor]) -> Tensor:
    """Per-sample KL divergence from Dirichlet(alphas) to the uniform Dirichlet."""
    n_classes = len(alphas)
    if n_classes < 2:
        raise InvalidInputError("KL needs at least two classes")
    strength = alphas[0]
    for a in alphas[1:]:
        strength = strength + a
    kl = ad.log_gamma(strength) - math.lgamma(n_classes)
    for a in alphas:
        kl = kl - ad.log_gamma(a)
    psi_strength = ad.digamma(strength)
    for a in alphas:
        kl = kl + (a - 1.0) * (ad.digamma(a) - psi_strength)
    return kl


def anneal_factor(epoch: int, kl_anneal_epochs: int) -> float:
    """Linear ramp from 0 at epoch 0 to 1 at kl_anneal_epochs."""
    if epoch < 0:
        raise InvalidInputError(f"epoch must be >= 0, got {epoch}")
    if kl_anneal_epochs <= 0:
        return 1.0
    return min(1.0, epoch / float(kl_anneal_epochs))


def _check_one_hot(y_onehot: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.asarray(y_onehot, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != n_classes:
        raise InvalidInputError(
            f"one-hot targets must have shape [n, {n_classes}], got {y.shape}")
    if not np.isin(y, (0.0, 1.0)).all() or not np.all(y.sum(axis=1) == 1.0):
        raise InvalidInputError("targets must be one-hot rows of 0s and a single 1")
    return y


def dec_loss(y_onehot, params: DirichletParams, epoch: int,
             config: LossConfig) -> LossBreakdown:
    """Classification objective at a given epoch.

    Data term per sample: expected Brier score sum_c [(y_c - p_c)^2 +
    Var(p_c)] with p_c = alpha_c / S (or expected cross-entropy
    sum_c y_c (psi(S) - psi(alpha_c)) for the "log" variant).  Regularizer:
    KL to the uniform Dirichlet on concentrations with the true class's
    evidence removed, weighted by the anneal factor.
    """
    config.validate()
    params.validate()
    n_classes = params.n_classes
    y = _check_one_hot(y_onehot, n_classes)
    first = ad._as_tensor(params.alphas[0])
    if y.shape[0] != (first.data.shape[0] if first.data.ndim else 1):
        raise InvalidInputError(
            f"targets ({y.shape[0]} rows) do not match batch size")

    alphas = [ad._as_tensor(a) for a in params.alphas]
    strength = alphas[0]
    for a in alphas[1:]:
        strength = strength + a

    data_term: Tensor | None = None
    if config.classification_variant == "brier":
        s1 = strength + 1.0
        for c in range(n_classes):
            y_c = Tensor(y[:, c])
            p_c = alphas[c] / strength
            term = (y_c - p_c) ** 2.0 + (alphas[c] * (strength - alphas[c])) / (
                strength * strength * s1)
            data_term = term if data_term is None else data_term + term
    else:
        psi_strength = ad.digamma(strength)
        for c in range(n_classes):
            y_c = Tensor(y[:, c])
            term = y_c * (psi_strength - ad.digamma(alphas[c]))
            data_term = term if data_term is None else data_term + term

    # Remove the true class's evidence before the KL so correct confidence
    # is not penalized: concentration becomes 1 for the true class.
    misleading = []
    for c in range(n_classes):
        y_c = y[:, c]
        misleading.append(Tensor(y_c) + Tensor(1.0 - y_c) * alphas[c])
    kl = kl_dirichlet_uniform(misleading)

    weight = anneal_factor(int(epoch), int(config.kl_anneal_epochs))
    total = ad.tensor_mean(data_term) + weight * ad.tensor_mean(kl)
    return LossBreakdown(nll=data_term, reg=kl, total=total)
