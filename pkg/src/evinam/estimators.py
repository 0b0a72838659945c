"""Scikit-learn style estimators wrapping the evidential additive model.

``EviNamRegressor`` and ``EviNamClassifier`` follow the usual contract:
hyperparameters are constructor arguments stored verbatim (so ``get_params``
and ``set_params`` work), ``fit`` learns and returns ``self``, and fitted
state lives in trailing-underscore attributes.  Beyond ``predict`` they
expose the evidential extras: full distribution parameters, aleatoric and
epistemic uncertainty, and exact per-feature contribution tables.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin

from . import validation
from .data import Normalizer
from .exceptions import InvalidInputError
from .heads import ContributionTable, NIGParams
from .losses import LossConfig, dec_loss, regression_loss
from .model import EviNamModel
from .training import TrainConfig, TrainReport, train_model
from .uncertainty import (DirichletUncertainty, PredictiveDist,
                          UncertaintyPair, dirichlet_uncertainty,
                          per_feature_uncertainty, predictive_dist,
                          regression_uncertainty)


class _EviNamBase(BaseEstimator):
    """Shared fit plumbing; subclasses provide the loss and target encoding."""

    task = ""

    def _split_for_validation(self, x, y, validation_data):
        if validation_data is not None:
            x_val, y_val = validation_data
            x_val = validation.check_matrix(x_val, "validation X")
            if x_val.shape[1] != x.shape[1]:
                raise InvalidInputError("validation X width differs from X")
            return x, y, x_val, y_val
        n = x.shape[0]
        n_val = max(1, int(np.floor(n * float(self.val_fraction))))
        if n - n_val < 1:
            raise InvalidInputError(
                f"val_fraction={self.val_fraction} leaves no training rows for n={n}")
        order = np.random.default_rng(self.random_state).permutation(n)
        val_idx, train_idx = order[:n_val], order[n_val:]
        return x[train_idx], y[train_idx], x[val_idx], y[val_idx]

    def _fit_normalizer(self, x_train, names, y_train=None):
        if not self.normalize:
            self.normalizer_ = None
            return names
        mask = validation.resolve_numeric_mask(self.numeric_features, x_train.shape[1])
        self.normalizer_ = Normalizer.fit(x_train, names, mask, y=y_train)
        return self.normalizer_.kept_names()

    def _encode_x(self, x) -> np.ndarray:
        if self.normalizer_ is None:
            return x
        return self.normalizer_.transform(x)

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr, batch_size=self.batch_size, max_epochs=self.max_epochs,
            patience=self.patience, min_delta=self.min_delta,
            scheduler_factor=self.scheduler_factor,
            scheduler_patience=self.scheduler_patience, min_lr=self.min_lr,
            seed=self.random_state, loss=self._loss_config())

    def _check_fitted(self) -> None:
        if getattr(self, "model_", None) is None:
            raise InvalidInputError("estimator is not fitted; call fit first")

    def _model_input(self, x) -> np.ndarray:
        self._check_fitted()
        x = validation.check_matrix(x)
        if x.shape[1] != self.n_features_in_:
            raise InvalidInputError(
                f"expected {self.n_features_in_} features, got {x.shape[1]}")
        return self._encode_x(x)

    def contributions(self, x) -> list[ContributionTable]:
        """Exact per-feature decomposition for every row of ``x``."""
        encoded = self._model_input(x)
        return [self.model_.contributions(row) for row in encoded]

    def feature_profile(self, feature_index: int, grid):
        """Uncertainty profile of one encoded feature over a grid of values.

        The grid is given in the model's encoded space (i.e. normalized
        units when the estimator normalizes).
        """
        self._check_fitted()
        return per_feature_uncertainty(self.model_, feature_index, grid)


class EviNamRegressor(RegressorMixin, _EviNamBase):
    """Additive evidential regression with a Normal-Inverse-Gamma head.

    Each feature's shape net emits raw values for (gamma, nu, alpha, beta);
    constraint links apply per term and the head sums them, so parameters
    decompose exactly into per-feature contributions.  The predictive
    marginal is a Student-t whose width is the aleatoric uncertainty, while
    nu**-0.5 tracks epistemic uncertainty.
    """

    task = "regression"

    def __init__(self, hidden_sizes=(64, 32), activation="relu",
                 separate_nets=False, link_at_sum=False, lam=0.1, p=1.0,
                 lr=1e-3, batch_size=128, max_epochs=5000, patience=50,
                 min_delta=1e-6, scheduler_factor=0.5, scheduler_patience=10,
                 min_lr=1e-6, val_fraction=0.2, normalize=True,
                 numeric_features=None, random_state=0):
        self.hidden_sizes = hidden_sizes
        self.activation = activation
        self.separate_nets = separate_nets
        self.link_at_sum = link_at_sum
        self.lam = lam
        self.p = p
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.min_delta = min_delta
        self.scheduler_factor = scheduler_factor
        self.scheduler_patience = scheduler_patience
        self.min_lr = min_lr
        self.val_fraction = val_fraction
        self.normalize = normalize
        self.numeric_features = numeric_features
        self.random_state = random_state

    def _loss_config(self) -> LossConfig:
        return LossConfig(lam=self.lam, p=self.p)

    def fit(self, X, y, validation_data=None, feature_names=None):
        """Fit on (X, y); optionally use an explicit (X_val, y_val) pair.

        Without ``validation_data`` a ``val_fraction`` share of the rows is
        held out using ``random_state``.  Normalization statistics come from
        the training rows only.
        """
        x = validation.check_matrix(X, min_rows=2)
        y = validation.check_regression_target(y, x.shape[0])
        names = validation.check_feature_names(feature_names, x.shape[1])
        x_tr, y_tr, x_val, y_val = self._split_for_validation(x, y, validation_data)
        y_val = validation.check_regression_target(y_val, x_val.shape[0])

        kept = self._fit_normalizer(x_tr, names, y_train=y_tr)
        x_tr_n, x_val_n = self._encode_x(x_tr), self._encode_x(x_val)
        if self.normalizer_ is not None:
            y_tr = self.normalizer_.transform_target(y_tr)
            y_val = self.normalizer_.transform_target(y_val)

        self.model_ = EviNamModel.build(
            task="regression", feature_names=kept,
            hidden_sizes=tuple(int(h) for h in self.hidden_sizes),
            activation=self.activation, separate_nets=self.separate_nets,
            seed=self.random_state, link_at_sum=self.link_at_sum)
        loss_cfg = self._loss_config()

        def loss_fn(params, y_batch, epoch):
            return regression_loss(y_batch, params, loss_cfg)

        self.train_report_: TrainReport = train_model(
            self.model_, x_tr_n, y_tr, x_val_n, y_val, self._train_config(), loss_fn)
        self.n_features_in_ = x.shape[1]
        self.feature_names_ = names
        return self

    def predict_params(self, X) -> NIGParams:
        """NIG parameters on the normalized target scale, as plain arrays."""
        encoded = self._model_input(X)
        params = self.model_.forward(encoded)
        gamma, nu, alpha, beta = params.arrays()
        return NIGParams(gamma=gamma, nu=nu, alpha=alpha, beta=beta)

    def predict(self, X) -> np.ndarray:
        """Point prediction: the marginal's location, in target units."""
        gamma = self.predict_params(X).arrays()[0]
        if self.normalizer_ is None:
            return gamma
        return self.normalizer_.inverse_target(gamma)

    def predict_dist(self, X, denormalize: bool = False) -> PredictiveDist:
        """The Student-t marginal; optionally mapped back to target units."""
        dist = predictive_dist(self.predict_params(X))
        if not denormalize or self.normalizer_ is None:
            return dist
        std = self.normalizer_.target_std
        return PredictiveDist(
            location=self.normalizer_.inverse_target(dist.location),
            scale=dist.scale * std, dof=dist.dof)

    def uncertainty(self, X, denormalize: bool = False) -> UncertaintyPair:
        """Aleatoric width and epistemic nu**-0.5 per row.

        ``denormalize`` rescales the aleatoric component into target units;
        the epistemic component is a pure evidence count either way.
        """
        pair = regression_uncertainty(self.predict_params(X))
        if not denormalize or self.normalizer_ is None:
            return pair
        return UncertaintyPair(
            aleatoric=pair.aleatoric * self.normalizer_.target_std,
            epistemic=pair.epistemic)


class EviNamClassifier(ClassifierMixin, _EviNamBase):
    """Additive evidential classification with a Dirichlet head.

    Per-feature nets emit one raw evidence value per class; the head maps
    them through a positive link and sums, so class concentration is one
    plus total evidence.  Probabilities are the Dirichlet mean, vacuity
    (n_classes / strength) tracks epistemic uncertainty, and the expected
    categorical entropy tracks aleatoric uncertainty.
    """

    task = "classification"

    def __init__(self, hidden_sizes=(64, 32), activation="relu",
                 separate_nets=False, evidence_link="softplus",
                 classification_variant="brier", kl_anneal_epochs=10,
                 lr=1e-3, batch_size=128, max_epochs=5000, patience=50,
                 min_delta=1e-6, scheduler_factor=0.5, scheduler_patience=10,
                 min_lr=1e-6, val_fraction=0.2, normalize=True,
                 numeric_features=None, random_state=0):
        self.hidden_sizes = hidden_sizes
        self.activation = activation
        self.separate_nets = separate_nets
        self.evidence_link = evidence_link
        self.classification_variant = classification_variant
        self.kl_anneal_epochs = kl_anneal_epochs
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.min_delta = min_delta
        self.scheduler_factor = scheduler_factor
        self.scheduler_patience = scheduler_patience
        self.min_lr = min_lr
        self.val_fraction = val_fraction
        self.normalize = normalize
        self.numeric_features = numeric_features
        self.random_state = random_state

    def _loss_config(self) -> LossConfig:
        return LossConfig(kl_anneal_epochs=self.kl_anneal_epochs,
                          classification_variant=self.classification_variant)

    def fit(self, X, y, validation_data=None, feature_names=None):
        """Fit on labels ``y``; classes are the sorted unique label values."""
        x = validation.check_matrix(X, min_rows=2)
        y = validation.check_labels(y, x.shape[0])
        names = validation.check_feature_names(feature_names, x.shape[1])
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise InvalidInputError("classification needs at least two classes in y")
        class_index = {c: i for i, c in enumerate(self.classes_)}
        onehot = np.zeros((x.shape[0], self.classes_.shape[0]))
        for i, label in enumerate(y):
            onehot[i, class_index[label]] = 1.0

        x_tr, y_tr, x_val, y_val = self._split_for_validation(x, onehot, validation_data)
        if validation_data is not None:
            y_val = validation.check_labels(y_val, x_val.shape[0])
            unknown = set(np.unique(y_val)) - set(self.classes_)
            if unknown:
                raise InvalidInputError(f"validation labels {sorted(unknown)} unseen in y")
            val_onehot = np.zeros((x_val.shape[0], self.classes_.shape[0]))
            for i, label in enumerate(y_val):
                val_onehot[i, class_index[label]] = 1.0
            y_val = val_onehot

        kept = self._fit_normalizer(x_tr, names)
        x_tr_n, x_val_n = self._encode_x(x_tr), self._encode_x(x_val)

        self.model_ = EviNamModel.build(
            task="classification", feature_names=kept,
            hidden_sizes=tuple(int(h) for h in self.hidden_sizes),
            activation=self.activation, separate_nets=self.separate_nets,
            seed=self.random_state, evidence_link=self.evidence_link,
            class_names=tuple(str(c) for c in self.classes_))
        loss_cfg = self._loss_config()

        def loss_fn(params, y_batch, epoch):
            return dec_loss(y_batch, params, epoch, loss_cfg)

        self.train_report_: TrainReport = train_model(
            self.model_, x_tr_n, y_tr, x_val_n, y_val, self._train_config(), loss_fn)
        self.n_features_in_ = x.shape[1]
        self.feature_names_ = names
        return self

    def predict_alphas(self, X) -> np.ndarray:
        """Dirichlet concentrations, shape [n, n_classes]."""
        encoded = self._model_input(X)
        return self.model_.forward(encoded).matrix()

    def predict_proba(self, X) -> np.ndarray:
        alphas = self.predict_alphas(X)
        return alphas / alphas.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]

    def uncertainty(self, X) -> DirichletUncertainty:
        """Probabilities, vacuity, and expected entropy per row."""
        encoded = self._model_input(X)
        params = self.model_.forward(encoded)
        return dirichlet_uncertainty(params)
