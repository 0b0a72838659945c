"""Estimator API: sklearn conventions, fitting behavior, prediction paths."""

import numpy as np
import pytest
from sklearn.base import clone

from evinam.data import synth_blobs, synth_cubic_1d
from evinam.estimators import EviNamClassifier, EviNamRegressor
from evinam.exceptions import InvalidInputError
from evinam.heads import ContributionTable


def regression_xy(n=120, seed=0):
    ds = synth_cubic_1d(n=n, seed=seed, low=-2, high=2, noise_std=0.3)
    return ds.features["x"].reshape(-1, 1), ds.targets


def blobs_xy(n=120, seed=0):
    ds = synth_blobs(n=n, seed=seed)
    x = np.stack([ds.features["x1"], ds.features["x2"]], axis=1)
    labels = np.array(ds.classes)[ds.targets.astype(int)]
    return x, labels


def quick_regressor(**overrides):
    return EviNamRegressor(**{**dict(hidden_sizes=(8, 4), max_epochs=40,
                                     patience=40, lr=5e-3, random_state=0),
                              **overrides})


def quick_classifier(**overrides):
    return EviNamClassifier(**{**dict(hidden_sizes=(8, 4), max_epochs=40,
                                      patience=40, lr=1e-2, random_state=0),
                               **overrides})


class TestSklearnProtocol:
    def test_get_params_round_trips_through_set_params(self):
        est = quick_regressor(lam=0.3, p=2.0)
        params = est.get_params()
        other = EviNamRegressor().set_params(**params)
        assert other.get_params() == params

    def test_clone_preserves_hyperparameters(self):
        est = quick_classifier(kl_anneal_epochs=7)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_fitted_attributes_use_trailing_underscore(self):
        x, y = regression_xy()
        est = quick_regressor(max_epochs=5).fit(x, y)
        for attr in ("model_", "normalizer_", "train_report_",
                     "feature_names_", "n_features_in_"):
            assert hasattr(est, attr)

    def test_predict_before_fit_is_rejected(self):
        with pytest.raises(InvalidInputError):
            quick_regressor().predict(np.zeros((2, 1)))

    def test_fit_returns_self(self):
        x, y = regression_xy(n=40)
        est = quick_regressor(max_epochs=2)
        assert est.fit(x, y) is est


class TestRegressor:
    def test_learns_a_cubic(self):
        x, y = regression_xy(n=200, seed=1)
        est = quick_regressor(max_epochs=150).fit(x, y)
        from evinam.metrics import r_squared
        assert r_squared(y, est.predict(x)) > 0.8

    def test_predictions_are_in_target_units(self):
        x, y = regression_xy(n=100, seed=2)
        est = quick_regressor(max_epochs=60).fit(x, y)
        predictions = est.predict(x)
        # normalized-scale output would have spread near 1; the cubic's
        # target spread is far larger
        assert predictions.std() > 2.0

    def test_predict_params_satisfy_constraints(self):
        x, y = regression_xy(n=60, seed=3)
        est = quick_regressor(max_epochs=10).fit(x, y)
        params = est.predict_params(x)
        params.validate()

    def test_uncertainty_shapes_and_denormalization(self):
        x, y = regression_xy(n=60, seed=4)
        est = quick_regressor(max_epochs=10).fit(x, y)
        pair = est.uncertainty(x)
        denorm = est.uncertainty(x, denormalize=True)
        assert pair.aleatoric.shape == (60,)
        target_std = est.normalizer_.target_std
        np.testing.assert_allclose(denorm.aleatoric,
                                   pair.aleatoric * target_std, rtol=1e-12)
        # epistemic is a unitless evidence readout, not a target-scale width
        np.testing.assert_allclose(denorm.epistemic, pair.epistemic, rtol=1e-12)

    def test_validation_data_is_used_verbatim(self):
        x, y = regression_xy(n=80, seed=5)
        est = quick_regressor(max_epochs=5)
        est.fit(x[:60], y[:60], validation_data=(x[60:], y[60:]))
        assert len(est.train_report_.val_losses) == est.train_report_.stopped_epoch

    def test_contributions_reassemble_predictions(self):
        x, y = regression_xy(n=50, seed=6)
        est = quick_regressor(max_epochs=10).fit(x, y)
        tables = est.contributions(x[:5])
        assert len(tables) == 5
        assert all(isinstance(t, ContributionTable) for t in tables)
        params = est.predict_params(x[:5])
        stacked = np.stack(params.arrays(), axis=1)
        for i, table in enumerate(tables):
            np.testing.assert_allclose(table.assembled(), stacked[i], atol=1e-9)

    def test_normalize_off_keeps_raw_scale(self):
        x, y = regression_xy(n=60, seed=7)
        est = quick_regressor(max_epochs=5, normalize=False).fit(x, y)
        assert est.normalizer_ is None
        est.predict(x)

    def test_rejects_wrong_width_at_predict(self):
        x, y = regression_xy(n=40, seed=8)
        est = quick_regressor(max_epochs=2).fit(x, y)
        with pytest.raises(InvalidInputError):
            est.predict(np.zeros((3, 2)))


class TestClassifier:
    def test_learns_blobs(self):
        x, labels = blobs_xy(n=200, seed=1)
        est = quick_classifier(max_epochs=80).fit(x, labels)
        assert (est.predict(x) == labels).mean() > 0.95

    def test_classes_are_sorted_unique_labels(self):
        x, labels = blobs_xy(n=60, seed=2)
        est = quick_classifier(max_epochs=5).fit(x, labels)
        np.testing.assert_array_equal(est.classes_, np.unique(labels))

    def test_probabilities_sum_to_one(self):
        x, labels = blobs_xy(n=60, seed=3)
        est = quick_classifier(max_epochs=5).fit(x, labels)
        probs = est.predict_proba(x)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_alphas_stay_at_least_one(self):
        x, labels = blobs_xy(n=60, seed=4)
        est = quick_classifier(max_epochs=5).fit(x, labels)
        assert est.predict_alphas(x).min() >= 1.0

    def test_uncertainty_readouts_have_batch_shape(self):
        x, labels = blobs_xy(n=60, seed=5)
        est = quick_classifier(max_epochs=5).fit(x, labels)
        unc = est.uncertainty(x)
        assert unc.vacuity.shape == (60,)
        assert unc.expected_entropy.shape == (60,)
        assert unc.probs.shape == (60, 2)

    def test_feature_profile_matches_grid(self):
        x, labels = blobs_xy(n=60, seed=6)
        est = quick_classifier(max_epochs=5).fit(x, labels)
        profile = est.feature_profile(0, np.linspace(-2, 2, 11))
        assert profile.vacuity.shape == (11,)
