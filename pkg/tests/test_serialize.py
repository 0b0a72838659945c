"""Model persistence: determinism, round trips, corruption handling."""

import json

import numpy as np
import pytest

from evinam.data import synth_blobs, synth_cubic_1d
from evinam.estimators import EviNamClassifier, EviNamRegressor
from evinam.exceptions import ModelFormatError
from evinam.serialize import (dumps_model, load_model, model_from_dict,
                              model_to_dict, save_model)


def fitted_regressor(seed=0):
    ds = synth_cubic_1d(n=80, seed=seed, noise_std=1.0)
    est = EviNamRegressor(hidden_sizes=(8, 4), max_epochs=15, patience=15,
                          random_state=seed)
    est.fit(ds.features["x"].reshape(-1, 1), ds.targets, feature_names=["x"])
    return est


def fitted_classifier(seed=0):
    ds = synth_blobs(n=60, seed=seed)
    x = np.stack([ds.features["x1"], ds.features["x2"]], axis=1)
    labels = np.array(ds.classes)[ds.targets.astype(int)]
    est = EviNamClassifier(hidden_sizes=(6, 4), max_epochs=10, patience=10,
                           random_state=seed)
    est.fit(x, labels, feature_names=["x1", "x2"])
    return est


class TestDeterminism:
    def test_identical_fits_serialize_byte_identically(self):
        text_a = dumps_model(fitted_regressor(seed=1))
        text_b = dumps_model(fitted_regressor(seed=1))
        assert text_a == text_b

    def test_different_seeds_serialize_differently(self):
        assert dumps_model(fitted_regressor(seed=1)) != dumps_model(
            fitted_regressor(seed=2))

    def test_serialized_form_is_stable_json(self):
        text = dumps_model(fitted_regressor(seed=3))
        assert text.endswith("\n")
        payload = json.loads(text)
        canonical = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        assert text == canonical


class TestRoundTrip:
    def test_regressor_predictions_survive_bitwise(self, tmp_path):
        est = fitted_regressor(seed=4)
        path = tmp_path / "model.json"
        save_model(path, est, dataset_schema={"task": "regression"})
        loaded, schema = load_model(path)
        assert schema == {"task": "regression"}
        probe = np.linspace(-3, 3, 32).reshape(-1, 1)
        np.testing.assert_array_equal(loaded.predict(probe), est.predict(probe))
        orig = est.predict_params(probe)
        back = loaded.predict_params(probe)
        for a, b in zip(orig.arrays(), back.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_classifier_round_trip(self, tmp_path):
        est = fitted_classifier(seed=5)
        path = tmp_path / "model.json"
        save_model(path, est)
        loaded, _ = load_model(path)
        probe = np.array([[-2.0, -2.0], [2.0, 2.0], [0.0, 0.0]])
        np.testing.assert_array_equal(loaded.predict(probe), est.predict(probe))
        np.testing.assert_array_equal(loaded.predict_proba(probe),
                                      est.predict_proba(probe))
        np.testing.assert_array_equal(list(loaded.classes_), list(est.classes_))

    def test_estimator_hyperparameters_survive(self):
        est = fitted_regressor(seed=6)
        clone = model_from_dict(model_to_dict(est))[0]
        assert clone.get_params() == est.get_params()

    def test_normalizer_survives(self):
        est = fitted_regressor(seed=7)
        clone = model_from_dict(model_to_dict(est))[0]
        assert clone.normalizer_.to_dict() == est.normalizer_.to_dict()


class TestCorruption:
    def payload(self):
        return model_to_dict(fitted_regressor(seed=8))

    def test_rejects_wrong_format_name(self):
        payload = self.payload()
        payload["format"] = "something-else"
        with pytest.raises(ModelFormatError):
            model_from_dict(payload)

    def test_rejects_future_version(self):
        payload = self.payload()
        payload["format_version"] = 99
        with pytest.raises(ModelFormatError):
            model_from_dict(payload)

    def test_rejects_truncated_weights(self):
        payload = self.payload()
        entry = payload["weights"]["nets"][0]["trunks"][0][0]["w"]
        entry["data"] = entry["data"][: len(entry["data"]) // 2]
        with pytest.raises(ModelFormatError):
            model_from_dict(payload)

    def test_rejects_shape_mismatch(self):
        payload = self.payload()
        entry = payload["weights"]["nets"][0]["trunks"][0][0]["w"]
        entry["shape"] = [1, 1]
        with pytest.raises(ModelFormatError):
            model_from_dict(payload)

    def test_rejects_non_model_json(self, tmp_path):
        path = tmp_path / "weird.json"
        path.write_text(json.dumps({"hello": "world"}))
        with pytest.raises(ModelFormatError):
            load_model(path)
