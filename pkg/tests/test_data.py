"""Synthetic generators, CSV round trips, encoding, normalization, splits."""

import numpy as np
import pytest

from evinam.data import (ColumnSpec, Dataset, Normalizer, SplitSpec,
                         encode_features, load_csv, one_hot, split,
                         synth_blobs, synth_cubic_1d, synth_cubic_2d,
                         write_csv)
from evinam.exceptions import ConfigError, DataError, InvalidInputError


class TestGenerators:
    def test_cubic_1d_shape_and_range(self):
        ds = synth_cubic_1d(n=500, seed=0, low=-4, high=4, noise_std=3.0)
        assert ds.n == 500
        assert ds.task == "regression"
        x = ds.features["x"]
        assert x.min() >= -4 and x.max() <= 4
        # the cubic dominates the noise: correlation with x^3 is strong
        corr = np.corrcoef(x ** 3, ds.targets)[0, 1]
        assert corr > 0.9

    def test_cubic_1d_is_seed_deterministic(self):
        a, b = synth_cubic_1d(n=50, seed=3), synth_cubic_1d(n=50, seed=3)
        np.testing.assert_array_equal(a.features["x"], b.features["x"])
        np.testing.assert_array_equal(a.targets, b.targets)
        c = synth_cubic_1d(n=50, seed=4)
        assert np.max(np.abs(a.targets - c.targets)) > 0.0

    def test_cubic_2d_additive_structure(self):
        ds = synth_cubic_2d(n=400, seed=1, noise_std=(0.0, 0.0))
        expected = ds.features["x1"] ** 3 + ds.features["x2"] ** 2
        np.testing.assert_allclose(ds.targets, expected, rtol=1e-12)

    def test_blobs_labels_and_classes(self):
        ds = synth_blobs(n=100, seed=2, std=0.5)
        assert ds.task == "classification"
        assert ds.classes == ("c0", "c1")
        counts = np.bincount(ds.targets.astype(int))
        np.testing.assert_array_equal(counts, [50, 50])
        centers = np.array([[-2.0, -2.0], [2.0, 2.0]])
        points = np.stack([ds.features["x1"], ds.features["x2"]], axis=1)
        for c in (0, 1):
            mean = points[ds.targets == c].mean(axis=0)
            assert np.linalg.norm(mean - centers[c]) < 0.5

    def test_generators_reject_bad_args(self):
        with pytest.raises(ConfigError):
            synth_cubic_1d(n=0)
        with pytest.raises(ConfigError):
            synth_cubic_1d(low=2.0, high=-2.0)
        with pytest.raises(ConfigError):
            synth_blobs(std=0.0)


class TestCSV:
    def test_regression_round_trip(self, tmp_path):
        ds = synth_cubic_2d(n=40, seed=5)
        path = tmp_path / "data.csv"
        write_csv(ds, path)
        loaded = load_csv(path, target_column="y", task="regression")
        np.testing.assert_allclose(loaded.features["x1"], ds.features["x1"],
                                   rtol=0, atol=0)
        np.testing.assert_allclose(loaded.targets, ds.targets, rtol=0, atol=0)

    def test_classification_round_trip(self, tmp_path):
        ds = synth_blobs(n=30, seed=6)
        path = tmp_path / "blobs.csv"
        write_csv(ds, path)
        loaded = load_csv(path, target_column="label", task="classification")
        assert loaded.classes == ds.classes
        np.testing.assert_array_equal(loaded.targets, ds.targets)

    def test_categorical_columns_survive(self, tmp_path):
        path = tmp_path / "mixed.csv"
        path.write_text("size,color,y\n1.0,red,2.0\n2.0,blue,3.0\n3.0,red,4.0\n")
        ds = load_csv(path, target_column="y", categorical_columns=("color",))
        assert ds.columns[1].kind == "categorical"
        assert ds.columns[1].categories == ("blue", "red")

    def test_parse_error_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1.0,2.0\n1.5,3.0\noops,4.0\n")
        with pytest.raises(DataError, match=r"row 3, column 'x'"):
            load_csv(path, target_column="y")

    def test_missing_target_column(self, tmp_path):
        path = tmp_path / "cols.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataError):
            load_csv(path, target_column="y")

    def test_pinned_categories_reject_unseen_level(self, tmp_path):
        path = tmp_path / "pin.csv"
        path.write_text("c,y\ngreen,1.0\n")
        with pytest.raises(DataError):
            load_csv(path, target_column="y", categorical_columns=("c",),
                     categories={"c": ("blue", "red")})

    def test_pinned_classes_reject_unseen_label(self, tmp_path):
        path = tmp_path / "cls.csv"
        path.write_text("x,label\n0.5,c9\n")
        with pytest.raises(DataError):
            load_csv(path, target_column="label", task="classification",
                     classes=("c0", "c1"))


class TestEncoding:
    def test_one_hot_layout(self):
        values = np.array(["b", "a", "b"])
        enc = one_hot(values, ("a", "b"))
        np.testing.assert_array_equal(enc, [[0, 1], [1, 0], [0, 1]])

    def test_one_hot_rejects_unknown_level(self):
        with pytest.raises(InvalidInputError):
            one_hot(np.array(["z"]), ("a", "b"))

    def test_encode_features_names_and_mask(self, tmp_path):
        path = tmp_path / "mixed.csv"
        path.write_text("size,color,y\n1.0,red,2.0\n2.0,blue,3.0\n")
        ds = load_csv(path, target_column="y", categorical_columns=("color",))
        x, names, numeric_mask = encode_features(ds)
        assert names == ["size", "color=blue", "color=red"]
        np.testing.assert_array_equal(numeric_mask, [True, False, False])
        assert x.shape == (2, 3)


class TestNormalizer:
    def test_population_statistics(self):
        rng = np.random.default_rng(7)
        x = rng.normal(loc=3.0, scale=2.0, size=(50, 2))
        norm = Normalizer.fit(x, ["a", "b"], np.array([True, True]))
        np.testing.assert_allclose(norm.mean, x.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(norm.std, x.std(axis=0), rtol=1e-12)
        z = norm.transform(x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)

    def test_categorical_columns_pass_through(self):
        x = np.array([[1.0, 0.0], [3.0, 1.0]])
        norm = Normalizer.fit(x, ["num", "cat=a"], np.array([True, False]))
        z = norm.transform(x)
        np.testing.assert_array_equal(z[:, 1], x[:, 1])

    def test_zero_variance_column_dropped_with_warning(self):
        x = np.stack([np.arange(5.0), np.full(5, 7.0)], axis=1)
        with pytest.warns(UserWarning, match="constant"):
            norm = Normalizer.fit(x, ["a", "b"], np.array([True, True]))
        assert norm.kept_names() == ["a"]
        assert norm.transform(x).shape == (5, 1)

    def test_target_round_trip(self):
        y = np.array([2.0, 4.0, 9.0])
        norm = Normalizer.fit(np.ones((3, 1)) * np.arange(3).reshape(-1, 1),
                              ["a"], np.array([True]), y=y)
        z = norm.transform_target(y)
        np.testing.assert_allclose(z.mean(), 0.0, atol=1e-12)
        np.testing.assert_allclose(norm.inverse_target(z), y, rtol=1e-12)

    def test_dict_round_trip(self):
        x = np.arange(10.0).reshape(-1, 2)
        norm = Normalizer.fit(x, ["a", "b"], np.array([True, True]),
                              y=np.arange(5.0))
        clone = Normalizer.from_dict(norm.to_dict())
        np.testing.assert_allclose(clone.transform(x), norm.transform(x),
                                   rtol=1e-15)
        assert clone.target_std == norm.target_std


class TestSplit:
    def test_default_sizes_for_one_thousand_rows(self):
        ds = synth_cubic_1d(n=1000, seed=0)
        train, val, test = split(ds, SplitSpec(seed=0))
        assert (train.n, val.n, test.n) == (720, 180, 100)

    def test_partition_is_disjoint_and_complete(self):
        ds = synth_cubic_1d(n=97, seed=1)
        train, val, test = split(ds, SplitSpec(seed=3))
        xs = np.concatenate([train.features["x"], val.features["x"],
                             test.features["x"]])
        np.testing.assert_allclose(np.sort(xs), np.sort(ds.features["x"]))
        assert train.n + val.n + test.n == 97

    def test_seed_changes_membership_not_sizes(self):
        ds = synth_cubic_1d(n=200, seed=2)
        a = split(ds, SplitSpec(seed=0))
        b = split(ds, SplitSpec(seed=1))
        assert [part.n for part in a] == [part.n for part in b]
        assert np.max(np.abs(np.sort(a[2].features["x"])
                             - np.sort(b[2].features["x"]))) > 0.0

    def test_floor_rounding_gives_leftovers_to_train(self):
        ds = synth_cubic_1d(n=7, seed=3)
        train, val, test = split(ds, SplitSpec())
        assert (train.n, val.n, test.n) == (6, 1, 0)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            SplitSpec(train=0.8, val=0.1, test=0.2).validate()

    def test_train_fraction_must_be_positive(self):
        with pytest.raises(ConfigError):
            SplitSpec(train=0.0, val=0.5, test=0.5).validate()


class TestDataset:
    def test_validate_catches_length_mismatch(self):
        ds = Dataset(name="bad", task="regression",
                     columns=[ColumnSpec("x", "numeric")],
                     features={"x": np.arange(3.0)}, target_name="y",
                     targets=np.arange(4.0))
        with pytest.raises(DataError):
            ds.validate()

    def test_subset_preserves_schema(self):
        ds = synth_blobs(n=20, seed=4)
        sub = ds.subset(np.arange(5))
        assert sub.n == 5
        assert sub.classes == ds.classes
        assert [c.name for c in sub.columns] == [c.name for c in ds.columns]

    def test_schema_dict_contents(self):
        ds = synth_blobs(n=10, seed=5)
        schema = ds.schema_dict()
        assert schema["task"] == "classification"
        assert schema["target"] == "label"
        assert [c["name"] for c in schema["columns"]] == ["x1", "x2"]
        assert schema["classes"] == ["c0", "c1"]
