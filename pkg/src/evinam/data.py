"""Datasets: synthetic generators, CSV ingestion, encoding, and splits.

A :class:`Dataset` is a named bundle of feature columns (numeric or
categorical) plus a target.  Encoding turns it into the float matrix the
model consumes: numerics pass through, categoricals expand to one-hot
indicator columns.  Normalization (z-scoring of numeric columns and a
regression target) is fit on training rows only and applied everywhere.

The synthetic generators cover the three study setups: a cubic with additive
Gaussian noise in one dimension, a separable cubic-plus-quadratic surface in
two, and Gaussian class blobs for classification.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DataError, InvalidInputError

COLUMN_KINDS = ("numeric", "categorical")
TASKS = ("regression", "classification")


@dataclass(frozen=True)
class ColumnSpec:
    """Name and kind of one feature column; categoricals carry their levels."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.name:
            raise ConfigError("column name must be non-empty")
        if self.kind not in COLUMN_KINDS:
            raise ConfigError(f"column kind must be one of {COLUMN_KINDS}, got {self.kind!r}")
        if self.kind == "categorical" and len(self.categories) < 2:
            raise ConfigError(f"categorical column {self.name!r} needs >= 2 levels")


@dataclass
class Dataset:
    """Feature columns plus a target, with enough schema to re-encode CSV."""

    name: str
    task: str
    columns: list[ColumnSpec]
    features: dict[str, np.ndarray]
    target_name: str
    targets: np.ndarray
    classes: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return int(self.targets.shape[0])

    def validate(self) -> None:
        if self.task not in TASKS:
            raise DataError(f"task must be one of {TASKS}, got {self.task!r}")
        if not self.columns:
            raise DataError("dataset has no feature columns")
        seen = set()
        for col in self.columns:
            col.validate()
            if col.name in seen:
                raise DataError(f"duplicate column name {col.name!r}")
            seen.add(col.name)
            if col.name not in self.features:
                raise DataError(f"missing values for column {col.name!r}")
            if self.features[col.name].shape[0] != self.n:
                raise DataError(f"column {col.name!r} length differs from target")
        if self.task == "classification":
            if not self.classes or len(self.classes) < 2:
                raise DataError("classification dataset needs >= 2 classes")
            if self.targets.min(initial=0) < 0 or self.targets.max(initial=0) >= len(self.classes):
                raise DataError("target label index out of range")

    def subset(self, indices: np.ndarray) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(
            name=self.name,
            task=self.task,
            columns=list(self.columns),
            features={k: v[indices] for k, v in self.features.items()},
            target_name=self.target_name,
            targets=self.targets[indices],
            classes=self.classes,
        )

    def schema_dict(self) -> dict:
        return {
            "task": self.task,
            "target": self.target_name,
            "classes": list(self.classes) if self.classes else None,
            "columns": [
                {"name": c.name, "kind": c.kind, "categories": list(c.categories)}
                for c in self.columns
            ],
        }


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------

def synth_cubic_1d(n: int = 1000, seed: int = 0, low: float = -4.0,
                   high: float = 4.0, noise_std: float = 3.0) -> Dataset:
    """y = x^3 + eps with eps ~ N(0, noise_std^2), x uniform on [low, high]."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not low < high:
        raise ConfigError(f"need low < high, got [{low}, {high}]")
    rng = np.random.default_rng(seed)
    x = rng.uniform(low, high, size=n)
    y = x ** 3 + rng.normal(0.0, noise_std, size=n)
    return Dataset(
        name="cubic-1d", task="regression",
        columns=[ColumnSpec("x", "numeric")],
        features={"x": x}, target_name="y", targets=y,
    )


def synth_cubic_2d(n: int = 1000, seed: int = 0, low: float = -3.0,
                   high: float = 3.0,
                   noise_std: tuple[float, float] = (5.0, 1.0)) -> Dataset:
    """y = (x1^3 + eps1) + (x2^2 + eps2), each x uniform on [low, high].

    The two noise terms have standard deviations ``noise_std``; the target
    is exactly additive in the two features, so the learned shape functions
    can be compared against the true cubic and quadratic.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not low < high:
        raise ConfigError(f"need low < high, got [{low}, {high}]")
    s1, s2 = float(noise_std[0]), float(noise_std[1])
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(low, high, size=n)
    x2 = rng.uniform(low, high, size=n)
    y = (x1 ** 3 + rng.normal(0.0, s1, size=n)) + (x2 ** 2 + rng.normal(0.0, s2, size=n))
    return Dataset(
        name="cubic-2d", task="regression",
        columns=[ColumnSpec("x1", "numeric"), ColumnSpec("x2", "numeric")],
        features={"x1": x1, "x2": x2}, target_name="y", targets=y,
    )


def synth_blobs(n: int = 1000, seed: int = 0,
                centers: tuple = ((-2.0, -2.0), (2.0, 2.0)),
                std: float = 0.5) -> Dataset:
    """Gaussian blobs in two dimensions, one per class, equal sizes."""
    if n < len(centers):
        raise ConfigError(f"n must be >= number of classes, got {n}")
    if std <= 0:
        raise ConfigError(f"std must be > 0, got {std}")
    rng = np.random.default_rng(seed)
    n_classes = len(centers)
    labels = np.arange(n) % n_classes
    rng.shuffle(labels)
    points = np.empty((n, 2))
    for c, center in enumerate(centers):
        mask = labels == c
        points[mask] = rng.normal(loc=center, scale=std, size=(int(mask.sum()), 2))
    return Dataset(
        name="blobs", task="classification",
        columns=[ColumnSpec("x1", "numeric"), ColumnSpec("x2", "numeric")],
        features={"x1": points[:, 0], "x2": points[:, 1]},
        target_name="label", targets=labels.astype(np.int64),
        classes=tuple(f"c{c}" for c in range(n_classes)),
    )


SYNTH_GENERATORS = {
    "cubic-1d": synth_cubic_1d,
    "cubic-2d": synth_cubic_2d,
    "blobs": synth_blobs,
}


# ---------------------------------------------------------------------------
# CSV ingestion and round trip
# ---------------------------------------------------------------------------

def load_csv(path, target_column: str, task: str = "regression",
             categorical_columns: tuple[str, ...] = (),
             name: str | None = None,
             categories: dict[str, tuple[str, ...]] | None = None,
             classes: tuple[str, ...] | None = None) -> Dataset:
    """Read a headered CSV into a Dataset.

    Columns listed in ``categorical_columns`` keep their string values;
    every other feature column must parse as a float.  Unparseable numeric
    cells fail with the 1-based data row and column name.  Categorical
    levels and classification classes default to the sorted values observed,
    but can be pinned (as when re-encoding new data against a trained
    model's schema); unseen values then fail.
    """
    if task not in TASKS:
        raise DataError(f"task must be one of {TASKS}, got {task!r}")
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            rows = list(reader)
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from err
    if not rows:
        raise DataError(f"{path} is empty")
    header, *body = rows
    if len(set(header)) != len(header):
        raise DataError(f"{path} has duplicate column names")
    if target_column not in header:
        raise DataError(f"target column {target_column!r} not in header {header}")
    if not body:
        raise DataError(f"{path} has a header but no data rows")
    unknown = set(categorical_columns) - set(header)
    if unknown:
        raise DataError(f"categorical columns {sorted(unknown)} not in header")

    index = {name_: i for i, name_ in enumerate(header)}
    feature_names = [h for h in header if h != target_column]
    raw: dict[str, list] = {h: [] for h in header}
    for row_number, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(
                f"row {row_number}: expected {len(header)} fields, got {len(row)}")
        for h in header:
            raw[h].append(row[index[h]])

    def parse_numeric(column: str) -> np.ndarray:
        out = np.empty(len(body))
        for i, cell in enumerate(raw[column]):
            try:
                out[i] = float(cell)
            except ValueError:
                raise DataError(
                    f"row {i + 1}, column {column!r}: could not parse {cell!r} "
                    "as a number") from None
            if not math.isfinite(out[i]):
                raise DataError(
                    f"row {i + 1}, column {column!r}: non-finite value {cell!r}")
        return out

    features: dict[str, np.ndarray] = {}
    columns: list[ColumnSpec] = []
    for fname in feature_names:
        if fname in categorical_columns:
            values = np.asarray(raw[fname], dtype=object)
            levels = (categories or {}).get(fname)
            if levels is None:
                levels = tuple(sorted(set(raw[fname])))
            else:
                unseen = set(raw[fname]) - set(levels)
                if unseen:
                    raise DataError(
                        f"column {fname!r}: values {sorted(unseen)} not in the "
                        "recorded categories")
            columns.append(ColumnSpec(fname, "categorical", tuple(levels)))
            features[fname] = values
        else:
            columns.append(ColumnSpec(fname, "numeric"))
            features[fname] = parse_numeric(fname)

    if task == "classification":
        observed = raw[target_column]
        class_levels = classes if classes is not None else tuple(sorted(set(observed)))
        lookup = {c: i for i, c in enumerate(class_levels)}
        try:
            targets = np.asarray([lookup[v] for v in observed], dtype=np.int64)
        except KeyError as err:
            raise DataError(
                f"target column {target_column!r}: unknown class {err.args[0]!r}") from None
    else:
        class_levels = None
        targets = parse_numeric(target_column)

    ds = Dataset(
        name=name or str(path), task=task, columns=columns, features=features,
        target_name=target_column, targets=targets, classes=class_levels,
    )
    ds.validate()
    return ds


def write_csv(dataset: Dataset, path) -> None:
    """Write a Dataset back out; floats use shortest round-trip formatting."""
    dataset.validate()
    header = [c.name for c in dataset.columns] + [dataset.target_name]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(dataset.n):
            row = []
            for col in dataset.columns:
                value = dataset.features[col.name][i]
                row.append(repr(float(value)) if col.kind == "numeric" else str(value))
            if dataset.task == "classification":
                row.append(dataset.classes[int(dataset.targets[i])])
            else:
                row.append(repr(float(dataset.targets[i])))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# encoding and normalization
# ---------------------------------------------------------------------------

def one_hot(values: np.ndarray, categories: tuple[str, ...]) -> np.ndarray:
    """Indicator matrix [n, len(categories)] in category order."""
    if len(set(categories)) != len(categories) or not categories:
        raise InvalidInputError("categories must be unique and non-empty")
    lookup = {c: i for i, c in enumerate(categories)}
    out = np.zeros((len(values), len(categories)))
    for i, v in enumerate(values):
        j = lookup.get(v)
        if j is None:
            raise InvalidInputError(f"value {v!r} not among categories {categories}")
        out[i, j] = 1.0
    return out


def encode_features(dataset: Dataset) -> tuple[np.ndarray, list[str], np.ndarray]:
    """Expand a dataset to (matrix, encoded names, numeric-column mask).

    Numeric columns map to themselves; a categorical column with levels
    (a, b, ...) maps to indicator columns ``name=a``, ``name=b``, ...
    """
    dataset.validate()
    blocks: list[np.ndarray] = []
    names: list[str] = []
    numeric_mask: list[bool] = []
    for col in dataset.columns:
        if col.kind == "numeric":
            blocks.append(dataset.features[col.name].reshape(-1, 1).astype(np.float64))
            names.append(col.name)
            numeric_mask.append(True)
        else:
            blocks.append(one_hot(dataset.features[col.name], col.categories))
            names.extend(f"{col.name}={level}" for level in col.categories)
            numeric_mask.extend([False] * len(col.categories))
    return np.hstack(blocks), names, np.asarray(numeric_mask, dtype=bool)


@dataclass
class Normalizer:
    """Z-scoring fitted on training rows; indicator columns pass through.

    Numeric columns with zero variance carry no signal and are dropped (with
    a warning) rather than divided by zero.  For regression the target is
    z-scored too; statistics use the population convention (ddof = 0).
    """

    names: list[str]
    mean: np.ndarray
    std: np.ndarray
    scaled: np.ndarray
    kept: np.ndarray
    target_mean: float | None = None
    target_std: float | None = None

    @classmethod
    def fit(cls, x: np.ndarray, names: list[str], numeric_mask: np.ndarray,
            y: np.ndarray | None = None) -> "Normalizer":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise InvalidInputError("normalizer needs a [n>=2, features] matrix")
        if x.shape[1] != len(names) or x.shape[1] != numeric_mask.shape[0]:
            raise InvalidInputError("names/mask do not match the matrix width")
        mean = np.zeros(x.shape[1])
        std = np.ones(x.shape[1])
        kept = np.ones(x.shape[1], dtype=bool)
        scaled = np.asarray(numeric_mask, dtype=bool).copy()
        for j in np.flatnonzero(numeric_mask):
            mu = float(x[:, j].mean())
            sigma = float(x[:, j].std())
            if sigma == 0.0:
                warnings.warn(
                    f"dropping constant numeric column {names[j]!r}", stacklevel=2)
                kept[j] = False
                scaled[j] = False
                continue
            mean[j], std[j] = mu, sigma
        target_mean = target_std = None
        if y is not None:
            y = np.asarray(y, dtype=np.float64)
            target_mean = float(y.mean())
            target_std = float(y.std())
            if target_std == 0.0:
                raise DataError("target has zero variance; nothing to model")
        return cls(names=list(names), mean=mean, std=std, scaled=scaled,
                   kept=kept, target_mean=target_mean, target_std=target_std)

    def kept_names(self) -> list[str]:
        return [n for n, k in zip(self.names, self.kept) if k]

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != len(self.names):
            raise InvalidInputError(
                f"expected {len(self.names)} columns, got shape {x.shape}")
        out = (x - self.mean) / self.std
        out[:, ~self.scaled] = x[:, ~self.scaled]
        return out[:, self.kept]

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        if self.target_mean is None:
            return np.asarray(y, dtype=np.float64)
        return (np.asarray(y, dtype=np.float64) - self.target_mean) / self.target_std

    def inverse_target(self, y: np.ndarray) -> np.ndarray:
        if self.target_mean is None:
            return np.asarray(y, dtype=np.float64)
        return np.asarray(y, dtype=np.float64) * self.target_std + self.target_mean

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
            "scaled": [bool(v) for v in self.scaled],
            "kept": [bool(v) for v in self.kept],
            "target_mean": self.target_mean,
            "target_std": self.target_std,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Normalizer":
        return cls(
            names=list(payload["names"]),
            mean=np.asarray(payload["mean"], dtype=np.float64),
            std=np.asarray(payload["std"], dtype=np.float64),
            scaled=np.asarray(payload["scaled"], dtype=bool),
            kept=np.asarray(payload["kept"], dtype=bool),
            target_mean=payload.get("target_mean"),
            target_std=payload.get("target_std"),
        )


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test fractions; must sum to one.

    The test rows are carved out first, then the remainder is divided
    between train and validation, so changing only the seed reshuffles
    memberships but never the sizes.  Sizes use floors; leftover rows go to
    train.
    """

    train: float = 0.72
    val: float = 0.18
    test: float = 0.10
    seed: int = 0

    def validate(self) -> None:
        for part, value in (("train", self.train), ("val", self.val), ("test", self.test)):
            if not (0.0 <= value < 1.0):
                raise ConfigError(f"{part} fraction must be in [0, 1), got {value}")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ConfigError("split fractions must sum to 1")
        if self.train <= 0.0:
            raise ConfigError("train fraction must be positive")


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle once with the spec's seed and cut into train/val/test."""
    spec.validate()
    dataset.validate()
    n = dataset.n
    n_test = int(math.floor(n * spec.test))
    n_val = int(math.floor(n * spec.val))
    if n - n_test - n_val < 1:
        raise ConfigError(f"split leaves no training rows for n={n}")
    order = np.random.default_rng(spec.seed).permutation(n)
    test_idx = order[:n_test]
    val_idx = order[n_test:n_test + n_val]
    train_idx = order[n_test + n_val:]
    return dataset.subset(train_idx), dataset.subset(val_idx), dataset.subset(test_idx)
