"""Command-line interface.

Subcommands cover the full workflow: ``synth`` writes synthetic datasets,
``train`` fits a model from a run config, ``eval`` scores a saved model on a
CSV, ``predict`` writes per-row predictions with uncertainties and exact
per-feature contributions, ``explain`` writes shape curves, and
``compare-links`` trains the per-term-link and link-at-sum variants on the
same data and reports metrics plus additivity gaps side by side.

Exit codes: 0 success, 2 configuration or usage problems, 3 data problems,
4 numeric or internal failures.  Outputs are JSON with sorted keys; nothing
is written until a command has finished its computation, so a failing run
leaves no partial outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import data as data_mod
from .exceptions import (ConfigError, DataError, EviNamError,
                         InvalidInputError, ModelFormatError)
from .explain import shape_curve
from .metrics import classification_report, regression_report
from .serialize import load_model, save_model

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _load_dataset(cfg: dict) -> data_mod.Dataset:
    ds_cfg = cfg["dataset"]
    if ds_cfg["kind"] == "synthetic":
        synth = ds_cfg["synthetic"]
        generator = data_mod.SYNTH_GENERATORS.get(synth["name"])
        if generator is None:
            raise ConfigError(
                f"unknown synthetic dataset {synth['name']!r}; "
                f"choose from {sorted(data_mod.SYNTH_GENERATORS)}")
        try:
            dataset = generator(n=int(synth["n"]), seed=int(synth["seed"]),
                                **synth.get("params", {}))
        except TypeError as err:
            raise ConfigError(f"bad synthetic params: {err}") from err
        if dataset.task != cfg["task"]:
            raise ConfigError(
                f"dataset {synth['name']!r} is a {dataset.task} dataset but the "
                f"config says task={cfg['task']!r}")
        return dataset
    path = Path(ds_cfg["path"])
    if not path.exists():
        raise ConfigError(f"dataset path {path} does not exist")
    return data_mod.load_csv(
        path, target_column=ds_cfg["target"], task=cfg["task"],
        categorical_columns=tuple(ds_cfg["categorical"]))


def _estimator_from_config(cfg: dict, numeric_features):
    from .estimators import EviNamClassifier, EviNamRegressor

    model, loss, train = cfg["model"], cfg["loss"], cfg["train"]
    common = dict(
        hidden_sizes=tuple(int(h) for h in model["hidden_sizes"]),
        activation=model["activation"], separate_nets=bool(model["separate_nets"]),
        lr=float(train["lr"]), batch_size=int(train["batch_size"]),
        max_epochs=int(train["max_epochs"]), patience=int(train["patience"]),
        min_delta=float(train["min_delta"]),
        scheduler_factor=float(train["scheduler_factor"]),
        scheduler_patience=int(train["scheduler_patience"]),
        min_lr=float(train["min_lr"]), numeric_features=numeric_features,
        random_state=int(train["seed"]))
    if cfg["task"] == "regression":
        return EviNamRegressor(link_at_sum=bool(model["link_at_sum"]),
                               lam=float(loss["lam"]), p=float(loss["p"]), **common)
    return EviNamClassifier(evidence_link=model["evidence_link"],
                            classification_variant=loss["classification_variant"],
                            kl_anneal_epochs=int(loss["kl_anneal_epochs"]), **common)


def _fit_on_split(cfg: dict, dataset: data_mod.Dataset):
    """Split, encode, and fit; returns (estimator, parts, encoded names)."""
    split_cfg = cfg["dataset"]["split"]
    spec = data_mod.SplitSpec(train=float(split_cfg["train"]),
                              val=float(split_cfg["val"]),
                              test=float(split_cfg["test"]),
                              seed=int(split_cfg["seed"]))
    train_ds, val_ds, test_ds = data_mod.split(dataset, spec)
    x_train, names, mask = data_mod.encode_features(train_ds)
    x_val = data_mod.encode_features(val_ds)[0] if val_ds.n else np.empty((0, len(names)))
    estimator = _estimator_from_config(cfg, np.flatnonzero(mask).tolist())

    def targets(ds: data_mod.Dataset):
        if cfg["task"] == "classification":
            return np.asarray([ds.classes[t] for t in ds.targets], dtype=object)
        return ds.targets

    validation = (x_val, targets(val_ds)) if val_ds.n else None
    estimator.fit(x_train, targets(train_ds), validation_data=validation,
                  feature_names=names)
    return estimator, (train_ds, val_ds, test_ds), names


def _encode_for_model(estimator, dataset: data_mod.Dataset) -> np.ndarray:
    x, names, _ = data_mod.encode_features(dataset)
    if names != list(estimator.feature_names_):
        raise DataError(
            "encoded columns do not match the model's features; expected "
            f"{list(estimator.feature_names_)}, got {names}")
    return x


def _metric_report(estimator, dataset: data_mod.Dataset):
    x = _encode_for_model(estimator, dataset)
    if dataset.task == "regression":
        params = estimator.predict_params(x)
        y = dataset.targets
        if estimator.normalizer_ is not None:
            y = estimator.normalizer_.transform_target(y)
        return regression_report(y, params)
    class_order = {str(c): i for i, c in enumerate(estimator.classes_)}
    try:
        labels = np.asarray(
            [class_order[str(dataset.classes[t])] for t in dataset.targets])
    except KeyError as err:
        raise DataError(f"class {err.args[0]!r} unknown to the model") from None
    return classification_report(labels, estimator.predict_proba(x))


def _dataset_from_schema(path: Path, schema: dict) -> data_mod.Dataset:
    if not schema:
        raise ModelFormatError(
            "model file carries no dataset schema; cannot re-encode CSV data")
    categorical = tuple(c["name"] for c in schema["columns"] if c["kind"] == "categorical")
    categories = {c["name"]: tuple(c["categories"])
                  for c in schema["columns"] if c["kind"] == "categorical"}
    classes = tuple(schema["classes"]) if schema.get("classes") else None
    return data_mod.load_csv(
        path, target_column=schema["target"], task=schema["task"],
        categorical_columns=categorical, categories=categories, classes=classes)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    synth_cfg = dict(config_mod.SYNTH_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as handle:
                user = json.load(handle)
        except OSError as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config {args.config} is not valid JSON: {err}") from err
        if not isinstance(user, dict):
            raise ConfigError("synth config must be a JSON object")
        unknown = set(user) - set(synth_cfg)
        if unknown:
            raise ConfigError(f"unknown synth config keys {sorted(unknown)}")
        synth_cfg.update(user)
    if args.seed is not None:
        synth_cfg["seed"] = int(args.seed)
    generator = data_mod.SYNTH_GENERATORS.get(synth_cfg["name"])
    if generator is None:
        raise ConfigError(f"unknown synthetic dataset {synth_cfg['name']!r}; "
                          f"choose from {sorted(data_mod.SYNTH_GENERATORS)}")
    try:
        dataset = generator(n=int(synth_cfg["n"]), seed=int(synth_cfg["seed"]),
                            **synth_cfg.get("params", {}))
    except TypeError as err:
        raise ConfigError(f"bad synthetic params: {err}") from err
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{dataset.name}.csv"
    data_mod.write_csv(dataset, csv_path)
    meta = {
        "name": dataset.name,
        "generator": synth_cfg["name"],
        "n": dataset.n,
        "seed": int(synth_cfg["seed"]),
        "params": synth_cfg.get("params", {}),
        "schema": dataset.schema_dict(),
    }
    _write_json(out / f"{dataset.name}.meta.json", meta)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = config_mod.override_seed(config_mod.load_config(args.config), args.seed)
    dataset = _load_dataset(cfg)
    estimator, (train_ds, val_ds, test_ds), _ = _fit_on_split(cfg, dataset)
    test_report = _metric_report(estimator, test_ds) if test_ds.n else None

    out = Path(args.out)
    save_model(out / "model.json", estimator, dataset_schema=dataset.schema_dict())
    _write_json(out / "train_report.json", estimator.train_report_.to_dict())
    _write_json(out / "resolved_config.json", cfg)
    if test_report is not None:
        payload = test_report.to_dict()
        payload["task"] = cfg["task"]
        _write_json(out / "metrics.json", payload)
    print(f"trained on {train_ds.n} rows "
          f"(val {val_ds.n}, test {test_ds.n}); model at {out / 'model.json'}")
    return EXIT_OK


def cmd_eval(args) -> int:
    estimator, schema = load_model(args.model)
    dataset = _dataset_from_schema(Path(args.data), schema)
    report = _metric_report(estimator, dataset)
    payload = report.to_dict()
    payload["task"] = dataset.task
    _write_json(Path(args.out) / "metrics.json", payload)
    print(f"evaluated {report.count} rows")
    return EXIT_OK


def cmd_predict(args) -> int:
    estimator, schema = load_model(args.model)
    dataset = _dataset_from_schema(Path(args.data), schema)
    x = _encode_for_model(estimator, dataset)
    records = []
    if dataset.task == "regression":
        params = estimator.predict_params(x)
        gamma, nu, alpha, beta = params.arrays()
        pair = estimator.uncertainty(x)
        predictions = estimator.predict(x)
        tables = estimator.contributions(x)
        denorm = estimator.normalizer_ is not None
        target_std = estimator.normalizer_.target_std if denorm else 1.0
        for i in range(x.shape[0]):
            records.append({
                "index": i,
                "prediction": float(predictions[i]),
                "params": {"gamma": float(gamma[i]), "nu": float(nu[i]),
                           "alpha": float(alpha[i]), "beta": float(beta[i])},
                "aleatoric": float(pair.aleatoric[i]),
                "aleatoric_target_units": float(pair.aleatoric[i] * target_std),
                "epistemic": float(pair.epistemic[i]),
                "contributions": tables[i].as_dict(),
            })
    else:
        unc = estimator.uncertainty(x)
        alphas = estimator.predict_alphas(x)
        labels = estimator.predict(x)
        tables = estimator.contributions(x)
        class_names = [str(c) for c in estimator.classes_]
        for i in range(x.shape[0]):
            records.append({
                "index": i,
                "label": str(labels[i]),
                "probs": {c: float(p) for c, p in zip(class_names, unc.probs[i])},
                "alphas": {c: float(a) for c, a in zip(class_names, alphas[i])},
                "vacuity": float(unc.vacuity[i]),
                "expected_entropy": float(unc.expected_entropy[i]),
                "contributions": tables[i].as_dict(),
            })
    payload = {"task": dataset.task, "count": len(records), "records": records}
    _write_json(Path(args.out) / "predictions.json", payload)
    print(f"wrote {len(records)} predictions")
    return EXIT_OK


def cmd_explain(args) -> int:
    estimator, schema = load_model(args.model)
    dataset = _dataset_from_schema(Path(args.data), schema)
    numeric = [c.name for c in dataset.columns
               if c.kind == "numeric" and c.name in estimator.model_.feature_names]
    wanted = numeric
    if args.features:
        wanted = [name.strip() for name in args.features.split(",") if name.strip()]
        missing = [name for name in wanted if name not in numeric]
        if missing:
            raise InvalidInputError(
                f"cannot explain {missing}; numeric model features are {numeric}")
    curves = [shape_curve(estimator, dataset.features[name], name,
                          grid_size=int(args.grid_size), smooth=bool(args.smooth))
              for name in wanted]
    payload = {"task": dataset.task, "count": len(curves), "curves": curves}
    _write_json(Path(args.out) / "shape_curves.json", payload)
    print(f"wrote {len(curves)} shape curves")
    return EXIT_OK


def cmd_compare_links(args) -> int:
    cfg = config_mod.override_seed(config_mod.load_config(args.config), args.seed)
    if cfg["task"] != "regression":
        raise ConfigError("compare-links applies to regression configs only")
    dataset = _load_dataset(cfg)
    results = {}
    gaps = {}
    for variant, at_sum in (("per_term", False), ("at_sum", True)):
        run_cfg = json.loads(json.dumps(cfg))
        run_cfg["model"]["link_at_sum"] = at_sum
        estimator, (_, _, test_ds), _ = _fit_on_split(run_cfg, dataset)
        if not test_ds.n:
            raise ConfigError("compare-links needs a non-empty test split")
        report = _metric_report(estimator, test_ds)
        results[variant] = report.to_dict()
        x = _encode_for_model(estimator, test_ds)
        probe = x[: min(len(x), 200)]
        params = estimator.predict_params(probe)
        stacked = np.stack(params.arrays(), axis=1)
        assembled = np.stack(
            [table.assembled() for table in estimator.contributions(probe)], axis=0)
        gaps[variant] = float(np.max(np.abs(assembled - stacked)))
    payload = {
        "task": "regression",
        "variants": results,
        "additivity_max_abs_gap": gaps,
    }
    _write_json(Path(args.out) / "comparison.json", payload)
    print(f"per-term gap {gaps['per_term']:.3e}, at-sum gap {gaps['at_sum']:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evinam",
        description="Evidential neural additive models: train, evaluate, explain.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p_synth.add_argument("--config", help="synth config JSON (name, n, seed, params)")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, help="override the generator seed")
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="train a model from a run config")
    p_train.add_argument("--config", required=True, help="run config JSON")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--seed", type=int, help="override every seed in the config")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a saved model on a CSV")
    p_eval.add_argument("--model", required=True, help="model.json path")
    p_eval.add_argument("--data", required=True, help="CSV with the schema's columns")
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.set_defaults(func=cmd_eval)

    p_pred = sub.add_parser("predict", help="write per-row predictions with "
                                            "uncertainties and contributions")
    p_pred.add_argument("--model", required=True, help="model.json path")
    p_pred.add_argument("--data", required=True, help="CSV with the schema's columns")
    p_pred.add_argument("--out", required=True, help="output directory")
    p_pred.set_defaults(func=cmd_predict)

    p_explain = sub.add_parser("explain", help="write per-feature shape curves")
    p_explain.add_argument("--model", required=True, help="model.json path")
    p_explain.add_argument("--data", required=True, help="CSV with the schema's columns")
    p_explain.add_argument("--out", required=True, help="output directory")
    p_explain.add_argument("--smooth", action="store_true",
                           help="add LOWESS-smoothed curves")
    p_explain.add_argument("--grid-size", type=int, default=100,
                           help="points per curve (default 100)")
    p_explain.add_argument("--features", help="comma-separated feature names "
                                              "(default: all numeric features)")
    p_explain.set_defaults(func=cmd_explain)

    p_cmp = sub.add_parser("compare-links",
                           help="train per-term-link and link-at-sum variants and "
                                "compare metrics and additivity")
    p_cmp.add_argument("--config", required=True, help="regression run config JSON")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--seed", type=int, help="override every seed in the config")
    p_cmp.set_defaults(func=cmd_compare_links)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InvalidInputError, ModelFormatError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except EviNamError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
