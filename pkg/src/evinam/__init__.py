"""Evidential neural additive models.

One forward pass yields a prediction, its aleatoric and epistemic
uncertainty, and an exact per-feature decomposition of every distribution
parameter.  Regression uses a Normal-Inverse-Gamma head whose marginal is a
Student-t; classification uses a Dirichlet head over class evidence.
"""

from .data import (ColumnSpec, Dataset, Normalizer, SplitSpec, load_csv,
                   one_hot, split, synth_blobs, synth_cubic_1d, synth_cubic_2d,
                   write_csv)
from .estimators import EviNamClassifier, EviNamRegressor
from .exceptions import (ConfigError, DataError, DivergenceError, DomainError,
                         EviNamError, InvalidInputError, ModelFormatError,
                         ShapeError)
from .heads import (ContributionTable, DirichletParams, LinkBundle, NIGParams,
                    assemble_dirichlet, assemble_nig, contributions)
from .losses import LossBreakdown, LossConfig, dec_loss, evidential_regularizer, \
    nig_nll, regression_loss
from .metrics import (MetricReport, accuracy, auroc_ovr, brier_score,
                      classification_report, crps_student_t,
                      expected_calibration_error, mae, nll_metric, r_squared,
                      regression_report)
from .model import EviNamModel
from .serialize import load_model, save_model
from .smoothing import lowess
from .training import Adam, TrainConfig, TrainReport, train_model
from .uncertainty import (DirichletUncertainty, PredictiveDist,
                          UncertaintyPair, dirichlet_uncertainty,
                          per_feature_uncertainty, predictive_dist,
                          regression_uncertainty)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "ColumnSpec",
    "ConfigError",
    "ContributionTable",
    "DataError",
    "Dataset",
    "DirichletParams",
    "DirichletUncertainty",
    "DivergenceError",
    "DomainError",
    "EviNamClassifier",
    "EviNamError",
    "EviNamModel",
    "EviNamRegressor",
    "InvalidInputError",
    "LinkBundle",
    "LossBreakdown",
    "LossConfig",
    "MetricReport",
    "ModelFormatError",
    "NIGParams",
    "Normalizer",
    "PredictiveDist",
    "ShapeError",
    "SplitSpec",
    "TrainConfig",
    "TrainReport",
    "UncertaintyPair",
    "accuracy",
    "assemble_dirichlet",
    "assemble_nig",
    "auroc_ovr",
    "brier_score",
    "classification_report",
    "contributions",
    "crps_student_t",
    "dec_loss",
    "dirichlet_uncertainty",
    "evidential_regularizer",
    "expected_calibration_error",
    "load_csv",
    "load_model",
    "lowess",
    "mae",
    "nig_nll",
    "nll_metric",
    "one_hot",
    "per_feature_uncertainty",
    "predictive_dist",
    "r_squared",
    "regression_loss",
    "regression_report",
    "regression_uncertainty",
    "save_model",
    "split",
    "synth_blobs",
    "synth_cubic_1d",
    "synth_cubic_2d",
    "train_model",
    "write_csv",
]
