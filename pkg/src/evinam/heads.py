"""Distribution heads that turn per-feature raw outputs into parameters.

The central design decision lives here: constraint links are applied to each
feature's raw output *before* the terms are summed.  Each post-link term is
then a genuine contribution, so the assembled parameter is exactly the bias
term plus the feature terms while still satisfying its constraint (a sum of
positives is positive).  Applying the link after the sum, available as
``link_at_sum=True``, satisfies the constraints too but destroys additivity;
it exists only as a comparison baseline.

Regression uses a Normal-Inverse-Gamma head with parameters
(gamma, nu, alpha, beta); classification uses a Dirichlet head whose
concentration per class is one plus the summed per-feature evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ConfigError, DomainError, InvalidInputError

NIG_PARAM_NAMES = ("gamma", "nu", "alpha", "beta")

# Positive links clamp at this floor so extreme negative raw values cannot
# underflow a parameter that must stay strictly positive.
POSITIVE_LINK_FLOOR = 1e-300

# The mixture-weight parameter nu additionally gets this larger floor after
# assembly, keeping downstream divisions by nu well-conditioned.
NU_FLOOR = 1e-6


@dataclass(frozen=True)
class Link:
    """A constraint map with a graph-recording and a plain-array form."""

    name: str
    fn: Callable[[Tensor], Tensor]
    np_fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, value: Tensor) -> Tensor:
        return self.fn(value)


def _identity_t(t: Tensor) -> Tensor:
    return t


def _positive_t(t: Tensor) -> Tensor:
    return ad.maximum(ad.softplus(t), POSITIVE_LINK_FLOOR)


def _positive_plus_one_t(t: Tensor) -> Tensor:
    return ad.add(_positive_t(t), Tensor(1.0))


def _positive_np(z: np.ndarray) -> np.ndarray:
    return np.maximum(ad.softplus_values(z), POSITIVE_LINK_FLOOR)


LINKS = {
    "identity": Link("identity", _identity_t, lambda z: np.asarray(z, dtype=np.float64)),
    "softplus": Link("softplus", _positive_t, _positive_np),
    "softplus_plus_one": Link("softplus_plus_one", _positive_plus_one_t,
                              lambda z: _positive_np(z) + 1.0),
    # Exponential evidence grows without bound and overflows for large raw
    # values; it is available for experiments but never the default.
    "exp": Link("exp", ad.exp, np.exp),
}


@dataclass(frozen=True)
class LinkBundle:
    """Which link each NIG parameter uses.

    The defaults keep gamma unconstrained, map nu and beta through a clamped
    softplus, and map alpha through softplus plus one so that every term
    (including the bias) contributes at least one, giving alpha > 1 overall.
    """

    gamma: str = "identity"
    nu: str = "softplus"
    alpha: str = "softplus_plus_one"
    beta: str = "softplus"

    def validate(self) -> None:
        for name in NIG_PARAM_NAMES:
            key = getattr(self, name)
            if key not in LINKS:
                raise ConfigError(f"unknown link {key!r} for {name}")

    def link(self, param_name: str) -> Link:
        return LINKS[getattr(self, param_name)]


DEFAULT_LINKS = LinkBundle()


def _as_array(value) -> np.ndarray:
    if isinstance(value, Tensor):
        return value.data
    return np.asarray(value, dtype=np.float64)


@dataclass
class NIGParams:
    """Normal-Inverse-Gamma parameters, elementwise over a batch.

    Constraints: nu > 0, alpha > 1, beta > 0; gamma is unconstrained.
    Fields may be tensors (training path) or plain arrays/floats.
    """

    gamma: object
    nu: object
    alpha: object
    beta: object

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return tuple(_as_array(getattr(self, n)) for n in NIG_PARAM_NAMES)

    def validate(self) -> None:
        gamma, nu, alpha, beta = self.arrays()
        if not np.isfinite(gamma).all():
            raise DomainError("gamma contains non-finite values")
        if not (np.isfinite(nu).all() and np.min(nu, initial=np.inf) > 0.0):
            raise DomainError("nu must be finite and > 0")
        if not (np.isfinite(alpha).all() and np.min(alpha, initial=np.inf) > 1.0):
            raise DomainError("alpha must be finite and > 1")
        if not (np.isfinite(beta).all() and np.min(beta, initial=np.inf) > 0.0):
            raise DomainError("beta must be finite and > 0")


@dataclass
class DirichletParams:
    """Dirichlet concentrations as a per-class sequence.

    Each entry is a tensor or array over the batch; concentrations are >= 1
    by construction, and evidence is concentration minus one.
    """

    alphas: list

    @property
    def n_classes(self) -> int:
        return len(self.alphas)

    def matrix(self) -> np.ndarray:
        """Concentrations stacked to shape [n, n_classes]."""
        cols = [np.atleast_1d(_as_array(a)) for a in self.alphas]
        return np.stack(cols, axis=1)

    def strength(self) -> np.ndarray:
        return self.matrix().sum(axis=1)

    def evidence(self) -> np.ndarray:
        return self.matrix() - 1.0

    def validate(self) -> None:
        mat = self.matrix()
        if not np.isfinite(mat).all():
            raise DomainError("Dirichlet concentrations contain non-finite values")
        if np.min(mat, initial=np.inf) < 1.0:
            raise DomainError("Dirichlet concentrations must be >= 1")


def _check_raw_grid(raw_outputs: Sequence[Sequence], width: int, what: str) -> None:
    if len(raw_outputs) == 0:
        raise InvalidInputError(f"{what} needs at least one feature")
    for row in raw_outputs:
        if len(row) != width:
            raise InvalidInputError(
                f"{what} expects {width} raw outputs per feature, got {len(row)}")


def assemble_nig(raw_outputs: Sequence[Sequence], biases: Sequence,
                 links: LinkBundle = DEFAULT_LINKS, link_at_sum: bool = False,
                 nu_floor: float = NU_FLOOR) -> NIGParams:
    """Combine per-feature raw outputs and biases into NIG parameters.

    raw_outputs: one row per feature, each row holding the four raw values
        (gamma, nu, alpha, beta order) as tensors or array-likes.
    biases: four global raw bias terms in the same order.

    Default path applies each parameter's link per term, then sums; the
    parameter equals the sum of its post-link contributions exactly.  With
    ``link_at_sum=True`` raw values are summed first and the link applied
    once to the total.  Either way nu is floored at ``nu_floor`` afterwards.
    """
    links.validate()
    _check_raw_grid(raw_outputs, 4, "assemble_nig")
    if len(biases) != 4:
        raise InvalidInputError(f"assemble_nig expects 4 biases, got {len(biases)}")
    values: dict[str, Tensor] = {}
    for k, name in enumerate(NIG_PARAM_NAMES):
        link = links.link(name)
        terms = [ad._as_tensor(row[k]) for row in raw_outputs]
        bias = ad._as_tensor(biases[k])
        if link_at_sum:
            total = bias
            for term in terms:
                total = ad.add(total, term)
            values[name] = link(total)
        else:
            total = link(bias)
            for term in terms:
                total = ad.add(total, link(term))
            values[name] = total
    values["nu"] = ad.maximum(values["nu"], nu_floor)
    return NIGParams(**values)


def assemble_dirichlet(raw_evidence: Sequence[Sequence],
                       evidence_link: str = "softplus") -> DirichletParams:
    """Combine per-feature raw evidence into Dirichlet concentrations.

    raw_evidence: one row per feature, each row holding one raw value per
        class.  Class concentration = 1 + sum over features of the linked
        (non-negative) evidence.  There is no learned bias term; the
        constant one plays that role.
    """
    if evidence_link not in LINKS or evidence_link == "identity":
        raise ConfigError(f"evidence link must be positive, got {evidence_link!r}")
    link = LINKS[evidence_link]
    n_classes = len(raw_evidence[0]) if len(raw_evidence) else 0
    if n_classes < 2:
        raise InvalidInputError("assemble_dirichlet needs at least two classes")
    _check_raw_grid(raw_evidence, n_classes, "assemble_dirichlet")
    alphas: list[Tensor] = []
    for c in range(n_classes):
        total = ad._as_tensor(1.0)
        for row in raw_evidence:
            total = ad.add(total, link(ad._as_tensor(row[c])))
        alphas.append(total)
    return DirichletParams(alphas)


@dataclass
class ContributionTable:
    """Exact per-feature decomposition of every distribution parameter.

    ``values[j, k]`` is feature j's post-link contribution to parameter k and
    ``bias[k]`` the model-wide term, so ``bias + values.sum(axis=0)``
    reproduces the assembled parameters (before the nu floor, which only
    engages when every term has underflowed).  For the classification head
    the bias row holds the constant one added to each concentration.
    """

    feature_names: tuple[str, ...]
    param_names: tuple[str, ...]
    bias: np.ndarray
    values: np.ndarray

    def assembled(self) -> np.ndarray:
        return self.bias + self.values.sum(axis=0)

    def as_dict(self) -> dict:
        return {
            "bias": {p: float(self.bias[k]) for k, p in enumerate(self.param_names)},
            "features": {
                name: {p: float(self.values[j, k])
                       for k, p in enumerate(self.param_names)}
                for j, name in enumerate(self.feature_names)
            },
        }


def contributions(model, x: np.ndarray) -> ContributionTable:
    """Decompose one encoded input row into per-feature contributions.

    ``model`` is any object exposing ``feature_names``, ``raw_single(x)``
    giving the [n_features, n_outputs] raw matrix, plus head metadata
    (``task``, ``links``/``bias_values()`` for regression,
    ``class_names``/``evidence_link`` for classification).  Contributions
    are reported post-link, i.e. in parameter units.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    names = tuple(model.feature_names)
    if x.shape[0] != len(names):
        raise InvalidInputError(
            f"expected {len(names)} feature values, got {x.shape[0]}")
    raw = model.raw_single(x)
    if model.task == "regression":
        links: LinkBundle = model.links
        n_params = len(NIG_PARAM_NAMES)
        values = np.empty((len(names), n_params))
        bias = np.empty(n_params)
        bias_raw = model.bias_values()
        for k, pname in enumerate(NIG_PARAM_NAMES):
            np_fn = links.link(pname).np_fn
            values[:, k] = np_fn(raw[:, k])
            bias[k] = np_fn(np.asarray(bias_raw[k]))
        return ContributionTable(names, NIG_PARAM_NAMES, bias, values)
    class_names = tuple(str(c) for c in model.class_names)
    np_fn = LINKS[model.evidence_link].np_fn
    values = np_fn(raw)
    bias = np.ones(len(class_names))
    return ContributionTable(names, class_names, bias, values)
