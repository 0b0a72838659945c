"""The additive evidential model: per-feature nets plus a distribution head.

A model owns one shape net per encoded feature and, for regression, four
global raw bias terms.  Its forward pass produces distribution parameters
whose value is exactly the sum of post-link per-feature contributions, which
is what makes the decompositions in :func:`evinam.heads.contributions`
exact rather than approximate.
"""

from __future__ import annotations

import numpy as np

from . import heads
from .autodiff import Tensor
from .exceptions import ConfigError, InvalidInputError, ShapeError
from .heads import DirichletParams, LinkBundle, NIGParams
from .networks import ShapeNet, ShapeNetConfig, init_shape_net, shape_forward


# Raw bias init for the positive-linked parameters (nu, alpha, beta).  Deeply
# negative raw values put the softplus links in their flat tail, so the model
# starts with essentially zero global evidence and the per-feature nets have
# to earn evidence from data.  A constant bias cannot then mask the evidence
# collapse that signals out-of-distribution inputs.  The location bias for
# gamma starts at zero.
RAW_EVIDENCE_BIAS_INIT = -10.0


class EviNamModel:
    """Shape nets, bias terms, and head assembly for one task."""

    def __init__(self, task: str, feature_names: list[str], nets: list[ShapeNet],
                 biases: list[Tensor] | None, links: LinkBundle = heads.DEFAULT_LINKS,
                 link_at_sum: bool = False, evidence_link: str = "softplus",
                 nu_floor: float = heads.NU_FLOOR,
                 class_names: tuple[str, ...] | None = None):
        if task not in ("regression", "classification"):
            raise ConfigError(f"unknown task {task!r}")
        if len(nets) != len(feature_names) or not nets:
            raise InvalidInputError("need one shape net per feature, at least one")
        if task == "regression" and (biases is None or len(biases) != 4):
            raise InvalidInputError("regression needs 4 bias terms")
        if task == "classification" and (not class_names or len(class_names) < 2):
            raise InvalidInputError("classification needs >= 2 class names")
        self.task = task
        self.feature_names = list(feature_names)
        self.nets = nets
        self.biases = biases
        self.links = links
        self.link_at_sum = bool(link_at_sum)
        self.evidence_link = evidence_link
        self.nu_floor = float(nu_floor)
        self.class_names = tuple(class_names) if class_names else None

    # -- construction ---------------------------------------------------------

    @classmethod
    def build(cls, task: str, feature_names: list[str],
              hidden_sizes: tuple[int, ...] = (64, 32), activation: str = "relu",
              separate_nets: bool = False, seed: int = 0,
              link_at_sum: bool = False, evidence_link: str = "softplus",
              class_names: tuple[str, ...] | None = None) -> "EviNamModel":
        n_outputs = 4 if task == "regression" else len(class_names or ())
        config = ShapeNetConfig(
            hidden_sizes=tuple(int(h) for h in hidden_sizes), activation=activation,
            n_outputs=n_outputs, init_seed=int(seed), separate_nets=separate_nets)
        nets = [init_shape_net(config, j) for j in range(len(feature_names))]
        biases = None
        if task == "regression":
            biases = [Tensor(0.0, requires_grad=True)]
            biases += [Tensor(RAW_EVIDENCE_BIAS_INIT, requires_grad=True)
                       for _ in range(3)]
        return cls(task=task, feature_names=feature_names, nets=nets, biases=biases,
                   link_at_sum=link_at_sum, evidence_link=evidence_link,
                   class_names=class_names)

    # -- parameters -------------------------------------------------------------

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for net in self.nets:
            params.extend(net.parameters())
        if self.biases is not None:
            params.extend(self.biases)
        return params

    def bias_values(self) -> list[float]:
        if self.biases is None:
            raise InvalidInputError("classification models have no learned biases")
        return [b.item() for b in self.biases]

    # -- forward passes -----------------------------------------------------------

    def _check_matrix(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise ShapeError(f"expected a [n, features] matrix, got shape {x.shape}")
        if x.shape[1] != len(self.feature_names):
            raise InvalidInputError(
                f"expected {len(self.feature_names)} features, got {x.shape[1]}")
        return x

    def raw_outputs(self, x: np.ndarray) -> list[list[Tensor]]:
        """Per-feature raw head outputs: a [feature][output] grid of tensors."""
        x = self._check_matrix(x)
        return [net.forward(Tensor(x[:, j].reshape(-1, 1)))
                for j, net in enumerate(self.nets)]

    def forward(self, x: np.ndarray) -> NIGParams | DirichletParams:
        raw = self.raw_outputs(x)
        if self.task == "regression":
            return heads.assemble_nig(raw, self.biases, links=self.links,
                                      link_at_sum=self.link_at_sum,
                                      nu_floor=self.nu_floor)
        return heads.assemble_dirichlet(raw, evidence_link=self.evidence_link)

    def raw_single(self, x: np.ndarray) -> np.ndarray:
        """Raw outputs for one row, as a [features, outputs] array."""
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != len(self.feature_names):
            raise InvalidInputError(
                f"expected {len(self.feature_names)} feature values, got {x.shape[0]}")
        return np.vstack([shape_forward(net, x[j:j + 1])
                          for j, net in enumerate(self.nets)])

    def contributions(self, x: np.ndarray) -> heads.ContributionTable:
        return heads.contributions(self, x)

    def partial_params(self, feature_index: int, grid: np.ndarray):
        """Parameters assembled from the bias terms plus one feature only."""
        if not (0 <= feature_index < len(self.nets)):
            raise InvalidInputError(f"feature_index {feature_index} out of range")
        grid = np.asarray(grid, dtype=np.float64).ravel()
        raw = [self.nets[feature_index].forward(Tensor(grid.reshape(-1, 1)))]
        if self.task == "regression":
            return heads.assemble_nig(raw, self.biases, links=self.links,
                                      link_at_sum=self.link_at_sum,
                                      nu_floor=self.nu_floor)
        return heads.assemble_dirichlet(raw, evidence_link=self.evidence_link)
