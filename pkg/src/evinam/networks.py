"""Per-feature shape function networks.

Each encoded feature gets its own small MLP that maps the scalar feature
value to one raw (pre-link) output per distribution parameter.  By default
the outputs share a trunk and differ only in their final linear heads;
``separate_nets=True`` gives every output its own trunk instead.

Final layers are zero-initialized, so an untrained network emits exactly
zero for every input.  The additive model therefore starts at its biases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ConfigError, DomainError, ShapeError

ACTIVATIONS = {"relu": ad.relu, "gelu": ad.gelu}


@dataclass(frozen=True)
class ShapeNetConfig:
    """Architecture of one per-feature network.

    hidden_sizes: widths of the trunk layers; must be non-empty positives.
    activation:   "relu" or "gelu".
    n_outputs:    raw outputs per feature (4 for the regression head, one
                  per class for the classification head).
    init_seed:    seed for weight initialization; combined with the feature
                  index so different features get different weights.
    separate_nets: build one trunk per output instead of a shared trunk.
    """

    hidden_sizes: tuple[int, ...] = (64, 32)
    activation: str = "relu"
    n_outputs: int = 4
    init_seed: int = 0
    separate_nets: bool = False

    def validate(self) -> None:
        if not self.hidden_sizes:
            raise ConfigError("hidden_sizes must contain at least one layer")
        if any(int(h) <= 0 for h in self.hidden_sizes):
            raise ConfigError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(
                f"activation must be one of {sorted(ACTIVATIONS)}, got {self.activation!r}")
        if int(self.n_outputs) < 1:
            raise ConfigError(f"n_outputs must be >= 1, got {self.n_outputs}")


class ShapeNet:
    """One feature's shape functions: scalar in, ``n_outputs`` raw values out."""

    def __init__(self, config: ShapeNetConfig, feature_index: int,
                 trunks: list[list[tuple[Tensor, Tensor]]],
                 heads: list[tuple[Tensor, Tensor]]):
        self.config = config
        self.feature_index = feature_index
        self.trunks = trunks
        self.heads = heads

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for trunk in self.trunks:
            for weight, bias in trunk:
                params.extend((weight, bias))
        for weight, bias in self.heads:
            params.extend((weight, bias))
        return params

    def forward(self, x_col: Tensor) -> list[Tensor]:
        """Map a column tensor of shape [n, 1] to ``n_outputs`` tensors of shape [n]."""
        if x_col.data.ndim != 2 or x_col.shape[1] != 1:
            raise ShapeError(f"shape net expects input of shape [n, 1], got {x_col.shape}")
        if not np.isfinite(x_col.data).all():
            raise DomainError("shape net input contains non-finite values")
        act = ACTIVATIONS[self.config.activation]
        hidden: list[Tensor] = []
        for trunk in self.trunks:
            h = x_col
            for weight, bias in trunk:
                h = act(ad.add(ad.matmul(h, weight), bias))
            hidden.append(h)
        outputs: list[Tensor] = []
        for k, (weight, bias) in enumerate(self.heads):
            h = hidden[0] if len(hidden) == 1 else hidden[k]
            outputs.append(ad.add(ad.matmul(h, weight), bias))
        return outputs


def init_shape_net(config: ShapeNetConfig, feature_index: int) -> ShapeNet:
    """Build a shape net with Kaiming-uniform trunks and zero final layers."""
    config.validate()
    if feature_index < 0:
        raise ConfigError(f"feature_index must be >= 0, got {feature_index}")
    rng = np.random.default_rng(
        [int(config.init_seed) % 2**32, 0x5eed, feature_index])

    def trunk_layers() -> list[tuple[Tensor, Tensor]]:
        layers = []
        fan_in = 1
        for width in config.hidden_sizes:
            bound = np.sqrt(6.0 / fan_in)
            weight = rng.uniform(-bound, bound, size=(fan_in, int(width)))
            layers.append((Tensor(weight, requires_grad=True),
                           Tensor(np.zeros(int(width)), requires_grad=True)))
            fan_in = int(width)
        return layers

    n_trunks = config.n_outputs if config.separate_nets else 1
    trunks = [trunk_layers() for _ in range(n_trunks)]
    last = int(config.hidden_sizes[-1])
    heads = [(Tensor(np.zeros(last), requires_grad=True),
              Tensor(0.0, requires_grad=True))
             for _ in range(config.n_outputs)]
    return ShapeNet(config, feature_index, trunks, heads)


def shape_forward(net: ShapeNet, x: np.ndarray) -> np.ndarray:
    """Plain-array convenience: values [n] in, raw outputs [n, n_outputs] out."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"shape_forward expects a 1-d array, got shape {x.shape}")
    outputs = net.forward(Tensor(x.reshape(-1, 1)))
    return np.stack([out.data for out in outputs], axis=1)
