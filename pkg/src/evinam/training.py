"""Mini-batch training with Adam, early stopping, and LR reduction.

One call to :func:`train_model` owns the whole loop: shuffled mini-batches,
a validation pass per epoch, reduce-on-plateau learning-rate decay, early
stopping on the validation loss with best-weight restore, and divergence
detection that aborts with the loss history attached.  All randomness flows
from the config seed, so identical inputs give identical trained weights.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor
from .exceptions import ConfigError, DivergenceError, InvalidInputError
from .losses import LossBreakdown, LossConfig
from .model import EviNamModel


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters.

    Early stopping counts epochs since the validation loss last improved by
    more than ``min_delta``; the scheduler halves the learning rate after
    ``scheduler_patience`` such epochs, down to ``min_lr``.
    """

    lr: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 5000
    patience: int = 50
    min_delta: float = 1e-6
    scheduler_factor: float = 0.5
    scheduler_patience: int = 10
    min_lr: float = 1e-6
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)

    def validate(self) -> None:
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if int(self.batch_size) < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if int(self.max_epochs) < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if int(self.patience) < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.min_delta < 0:
            raise ConfigError(f"min_delta must be >= 0, got {self.min_delta}")
        if not (0.0 < self.scheduler_factor < 1.0):
            raise ConfigError(
                f"scheduler_factor must be in (0, 1), got {self.scheduler_factor}")
        if int(self.scheduler_patience) < 1:
            raise ConfigError(
                f"scheduler_patience must be >= 1, got {self.scheduler_patience}")
        if not (0.0 < self.min_lr <= self.lr):
            raise ConfigError(f"min_lr must be in (0, lr], got {self.min_lr}")
        self.loss.validate()


@dataclass
class TrainReport:
    """Loss history and stopping bookkeeping for one training run."""

    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    lr_history: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0
    best_val_loss: float = float("inf")
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "train_losses": [float(v) for v in self.train_losses],
            "val_losses": [float(v) for v in self.val_losses],
            "lr_history": [float(v) for v in self.lr_history],
            "best_epoch": int(self.best_epoch),
            "stopped_epoch": int(self.stopped_epoch),
            "best_val_loss": float(self.best_val_loss),
            "wall_time_s": float(self.wall_time_s),
        }


class Adam:
    """Adam with bias correction; state per parameter, zeroed at creation."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ConfigError(f"lr must be > 0, got {lr}")
        if not (0.0 <= beta1 < 1.0) or not (0.0 <= beta2 < 1.0):
            raise ConfigError("betas must lie in [0, 1)")
        self.params = list(params)
        self.lr = float(lr)
        self.beta1, self.beta2, self.eps = float(beta1), float(beta2), float(eps)
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        """Apply one update from the accumulated gradients.

        Parameters with no gradient (never touched by backward) are left
        alone.  Leaf data is rebound, not mutated, so earlier graph nodes
        keep the values they were computed from.
        """
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            # np.asarray keeps 0-d parameters as arrays; plain arithmetic
            # would collapse them to numpy scalars
            p.data = np.asarray(
                p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))


def _snapshot(params: Sequence[Tensor]) -> list[np.ndarray]:
    return [p.data.copy() for p in params]


def _restore(params: Sequence[Tensor], saved: list[np.ndarray]) -> None:
    for p, data in zip(params, saved):
        p.data = data.copy()


LossFn = Callable[[object, np.ndarray, int], LossBreakdown]


def train_model(model: EviNamModel, x_train: np.ndarray, y_train: np.ndarray,
                x_val: np.ndarray, y_val: np.ndarray, config: TrainConfig,
                loss_fn: LossFn) -> TrainReport:
    """Fit the model in place and return the loss history.

    ``loss_fn(params, y_batch, epoch)`` builds the objective from the
    model's forward output; epochs are 0-based there (the first epoch's KL
    anneal factor is 0) and 1-based in the report.  On completion the
    parameters are restored to the best validation epoch.
    """
    config.validate()
    x_train = np.asarray(x_train, dtype=np.float64)
    x_val = np.asarray(x_val, dtype=np.float64)
    if x_train.ndim != 2 or x_val.ndim != 2:
        raise InvalidInputError("training matrices must be 2-d")
    n = x_train.shape[0]
    if n < 1 or x_val.shape[0] < 1:
        raise InvalidInputError("need at least one training and one validation row")
    y_train = np.asarray(y_train, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)

    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    optimizer = Adam(params, lr=config.lr)
    report = TrainReport()
    start = time.perf_counter()

    best_state = _snapshot(params)
    bad_epochs = 0
    stale_epochs = 0
    lr = config.lr

    def fail(message: str) -> DivergenceError:
        report.wall_time_s = time.perf_counter() - start
        return DivergenceError(message, report=report)

    for epoch in range(1, int(config.max_epochs) + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, int(config.batch_size)):
            idx = order[lo:lo + int(config.batch_size)]
            out = model.forward(x_train[idx])
            breakdown = loss_fn(out, y_train[idx], epoch - 1)
            batch_loss = breakdown.total.item()
            if not np.isfinite(batch_loss):
                raise fail(f"non-finite training loss at epoch {epoch}")
            optimizer.zero_grad()
            breakdown.total.backward()
            for p in params:
                if p.grad is not None and not np.isfinite(p.grad).all():
                    raise fail(f"non-finite gradient at epoch {epoch}")
            optimizer.step()
            epoch_loss += batch_loss * len(idx)
        report.train_losses.append(epoch_loss / n)

        val_out = model.forward(x_val)
        val_loss = loss_fn(val_out, y_val, epoch - 1).total.item()
        if not np.isfinite(val_loss):
            raise fail(f"non-finite validation loss at epoch {epoch}")
        report.val_losses.append(val_loss)
        report.lr_history.append(lr)

        if val_loss < report.best_val_loss - config.min_delta:
            report.best_val_loss = val_loss
            report.best_epoch = epoch
            best_state = _snapshot(params)
            bad_epochs = 0
            stale_epochs = 0
        else:
            bad_epochs += 1
            stale_epochs += 1

        if stale_epochs >= int(config.scheduler_patience) and lr > config.min_lr:
            lr = max(lr * config.scheduler_factor, config.min_lr)
            optimizer.lr = lr
            stale_epochs = 0

        report.stopped_epoch = epoch
        if bad_epochs >= int(config.patience):
            break

    _restore(params, best_state)
    report.wall_time_s = time.perf_counter() - start
    return report
