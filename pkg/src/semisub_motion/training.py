"""Adam optimization, learning-rate schedule, and the mini-batch training loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import WindowedDataset
from .errors import ConfigurationError, DomainError, NumericalError
from .network import Network, backward, forward, mse_loss


@dataclass
class AdamState:
    """Per-parameter first/second moment accumulators."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_parameters(cls, params: list[np.ndarray], **kwargs) -> "AdamState":
        return cls(first_moment=[np.zeros_like(p) for p in params],
                   second_moment=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray],
              state: AdamState, lr: float) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; parameters are updated in place."""
    if lr <= 0:
        raise DomainError(f"learning rate must be positive, got {lr}")
    if len(params) != len(grads):
        raise DomainError("params/grads length mismatch")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g**2
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params, state


@dataclass
class TrainingConfig:
    """Optimization hyperparameters; defaults follow the reference protocol."""

    initial_lr: float = 0.01
    warm_epochs: int = 20
    decay_factor: float = 0.1
    decay_every: int = 100
    batch_size: int = 512
    max_epochs: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.initial_lr <= 0 or self.batch_size < 1 or self.max_epochs < 0:
            raise ConfigurationError("invalid training configuration")
        if self.warm_epochs < 0 or self.decay_every < 1 or not 0 < self.decay_factor <= 1:
            raise ConfigurationError("invalid schedule configuration")


def lr_schedule(epoch: int, config: TrainingConfig) -> float:
    """Constant through the warm phase, then a tenfold decay at the end of
    the warm phase and again every ``decay_every`` epochs."""
    if epoch < 0:
        raise DomainError("epoch must be >= 0")
    if epoch < config.warm_epochs:
        return config.initial_lr
    decays = 1 + (epoch - config.warm_epochs) // config.decay_every
    return config.initial_lr * config.decay_factor**decays


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    test_loss: float


def dataset_loss(net: Network, ds: WindowedDataset, chunk: int = 4096) -> float:
    """Full-dataset MSE evaluated in chunks."""
    total = 0.0
    for start in range(0, len(ds), chunk):
        X, Y = ds.X[start:start + chunk], ds.Y[start:start + chunk]
        total += mse_loss(forward(net, X), Y) * X.shape[0]
    return total / len(ds)


def train(net: Network, training: WindowedDataset, test: WindowedDataset,
          config: TrainingConfig) -> tuple[Network, list[EpochRecord]]:
    """Seeded mini-batch training; returns the best-test-loss parameters.

    History records train and test loss per epoch.  Divergence aborts with
    a NumericalError carrying the history collected so far.
    """
    if (training.n, training.m, training.w, training.r) != (test.n, test.m, test.w, test.r):
        raise ConfigurationError("training and test datasets have mismatched (n, m, w, r)")
    if net.output_size != training.m:
        raise ConfigurationError(
            f"network output size {net.output_size} != prediction length {training.m}")
    history: list[EpochRecord] = []
    if config.max_epochs == 0:
        return net, history
    rng = np.random.default_rng(config.seed)
    params = net.parameters()
    state = AdamState.for_parameters(params)
    best_loss = np.inf
    best_params = [p.copy() for p in params]
    N = len(training)
    for epoch in range(config.max_epochs):
        lr = lr_schedule(epoch, config)
        perm = rng.permutation(N)
        loss_sum = 0.0
        for start in range(0, N, config.batch_size):
            idx = perm[start:start + config.batch_size]
            loss, grads = backward(net, training.X[idx], training.Y[idx])
            if not np.isfinite(loss):
                exc = NumericalError(f"training diverged at epoch {epoch}")
                exc.history = history
                raise exc
            adam_step(params, grads, state, lr)
            loss_sum += loss * idx.size
        train_loss = loss_sum / N
        test_loss = dataset_loss(net, test)
        history.append(EpochRecord(epoch, lr, train_loss, test_loss))
        if test_loss < best_loss:
            best_loss = test_loss
            for dst, src in zip(best_params, params):
                dst[...] = src
    net.set_parameters(best_params)
    return net, history
