"""End-to-end training of the QT-QFWP model with exact reverse-mode gradients."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuits import FAST_LAYERS, FAST_QUBITS, QT_QUBITS, Topology, build_fast_programmer
from .datasets import WindowedDataset
from .programmer import READOUT_QUBITS, Census, PostProcessor, SlowWeights, count_parameters
from .quantum_train import (MAPPING_SIZE, NUM_BASIS, BitEncoding, MappingParams, QtModel,
                            map_weights_flat, map_weights_vjp, qnn_probabilities,
                            qnn_probabilities_vjp)
from .sim import observable_gradient, run_circuit, z_expectations

log = logging.getLogger(__name__)

PARAM_NAMES = ("gamma", "beta", "theta0", "post")


class NumericalError(RuntimeError):
    def __init__(self, epoch: int, message: str):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


@dataclass
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int | None = None
    seed: int = 0
    window: int = 4
    split_fraction: float = 0.67
    qt_layers: int = 1
    log_epochs: tuple[int, ...] = (1, 15, 30, 100)
    theta_carryover: bool = False
    topology: Topology = "chain"
    rotations_first: bool = False
    prob_scale: float = float(NUM_BASIS)
    bit_encoding: BitEncoding = "binary"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive or None for full batch")
        if self.qt_layers < 1:
            raise ValueError("qt_layers must be >= 1")
        if self.theta_carryover and self.batch_size is not None:
            raise ValueError("theta carry-over needs full-batch training")
        self.log_epochs = tuple(self.log_epochs)


@dataclass
class TrainableState:
    gamma: np.ndarray
    beta: np.ndarray
    theta0: np.ndarray
    post: np.ndarray

    @classmethod
    def initialize(cls, qt_layers: int, rng: np.random.Generator) -> "TrainableState":
        gamma = rng.uniform(-0.1, 0.1, QT_QUBITS * qt_layers)
        beta = rng.uniform(-0.5, 0.5, MAPPING_SIZE)
        theta0 = rng.uniform(-0.1, 0.1, (FAST_LAYERS, FAST_QUBITS))
        post = rng.uniform(-0.5, 0.5, READOUT_QUBITS + 1)
        return cls(gamma, beta, theta0, post)

    @property
    def qt_layers(self) -> int:
        return self.gamma.size // QT_QUBITS

    @property
    def post_processor(self) -> PostProcessor:
        return PostProcessor(self.post[:READOUT_QUBITS], float(self.post[READOUT_QUBITS]))

    def mapping(self) -> MappingParams:
        return MappingParams.from_flat(self.beta)

    def qt_model(self, config: TrainConfig | None = None) -> QtModel:
        config = config or TrainConfig()
        return QtModel(self.gamma, self.mapping(), config.prob_scale, config.bit_encoding,
                       config.topology, config.rotations_first)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "TrainableState":
        return TrainableState(**{k: v.copy() for k, v in self.arrays().items()})

    def to_json(self) -> dict:
        return {k: v.tolist() for k, v in self.arrays().items()}

    @classmethod
    def from_json(cls, data: dict) -> "TrainableState":
        state = cls(**{k: np.asarray(data[k], dtype=np.float64) for k in PARAM_NAMES})
        state.theta0 = state.theta0.reshape(FAST_LAYERS, FAST_QUBITS)
        return state


def mse_loss(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch {predictions.shape} vs {targets.shape}")
    if predictions.size == 0:
        raise ValueError("mse of an empty batch")
    return float(np.mean((predictions - targets) ** 2))


def _check_consecutive(windows: np.ndarray) -> None:
    if len(windows) > 1 and not np.array_equal(windows[1:, :-1], windows[:-1, 1:]):
        raise ValueError("theta carry-over needs consecutive stride-1 windows")


@dataclass
class _Tape:
    probs: np.ndarray
    kappa: np.ndarray
    slow: SlowWeights
    xs: np.ndarray
    h: np.ndarray
    L: np.ndarray
    Q: np.ndarray
    theta: np.ndarray
    circuit: object
    final_state: object
    z: np.ndarray
    predictions: np.ndarray


def _forward(state: TrainableState, windows, config: TrainConfig,
             probs: np.ndarray | None = None) -> _Tape:
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 2 or windows.shape[0] == 0:
        raise ValueError(f"windows must be a non-empty (count, w) array, got {windows.shape}")
    if probs is None:
        probs = qnn_probabilities(state.gamma, config.topology, config.rotations_first)
    kappa = map_weights_flat(probs, state.mapping(), config.prob_scale, config.bit_encoding)
    slow = SlowWeights.from_flat(kappa)

    if config.theta_carryover:
        _check_consecutive(windows)
        xs = np.concatenate([windows[0], windows[1:, -1]])
    else:
        xs = windows
    h = np.tanh(xs[..., None] * slow.encoder_w[:, 0] + slow.encoder_b)
    L = np.tanh(h @ slow.headL_w.T + slow.headL_b)
    Q = np.tanh(h @ slow.headQ_w.T + slow.headQ_b)
    updates = L[..., :, None] * Q[..., None, :]
    if config.theta_carryover:
        w = windows.shape[1]
        theta = state.theta0 + np.cumsum(updates, axis=0)[w - 1:]
    else:
        theta = state.theta0 + updates.sum(axis=1)

    circuit = build_fast_programmer(windows[:, -1], topology=config.topology,
                                    rotations_first=config.rotations_first)
    final = run_circuit(circuit, theta.reshape(len(windows), -1))
    z = z_expectations(final)
    predictions = state.post_processor(z)
    return _Tape(probs, kappa, slow, xs, h, L, Q, theta, circuit, final, z, predictions)


def forward_batch(state: TrainableState, windows, config: TrainConfig | None = None,
                  probs: np.ndarray | None = None) -> np.ndarray:
    """Predictions for every window, sharing one QNN evaluation across the batch.

    ``probs`` may carry a cached QNN output for ``state.gamma``.
    """
    return _forward(state, windows, config or TrainConfig(), probs).predictions


def _backward(state: TrainableState, tape: _Tape, d_pred: np.ndarray,
              config: TrainConfig) -> dict[str, np.ndarray]:
    post = state.post_processor
    d_post = np.concatenate([tape.z[:, :READOUT_QUBITS].T @ d_pred, [d_pred.sum()]])

    d_z = np.zeros_like(tape.z)
    d_z[:, :READOUT_QUBITS] = d_pred[:, None] * post.weights
    d_theta = observable_gradient(tape.circuit, tape.theta.reshape(len(d_pred), -1), "z", d_z,
                                  final_state=tape.final_state)
    d_theta = d_theta.reshape(tape.theta.shape)
    d_theta0 = d_theta.sum(axis=0)

    if config.theta_carryover:
        w = tape.xs.size - len(d_pred) + 1
        placed = np.zeros((tape.xs.size,) + d_theta.shape[1:])
        placed[w - 1:] = d_theta
        d_updates = np.cumsum(placed[::-1], axis=0)[::-1]
    else:
        d_updates = np.broadcast_to(d_theta[:, None], tape.L.shape[:2] + d_theta.shape[1:])

    L, Q, h, slow = tape.L, tape.Q, tape.h, tape.slow
    a_L = np.einsum("...ij,...j->...i", d_updates, Q) * (1 - L**2)
    a_Q = np.einsum("...ij,...i->...j", d_updates, L) * (1 - Q**2)
    a_h = (a_L @ slow.headL_w + a_Q @ slow.headQ_w) * (1 - h**2)

    def total(a, b=None):
        a2 = a.reshape(-1, a.shape[-1])
        if b is None:
            return a2.sum(axis=0)
        return a2.T @ b.reshape(-1, b.shape[-1])

    d_slow = SlowWeights(
        encoder_w=total(a_h * tape.xs[..., None])[:, None],
        encoder_b=total(a_h),
        headL_w=total(a_L, h),
        headL_b=total(a_L),
        headQ_w=total(a_Q, h),
        headQ_b=total(a_Q),
    )
    d_probs, d_beta = map_weights_vjp(tape.probs, state.mapping(), d_slow.flat(),
                                      config.prob_scale, config.bit_encoding)
    d_gamma = qnn_probabilities_vjp(state.gamma, d_probs, config.topology, config.rotations_first)
    return {"gamma": d_gamma, "beta": d_beta, "theta0": d_theta0, "post": d_post}


def backward_batch(state: TrainableState, windows, targets,
                   config: TrainConfig | None = None) -> tuple[float, dict[str, np.ndarray]]:
    """MSE loss and its exact gradient for every trainable array."""
    config = config or TrainConfig()
    targets = np.asarray(targets, dtype=np.float64)
    tape = _forward(state, windows, config)
    loss = mse_loss(tape.predictions, targets)
    d_pred = 2 * (tape.predictions - targets) / targets.size
    return loss, _backward(state, tape, d_pred, config)


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name in PARAM_NAMES:
            g = grads[name]
            m = self.m[name] = self.beta1 * self.m.get(name, 0.0) + (1 - self.beta1) * g
            v = self.v[name] = self.beta2 * self.v.get(name, 0.0) + (1 - self.beta2) * g * g
            m_hat = m / (1 - self.beta1**self.t)
            v_hat = v / (1 - self.beta2**self.t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class RunRecord:
    config: TrainConfig
    train_loss: list[float] = field(default_factory=list)
    test_loss: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    state: TrainableState | None = None
    census: Census | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    def losses_csv(self) -> str:
        rows = ["epoch,train_loss,test_loss"]
        rows += [f"{i},{tr:.17g},{te:.17g}"
                 for i, (tr, te) in enumerate(zip(self.train_loss, self.test_loss), start=1)]
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "config": asdict(self.config),
            "seed": self.seed,
            "train_loss": self.train_loss,
            "test_loss": self.test_loss,
            "wall_time": self.wall_time,
        }, indent=2)


def evaluate(state: TrainableState, dataset: WindowedDataset, split: str = "test",
             config: TrainConfig | None = None) -> tuple[float, np.ndarray]:
    """Loss and predictions on one split ("train", "test" or "all")."""
    config = config or TrainConfig()
    if config.theta_carryover:
        # the fast weights of later windows depend on every earlier window
        preds = forward_batch(state, dataset.windows, config)
        sl = {"train": slice(0, dataset.split_index), "test": slice(dataset.split_index, None),
              "all": slice(None)}[split]
        preds, targets = preds[sl], dataset.targets[sl]
    else:
        windows, targets = {"train": dataset.train, "test": dataset.test,
                            "all": (dataset.windows, dataset.targets)}[split]
        preds = forward_batch(state, windows, config)
    return mse_loss(preds, targets), preds


def _train_loss_and_grads(state, dataset, config, index=None):
    if config.theta_carryover:
        tape = _forward(state, dataset.windows, config)
        n = dataset.split_index
        d_pred = np.zeros(len(dataset.windows))
        err = tape.predictions[:n] - dataset.targets[:n]
        d_pred[:n] = 2 * err / n
        return float(np.mean(err**2)), _backward(state, tape, d_pred, config)
    windows, targets = dataset.train
    if index is not None:
        windows, targets = windows[index], targets[index]
    return backward_batch(state, windows, targets, config)


def fit(config: TrainConfig, dataset: WindowedDataset,
        state: TrainableState | None = None) -> RunRecord:
    """Train with Adam, recording train and test MSE after every epoch."""
    rng = np.random.default_rng(config.seed)
    if state is None:
        state = TrainableState.initialize(config.qt_layers, rng)
    census = count_parameters(state)
    expected = Census(MAPPING_SIZE + READOUT_QUBITS + 1,
                      FAST_LAYERS * FAST_QUBITS + QT_QUBITS * config.qt_layers)
    if census != expected:
        raise RuntimeError(f"parameter census {census} differs from expected {expected}")
    log.info("trainable parameters: %d classical, %d quantum", *census)
    if dataset.split_index < 1 or dataset.split_index >= len(dataset.targets):
        raise ValueError("dataset needs non-empty train and test splits")

    params = state.arrays()
    opt = Adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    record = RunRecord(config, census=census)
    start = time.perf_counter()
    n_train = dataset.split_index
    for epoch in range(1, config.epochs + 1):
        if config.batch_size is None:
            batches = [None]
        else:
            order = rng.permutation(n_train)
            batches = [order[i:i + config.batch_size] for i in range(0, n_train, config.batch_size)]
        for index in batches:
            loss, grads = _train_loss_and_grads(state, dataset, config, index)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise NumericalError(epoch, f"non-finite loss or gradient (loss={loss})")
            opt.step(params, grads)

        train_loss, _ = evaluate(state, dataset, "train", config)
        test_loss, _ = evaluate(state, dataset, "test", config)
        if not (np.isfinite(train_loss) and np.isfinite(test_loss)):
            raise NumericalError(epoch, f"non-finite loss (train={train_loss}, test={test_loss})")
        record.train_loss.append(train_loss)
        record.test_loss.append(test_loss)
        if epoch in config.log_epochs:
            log.info("epoch %d: train %.3e / test %.3e", epoch, train_loss, test_loss)
    record.wall_time = time.perf_counter() - start
    record.state = state
    return record
