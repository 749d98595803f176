"""Slow programmer, additive outer-product update and the post-processing head."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .circuits import FAST_LAYERS, FAST_QUBITS, Topology, build_fast_programmer
from .sim import ShapeError, run_circuit, z_expectations

HIDDEN = 8
READOUT_QUBITS = 4

# (name, shape) in the order the flat weight vector is laid out, row-major.
SLOW_LAYOUT = (
    ("encoder_w", (HIDDEN, 1)),
    ("encoder_b", (HIDDEN,)),
    ("headL_w", (FAST_LAYERS, HIDDEN)),
    ("headL_b", (FAST_LAYERS,)),
    ("headQ_w", (FAST_QUBITS, HIDDEN)),
    ("headQ_b", (FAST_QUBITS,)),
)
SLOW_SIZE = sum(int(np.prod(shape)) for _, shape in SLOW_LAYOUT)


@dataclass
class SlowWeights:
    """Weights of the 1 -> 8 -> {2, 8} tanh network (106 scalars)."""

    encoder_w: np.ndarray
    encoder_b: np.ndarray
    headL_w: np.ndarray
    headL_b: np.ndarray
    headQ_w: np.ndarray
    headQ_b: np.ndarray

    @classmethod
    def from_flat(cls, flat) -> "SlowWeights":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (SLOW_SIZE,):
            raise ShapeError(f"expected {SLOW_SIZE} slow weights, got shape {flat.shape}")
        fields, start = {}, 0
        for name, shape in SLOW_LAYOUT:
            size = int(np.prod(shape))
            fields[name] = flat[start:start + size].reshape(shape)
            start += size
        return cls(**fields)

    @classmethod
    def zeros(cls) -> "SlowWeights":
        return cls.from_flat(np.zeros(SLOW_SIZE))

    def flat(self) -> np.ndarray:
        return np.concatenate([getattr(self, name).ravel() for name, _ in SLOW_LAYOUT])


@dataclass
class PostProcessor:
    """Affine head on the first four Z-expectations (4 weights + 1 bias)."""

    weights: np.ndarray
    bias: float

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return z[..., :READOUT_QUBITS] @ self.weights + self.bias


@dataclass
class QfwpParams:
    """Plain QFWP: slow-programmer weights trained directly, no Quantum-Train."""

    slow: SlowWeights
    theta0: np.ndarray
    post: PostProcessor


class Census(NamedTuple):
    classical: int
    quantum: int


def slow_forward(x, weights: SlowWeights) -> tuple[np.ndarray, np.ndarray]:
    """Return the per-layer vector L and per-qubit vector Q for input ``x``.

    ``x`` may be any array of scalars; outputs gain a trailing axis of size 2
    (L) and 8 (Q).
    """
    x = np.asarray(x, dtype=np.float64)
    h = np.tanh(x[..., None] * weights.encoder_w[:, 0] + weights.encoder_b)
    L = np.tanh(h @ weights.headL_w.T + weights.headL_b)
    Q = np.tanh(h @ weights.headQ_w.T + weights.headQ_b)
    return L, Q


def outer_update(theta: np.ndarray, L: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """theta'_ij = theta_ij + L_i * Q_j."""
    theta = np.asarray(theta, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if theta.shape[-2:] != (L.shape[-1], Q.shape[-1]):
        raise ShapeError(f"theta {theta.shape} does not match L {L.shape} x Q {Q.shape}")
    return theta + L[..., :, None] * Q[..., None, :]


def predict_window(window, slow: SlowWeights, theta0: np.ndarray, post: PostProcessor,
                   topology: Topology = "chain", rotations_first: bool = False) -> float:
    """Program the fast VQC step by step over ``window`` and read out one prediction."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1 or window.size == 0:
        raise ValueError("window must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(window)):
        raise ValueError("window contains non-finite values")
    theta = np.array(theta0, dtype=np.float64)
    for x in window:
        L, Q = slow_forward(x, slow)
        theta = outer_update(theta, L, Q)
    circuit = build_fast_programmer(window[-1], topology=topology, rotations_first=rotations_first)
    z = z_expectations(run_circuit(circuit, theta.ravel()))
    return float(post(z))


def count_parameters(model) -> Census:
    """Trainable (classical, quantum) scalar counts.

    For a Quantum-Train model the 106 slow weights are generated, so only the
    mapping model and the head are classical; the QNN angles join the fast
    programmer's angles on the quantum side.
    """
    post = model.post
    post = np.size(post.weights) + 1 if isinstance(post, PostProcessor) else np.size(post)
    theta0 = np.size(model.theta0)
    if isinstance(model, QfwpParams):
        return Census(model.slow.flat().size + post, theta0)
    return Census(np.size(model.beta) + post, theta0 + np.size(model.gamma))
