"""Quantum-Train: generate the slow-programmer weights from QNN basis probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .circuits import QT_QUBITS, Topology, build_qt_circuit
from .programmer import SLOW_SIZE, SlowWeights
from .sim import ShapeError, basis_probabilities, observable_gradient, run_circuit

BitEncoding = Literal["binary", "signed"]

NUM_BASIS = 2**QT_QUBITS
MAPPING_SIZE = QT_QUBITS + 2
assert QT_QUBITS == math.ceil(math.log2(SLOW_SIZE))


@dataclass
class MappingParams:
    """Affine map (7 bit features, scaled probability) -> one weight."""

    bit_weights: np.ndarray
    prob_weight: float
    bias: float

    @classmethod
    def from_flat(cls, beta) -> "MappingParams":
        beta = np.asarray(beta, dtype=np.float64)
        if beta.shape != (MAPPING_SIZE,):
            raise ShapeError(f"expected {MAPPING_SIZE} mapping parameters, got {beta.shape}")
        return cls(beta[:QT_QUBITS].copy(), float(beta[QT_QUBITS]), float(beta[QT_QUBITS + 1]))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.bit_weights, [self.prob_weight, self.bias]])


@dataclass
class QtModel:
    gamma: np.ndarray
    beta: MappingParams
    prob_scale: float = float(NUM_BASIS)
    bit_encoding: BitEncoding = "binary"
    topology: Topology = "chain"
    rotations_first: bool = False

    @property
    def num_layers(self) -> int:
        return len(self.gamma) // QT_QUBITS


def bit_features(encoding: BitEncoding = "binary") -> np.ndarray:
    """(106, 7) matrix of basis-label bits for the consumed basis states."""
    idx = np.arange(SLOW_SIZE)[:, None]
    bits = ((idx >> np.arange(QT_QUBITS)[None, :]) & 1).astype(np.float64)
    if encoding == "binary":
        return bits
    if encoding == "signed":
        return 2 * bits - 1
    raise ValueError(f"unknown bit encoding {encoding!r}")


def _qt_circuit(gamma: np.ndarray, topology: Topology, rotations_first: bool):
    if gamma.ndim != 1 or gamma.size == 0 or gamma.size % QT_QUBITS:
        raise ShapeError(f"gamma length must be a positive multiple of {QT_QUBITS}, "
                         f"got shape {gamma.shape}")
    return build_qt_circuit(gamma.size // QT_QUBITS, topology=topology,
                            rotations_first=rotations_first)


def qnn_probabilities(gamma, topology: Topology = "chain",
                      rotations_first: bool = False) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=np.float64)
    circuit = _qt_circuit(gamma, topology, rotations_first)
    return basis_probabilities(run_circuit(circuit, gamma))


def qnn_probabilities_vjp(gamma, cotangent, topology: Topology = "chain",
                          rotations_first: bool = False) -> np.ndarray:
    """d<cotangent, probs>/d gamma."""
    gamma = np.asarray(gamma, dtype=np.float64)
    circuit = _qt_circuit(gamma, topology, rotations_first)
    return observable_gradient(circuit, gamma, "probs", cotangent)


def map_weights_flat(probs, beta: MappingParams, prob_scale: float = float(NUM_BASIS),
                     bit_encoding: BitEncoding = "binary") -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (NUM_BASIS,):
        raise ShapeError(f"expected {NUM_BASIS} probabilities, got shape {probs.shape}")
    return (bit_features(bit_encoding) @ beta.bit_weights
            + prob_scale * probs[:SLOW_SIZE] * beta.prob_weight + beta.bias)


def map_weights(probs, beta: MappingParams, prob_scale: float = float(NUM_BASIS),
                bit_encoding: BitEncoding = "binary") -> SlowWeights:
    """Map each of the first 106 basis states to one slow-programmer weight."""
    return SlowWeights.from_flat(map_weights_flat(probs, beta, prob_scale, bit_encoding))


def map_weights_vjp(probs, beta: MappingParams, d_kappa, prob_scale: float = float(NUM_BASIS),
                    bit_encoding: BitEncoding = "binary") -> tuple[np.ndarray, np.ndarray]:
    """Pull a cotangent on the 106 weights back to (d_probs[128], d_beta[9])."""
    probs = np.asarray(probs, dtype=np.float64)
    d_kappa = np.asarray(d_kappa, dtype=np.float64)
    scaled = prob_scale * probs[:SLOW_SIZE]
    d_beta = np.concatenate([bit_features(bit_encoding).T @ d_kappa,
                             [d_kappa @ scaled, d_kappa.sum()]])
    d_probs = np.zeros(NUM_BASIS)
    d_probs[:SLOW_SIZE] = d_kappa * prob_scale * beta.prob_weight
    return d_probs, d_beta


def generate_slow_weights(model: QtModel) -> SlowWeights:
    probs = qnn_probabilities(model.gamma, model.topology, model.rotations_first)
    return map_weights(probs, model.beta, model.prob_scale, model.bit_encoding)
