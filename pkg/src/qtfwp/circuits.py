"""Builders for the fast-programmer VQC and the Quantum-Train QNN."""

from __future__ import annotations

from typing import Literal

import numpy as np

from .sim import CircuitSpec, Cnot, ConfigurationError, GateOp, Hadamard, RotY

Topology = Literal["chain", "ring"]

FAST_QUBITS = 8
FAST_LAYERS = 2
QT_QUBITS = 7


def build_variational_block(num_qubits: int, layer_index: int, topology: Topology = "chain",
                            rotations_first: bool = False) -> list[GateOp]:
    """One entangling layer plus one slotted RY per qubit.

    Slots are ``layer_index * num_qubits + q`` so consecutive layers occupy
    disjoint contiguous ranges.
    """
    if num_qubits < 2:
        raise ConfigurationError("a variational block needs at least 2 qubits")
    if layer_index < 0:
        raise ConfigurationError("layer_index must be non-negative")
    if topology == "chain":
        pairs = [(q, q + 1) for q in range(num_qubits - 1)]
    elif topology == "ring":
        pairs = [(q, (q + 1) % num_qubits) for q in range(num_qubits)]
        if num_qubits == 2:
            pairs = pairs[:1]
    else:
        raise ConfigurationError(f"unknown topology {topology!r}")

    entangler = [Cnot(c, t) for c, t in pairs]
    rotations = [RotY(q, param_slot=layer_index * num_qubits + q) for q in range(num_qubits)]
    return rotations + entangler if rotations_first else entangler + rotations


def build_fast_programmer(x, num_qubits: int = FAST_QUBITS, num_layers: int = FAST_LAYERS,
                          topology: Topology = "chain", rotations_first: bool = False) -> CircuitSpec:
    """Encoding H, RY(x) on every qubit followed by ``num_layers`` variational blocks.

    ``x`` may be a scalar or a 1-D array; an array yields a batched circuit whose
    ``i``-th row encodes ``x[i]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("fast-programmer input must be finite")
    angle = float(x) if x.ndim == 0 else x
    ops: list[GateOp] = []
    for q in range(num_qubits):
        ops += [Hadamard(q), RotY(q, angle=angle)]
    for layer in range(num_layers):
        ops += build_variational_block(num_qubits, layer, topology, rotations_first)
    return CircuitSpec(num_qubits, ops)


def build_qt_circuit(num_layers: int, num_qubits: int = QT_QUBITS, topology: Topology = "chain",
                     rotations_first: bool = False) -> CircuitSpec:
    """Hadamard initialization and ``num_layers`` blocks; no data encoding."""
    if num_layers < 1:
        raise ConfigurationError("the QT circuit needs at least one layer")
    ops: list[GateOp] = [Hadamard(q) for q in range(num_qubits)]
    for layer in range(num_layers):
        ops += build_variational_block(num_qubits, layer, topology, rotations_first)
    return CircuitSpec(num_qubits, ops)
