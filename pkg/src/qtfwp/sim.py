"""Dense statevector simulation for small registers built from H, RY and CNOT.

Qubit ``k`` is bit ``k`` of the basis-state index (qubit 0 is the least
significant bit). Amplitude arrays may carry leading batch axes, so a single
circuit can be evaluated for many parameter rows at once; every function here
treats the trailing axis as the ``2**num_qubits`` amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence, Union

import numpy as np

MAX_QUBITS = 12

Observable = Literal["z", "probs"]


class ConfigurationError(ValueError):
    """Raised for out-of-range register sizes or builder settings."""


class CircuitError(ValueError):
    """Raised when a gate refers to a qubit that does not exist."""


class ShapeError(ValueError):
    """Raised when parameter or cotangent lengths do not match a circuit."""


@dataclass(frozen=True)
class Hadamard:
    target: int


@dataclass(frozen=True)
class RotY:
    """Y rotation. ``angle`` is used only when ``param_slot`` is None.

    A literal angle may be a float or an array of per-batch-row angles.
    """

    target: int
    angle: Union[float, np.ndarray] = 0.0
    param_slot: int | None = None


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int


GateOp = Union[Hadamard, RotY, Cnot]


def _op_qubits(op: GateOp) -> tuple[int, ...]:
    if isinstance(op, Cnot):
        return (op.control, op.target)
    return (op.target,)


@dataclass(frozen=True)
class CircuitSpec:
    num_qubits: int
    ops: tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            _check_op(op, self.num_qubits)
        slots = sorted({op.param_slot for op in self.ops
                        if isinstance(op, RotY) and op.param_slot is not None})
        if slots != list(range(len(slots))):
            raise CircuitError(f"parameter slots must be contiguous from 0, got {slots}")

    @property
    def num_params(self) -> int:
        slots = [op.param_slot for op in self.ops
                 if isinstance(op, RotY) and op.param_slot is not None]
        return max(slots) + 1 if slots else 0


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        if self.amplitudes.shape[-1] != 2**self.num_qubits:
            raise ShapeError(
                f"expected {2**self.num_qubits} amplitudes, got {self.amplitudes.shape[-1]}")

    def norm(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=-1)


def _check_num_qubits(num_qubits: int) -> None:
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits!r}")


def _check_op(op: GateOp, num_qubits: int) -> None:
    for q in _op_qubits(op):
        if not 0 <= q < num_qubits:
            raise CircuitError(f"{op} addresses qubit {q} on a {num_qubits}-qubit register")
    if isinstance(op, Cnot) and op.control == op.target:
        raise CircuitError(f"CNOT control and target coincide: {op}")


def new_zero_state(num_qubits: int) -> StateVector:
    _check_num_qubits(num_qubits)
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


@lru_cache(maxsize=None)
def _cnot_permutation(num_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**num_qubits)
    flip = (idx >> control) & 1
    return idx ^ (flip << target)


@lru_cache(maxsize=None)
def _z_signs(num_qubits: int) -> np.ndarray:
    idx = np.arange(2**num_qubits)[:, None]
    bits = (idx >> np.arange(num_qubits)[None, :]) & 1
    return (1 - 2 * bits).astype(np.float64)


def _apply_1q(amps: np.ndarray, num_qubits: int, target: int,
              m00, m01, m10, m11) -> np.ndarray:
    """Apply a 2x2 matrix to ``target``; entries may be per-batch-row arrays."""
    batch = amps.shape[:-1]
    view = amps.reshape(*batch, 2 ** (num_qubits - 1 - target), 2, 2**target)
    a0 = view[..., 0, :]
    a1 = view[..., 1, :]

    def expand(m):
        m = np.asarray(m)
        return m.reshape(m.shape + (1, 1)) if m.ndim else m

    m00, m01, m10, m11 = map(expand, (m00, m01, m10, m11))
    out = np.stack([m00 * a0 + m01 * a1, m10 * a0 + m11 * a1], axis=-2)
    return out.reshape(*out.shape[:-3], 2**num_qubits)


def _ry_entries(angle):
    c = np.cos(np.asarray(angle, dtype=np.float64) / 2)
    s = np.sin(np.asarray(angle, dtype=np.float64) / 2)
    return c, -s, s, c


def _ry_derivative_entries(angle):
    c = np.cos(np.asarray(angle, dtype=np.float64) / 2) / 2
    s = np.sin(np.asarray(angle, dtype=np.float64) / 2) / 2
    return -s, -c, c, -s


_H = 1 / np.sqrt(2)


def _apply(amps: np.ndarray, num_qubits: int, op: GateOp, angle=None) -> np.ndarray:
    if isinstance(op, Hadamard):
        return _apply_1q(amps, num_qubits, op.target, _H, _H, _H, -_H)
    if isinstance(op, RotY):
        return _apply_1q(amps, num_qubits, op.target,
                         *_ry_entries(op.angle if angle is None else angle))
    if isinstance(op, Cnot):
        return amps[..., _cnot_permutation(num_qubits, op.control, op.target)]
    raise CircuitError(f"unsupported gate {op!r}")


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    _check_op(op, state.num_qubits)
    return StateVector(state.num_qubits, _apply(state.amplitudes, state.num_qubits, op))


def _slot_angle(op: GateOp, params: np.ndarray):
    if isinstance(op, RotY):
        return op.angle if op.param_slot is None else params[..., op.param_slot]
    return None


def _as_params(circuit: CircuitSpec, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.ndim == 0 or params.shape[-1] != circuit.num_params:
        raise ShapeError(
            f"circuit expects {circuit.num_params} parameters, got shape {params.shape}")
    return params


def _batch_shape(circuit: CircuitSpec, params: np.ndarray, *extra) -> tuple[int, ...]:
    shapes = [params.shape[:-1], *extra]
    shapes += [np.shape(op.angle) for op in circuit.ops
               if isinstance(op, RotY) and op.param_slot is None]
    return np.broadcast_shapes(*shapes)


def _run(circuit: CircuitSpec, params: np.ndarray, batch: tuple[int, ...]) -> np.ndarray:
    n = circuit.num_qubits
    amps = np.zeros(batch + (2**n,), dtype=np.complex128)
    amps[..., 0] = 1.0
    for op in circuit.ops:
        amps = _apply(amps, n, op, _slot_angle(op, params))
    return amps


def run_circuit(circuit: CircuitSpec, params: Sequence[float] | np.ndarray = ()) -> StateVector:
    """Run ``circuit`` from |0...0> with slotted angles taken from ``params``.

    ``params`` has shape ``(..., num_params)``; leading axes are batch axes and
    broadcast against any array-valued literal angles in the circuit.
    """
    params = _as_params(circuit, params)
    return StateVector(circuit.num_qubits, _run(circuit, params, _batch_shape(circuit, params)))


def z_expectations(state: StateVector) -> np.ndarray:
    probs = np.abs(state.amplitudes) ** 2
    return probs @ _z_signs(state.num_qubits)


def basis_probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def _observe(state: StateVector, observable: Observable) -> np.ndarray:
    if observable == "z":
        return z_expectations(state)
    if observable == "probs":
        return basis_probabilities(state)
    raise ValueError(f"unknown observable {observable!r}")


def _diagonal(num_qubits: int, observable: Observable, cotangent: np.ndarray) -> np.ndarray:
    """Diagonal of the operator whose expectation is <cotangent, observable>."""
    if observable == "z":
        if cotangent.shape[-1] != num_qubits:
            raise ShapeError(f"Z cotangent needs {num_qubits} entries, got {cotangent.shape}")
        return cotangent @ _z_signs(num_qubits).T
    if observable == "probs":
        if cotangent.shape[-1] != 2**num_qubits:
            raise ShapeError(f"probability cotangent needs {2**num_qubits} entries, "
                             f"got {cotangent.shape}")
        return cotangent
    raise ValueError(f"unknown observable {observable!r}")


def observable_gradient(circuit: CircuitSpec, params, observable: Observable, cotangent,
                        final_state: StateVector | None = None) -> np.ndarray:
    """Exact gradient of ``<cotangent, observable(run_circuit(circuit, params))>``.

    Uses a single adjoint (reverse) sweep: the final state is un-computed gate
    by gate alongside the back-propagated bra, so memory stays O(2**n) per
    batch row. Pass ``final_state`` to reuse an existing forward pass.
    """
    params = _as_params(circuit, params)
    cotangent = np.asarray(cotangent, dtype=np.float64)
    n = circuit.num_qubits
    diag = _diagonal(n, observable, cotangent)
    batch = _batch_shape(circuit, params, cotangent.shape[:-1])

    psi = _run(circuit, params, batch) if final_state is None else final_state.amplitudes
    psi = np.broadcast_to(psi, batch + (2**n,))
    lam = diag * psi
    grad = np.zeros(batch + (circuit.num_params,), dtype=np.float64)

    for op in reversed(circuit.ops):
        angle = _slot_angle(op, params)
        if isinstance(op, RotY):
            psi = _apply(psi, n, op, -np.asarray(angle))
            if op.param_slot is not None:
                d_psi = _apply_1q(psi, n, op.target, *_ry_derivative_entries(angle))
                grad[..., op.param_slot] += 2 * np.sum(np.real(np.conj(lam) * d_psi), axis=-1)
            lam = _apply(lam, n, op, -np.asarray(angle))
        else:
            psi = _apply(psi, n, op)
            lam = _apply(lam, n, op)
    return grad


def finite_diff_gradient(circuit: CircuitSpec, params, observable: Observable, cotangent,
                         step: float = 1e-4) -> np.ndarray:
    """Central-difference estimate of :func:`observable_gradient`."""
    if step <= 0:
        raise ValueError("step must be positive")
    params = _as_params(circuit, params)
    cotangent = np.asarray(cotangent, dtype=np.float64)

    def objective(p):
        return np.sum(cotangent * _observe(run_circuit(circuit, p), observable), axis=-1)

    batch = _batch_shape(circuit, params, cotangent.shape[:-1])
    grad = np.zeros(batch + (circuit.num_params,))
    for k in range(circuit.num_params):
        shift = np.zeros(circuit.num_params)
        shift[k] = step
        grad[..., k] = (objective(params + shift) - objective(params - shift)) / (2 * step)
    return grad
