import numpy as np
import pytest

from oracles import dense_state
from qtfwp.circuits import build_fast_programmer, build_qt_circuit, build_variational_block
from qtfwp.sim import (Cnot, ConfigurationError, Hadamard, RotY, basis_probabilities,
                       run_circuit, z_expectations)


def test_two_qubit_block():
    assert build_variational_block(2, 0) == [
        Cnot(0, 1), RotY(0, param_slot=0), RotY(1, param_slot=1)]


def test_block_slot_count_and_disjoint_layers():
    first = {op.param_slot for op in build_variational_block(8, 0) if isinstance(op, RotY)}
    second = {op.param_slot for op in build_variational_block(8, 1) if isinstance(op, RotY)}
    assert len(first) == len(second) == 8
    assert first.isdisjoint(second)
    assert first | second == set(range(16))


def test_block_variants():
    ring = build_variational_block(4, 0, topology="ring")
    assert Cnot(3, 0) in ring
    flipped = build_variational_block(3, 0, rotations_first=True)
    assert isinstance(flipped[0], RotY) and isinstance(flipped[-1], Cnot)


def test_block_needs_two_qubits():
    with pytest.raises(ConfigurationError):
        build_variational_block(1, 0)


def test_fast_programmer_layout():
    c = build_fast_programmer(0.3)
    assert c.num_qubits == 8
    assert c.num_params == 16
    prefix = c.ops[:16]
    assert prefix[0::2] == tuple(Hadamard(q) for q in range(8))
    assert all(op.angle == 0.3 and op.param_slot is None for op in prefix[1::2])
    assert len(c.ops) == len(build_fast_programmer(-1.2).ops)


def test_fast_programmer_rejects_nonfinite():
    with pytest.raises(ValueError):
        build_fast_programmer(np.nan)


def test_fast_programmer_zero_input_zero_angles():
    z = z_expectations(run_circuit(build_fast_programmer(0.0), np.zeros(16)))
    np.testing.assert_allclose(z, 0.0, atol=1e-14)


def test_fast_programmer_matches_dense_oracle():
    rng = np.random.default_rng(2)
    theta = rng.uniform(-np.pi, np.pi, 16)
    c = build_fast_programmer(0.7)
    np.testing.assert_allclose(run_circuit(c, theta).amplitudes, dense_state(c, theta), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_fast_programmer_bounds(seed):
    rng = np.random.default_rng(seed)
    z = z_expectations(run_circuit(build_fast_programmer(rng.uniform(-3, 3)),
                                   rng.uniform(-np.pi, np.pi, 16)))
    assert np.all(np.abs(z) <= 1 + 1e-12)


def test_batched_encoding_matches_scalar():
    xs = np.array([0.1, 0.5, 0.9])
    theta = np.random.default_rng(0).normal(size=(3, 16))
    batched = z_expectations(run_circuit(build_fast_programmer(xs), theta))
    for i, x in enumerate(xs):
        np.testing.assert_allclose(
            batched[i], z_expectations(run_circuit(build_fast_programmer(x), theta[i])), atol=1e-15)


@pytest.mark.parametrize("layers, params", [(1, 7), (2, 14), (3, 21)])
def test_qt_param_count(layers, params):
    assert build_qt_circuit(layers).num_params == params


def test_qt_has_only_slotted_rotations():
    c = build_qt_circuit(2)
    assert all(op.param_slot is not None for op in c.ops if isinstance(op, RotY))


def test_qt_uniform_at_zero():
    p = basis_probabilities(run_circuit(build_qt_circuit(1), np.zeros(7)))
    np.testing.assert_allclose(p, 1 / 128, atol=1e-12)


def test_qt_needs_a_layer():
    with pytest.raises(ConfigurationError):
        build_qt_circuit(0)


@pytest.mark.parametrize("n", range(1, 6))
def test_total_quantum_count(n):
    assert build_fast_programmer(0.0).num_params + build_qt_circuit(n).num_params == 16 + 7 * n
