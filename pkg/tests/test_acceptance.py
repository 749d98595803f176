"""Acceptance criteria, each checked at its stated tolerance.

Every test records a PASS/FAIL line that the terminal summary prints at the
end of the run (see conftest.py). Training criteria run the full defaults and
take several minutes.
"""
import csv
import math
import time

import numpy as np
import pytest

from acceptance_log import check
from oracles import random_circuit, relative_errors
from qtfwp.cli import main
from qtfwp.datasets import (NARMA_WASHOUT, default_series, gen_damped_shm, gen_narma5,
                            make_windows)
from qtfwp.programmer import count_parameters
from qtfwp.quantum_train import generate_slow_weights, qnn_probabilities
from qtfwp.sim import (Cnot, CircuitSpec, Hadamard, RotY, StateVector, apply_gate,
                       finite_diff_gradient, new_zero_state, observable_gradient, run_circuit)
from qtfwp.training import (TrainableState, TrainConfig, backward_batch, fit, forward_batch,
                            mse_loss)

FD_STEP = 1e-4


def test_ac1_parameter_census():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    censuses = {n: tuple(count_parameters(TrainableState.initialize(n, rng))) for n in range(1, 6)}
    slow_size = generate_slow_weights(TrainableState.initialize(1, rng).qt_model()).flat().size
    elapsed = time.perf_counter() - start
    expected = {n: (14, 16 + 7 * n) for n in range(1, 6)}
    check("AC1 parameter census",
          censuses == expected and slow_size == 106 and elapsed < 1.0,
          f"default {censuses[1]}, N=1..5 quantum {[c[1] for c in censuses.values()]}, "
          f"slow weights {slow_size}, {elapsed:.3f} s")


def full_chain_numeric_gradient(state, windows, targets, config):
    grads = {}
    for name, arr in state.arrays().items():
        grad = np.zeros_like(arr)
        for i in np.ndindex(arr.shape):
            old = arr[i]
            arr[i] = old + FD_STEP
            up = mse_loss(forward_batch(state, windows, config), targets)
            arr[i] = old - FD_STEP
            down = mse_loss(forward_batch(state, windows, config), targets)
            arr[i] = old
            grad[i] = (up - down) / (2 * FD_STEP)
        grads[name] = grad
    return grads


def test_ac2_gradient_fidelity():
    start = time.perf_counter()
    ds = make_windows(default_series("shm"), 4, 0.67)
    windows, targets = ds.windows[:3], ds.targets[:3]
    state = TrainableState.initialize(1, np.random.default_rng(0))
    config = TrainConfig()
    _, analytic = backward_batch(state, windows, targets, config)
    numeric = full_chain_numeric_gradient(state, windows, targets, config)
    count = sum(g.size for g in analytic.values())
    chain_err = max(relative_errors(analytic[k], numeric[k]).max() for k in analytic)

    sim_err = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        circuit = CircuitSpec(5, tuple(random_circuit(rng, 5, 8, extra_gates=20)))
        params = rng.uniform(-np.pi, np.pi, 8)
        for observable, size in (("z", 5), ("probs", 32)):
            cot = rng.normal(size=size)
            sim_err = max(sim_err, relative_errors(
                observable_gradient(circuit, params, observable, cot),
                finite_diff_gradient(circuit, params, observable, cot, step=FD_STEP)).max())
    elapsed = time.perf_counter() - start
    check("AC2 gradient fidelity",
          count == 37 and chain_err < 1e-4 and sim_err < 1e-5 and elapsed < 30,
          f"{count} params, full-chain max rel err {chain_err:.2e} (< 1e-4), "
          f"sim-level {sim_err:.2e} (< 1e-5), {elapsed:.1f} s")


def basis(n, index):
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1
    return StateVector(n, amps)


def test_ac3_simulator_correctness():
    failures = []
    rng = np.random.default_rng(0)
    for _ in range(20):
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi = StateVector(3, psi / np.linalg.norm(psi))
        a, b = rng.uniform(-np.pi, np.pi, 2)
        for label, ops, expected in (
            ("H H = I", [Hadamard(1), Hadamard(1)], psi.amplitudes),
            ("CNOT CNOT = I", [Cnot(0, 2), Cnot(0, 2)], psi.amplitudes),
            ("RY(a) RY(b) = RY(a+b)", [RotY(2, a), RotY(2, b)],
             apply_gate(psi, RotY(2, a + b)).amplitudes),
            ("RY(a) RY(-a) = I", [RotY(0, a), RotY(0, -a)], psi.amplitudes),
        ):
            out = psi
            for op in ops:
                out = apply_gate(out, op)
            if not np.allclose(out.amplitudes, expected, atol=1e-12):
                failures.append(label)
    plus = apply_gate(new_zero_state(1), Hadamard(0)).amplitudes
    if not np.allclose(plus, [2**-0.5, 2**-0.5], atol=1e-15):
        failures.append("H|0>")
    if not np.allclose(apply_gate(new_zero_state(1), RotY(0, np.pi)).amplitudes, [0, 1], atol=1e-15):
        failures.append("RY(pi)|0>")
    # control qubit 0 set: |01> -> |11>, and a clear control leaves |10> alone
    if not np.allclose(apply_gate(basis(2, 0b01), Cnot(0, 1)).amplitudes, basis(2, 0b11).amplitudes):
        failures.append("CNOT|01>")
    if not np.allclose(apply_gate(basis(2, 0b10), Cnot(0, 1)).amplitudes, basis(2, 0b10).amplitudes):
        failures.append("CNOT|10>")

    norm_dev = 0.0
    for seed in range(20):
        r = np.random.default_rng(seed)
        ops = random_circuit(r, 8, 0, extra_gates=200 - 8)
        state = run_circuit(CircuitSpec(8, tuple(ops)))
        norm_dev = max(norm_dev, abs(float(state.norm()) - 1.0))
    uniform_dev = float(np.max(np.abs(qnn_probabilities(np.zeros(7)) - 1 / 128)))
    check("AC3 simulator correctness",
          not failures and norm_dev < 1e-10 and uniform_dev < 1e-12,
          f"gate identities {'ok' if not failures else failures}, "
          f"200-gate norm deviation {norm_dev:.1e} (< 1e-10), "
          f"uniform-probability deviation {uniform_dev:.1e} (< 1e-12)")


def test_ac4_narma_oracle():
    fixed_point = (0.7 - math.sqrt(0.39)) / 0.5
    y = gen_narma5(501, u=np.zeros(501)).x
    err = abs(y[500] - fixed_point)
    same = gen_narma5(1000, seed=5).x.tobytes() == gen_narma5(1000, seed=5).x.tobytes()
    check("AC4 NARMA5 oracle", err < 1e-6 and same,
          f"|y(500) - {fixed_point:.12f}| = {err:.1e} (< 1e-6), bit-reproducible {same}")


def test_ac5_shm_second_order():
    omega, zeta = 2 * math.pi * 0.1, 0.1

    def residual(dt, n):
        s = gen_damped_shm(omega, zeta, dt, n)
        x = s.x
        d2 = (x[2:] - 2 * x[1:-1] + x[:-2]) / dt**2
        d1 = (x[2:] - x[:-2]) / (2 * dt)
        return np.max(np.abs(d2 + 2 * zeta * omega * d1 + omega**2 * x[1:-1]))

    ratio = residual(0.1, 500) / residual(0.05, 1000)
    check("AC5 SHM second-order residual", 3.5 < ratio < 4.5,
          f"residual ratio when dt halves {ratio:.3f} (expected ~4, band 3.5..4.5)")


def narma_noise_floor(seed):
    """Expected normalized train MSE of the best possible predictor.

    y(n+1) contains 1.5 u(n-4) u(n) where u(n) is fresh uniform noise on
    [0, 0.5] not visible in the input window, so even a predictor that knows
    everything else carries variance 2.25 u(n-4)^2 / 48 per target.
    """
    raw = gen_narma5(seed=seed)
    ds = make_windows(default_series("narma5", seed), 4, 0.67)
    u = raw.extras["u"]
    n = np.arange(ds.split_index) + 4 + NARMA_WASHOUT - 1
    return float(np.mean(2.25 * u[n - 4] ** 2 / 48) / (ds.norm_max - ds.norm_min) ** 2)


TRAINING_TARGETS = {
    "shm": (1e-2, 10.0),
    "narma5": (1e-3, None),
    "gw": (2e-2, 10.0),
}


@pytest.mark.parametrize("name", list(TRAINING_TARGETS))
def test_ac6_training_reproduction(name):
    max_loss, min_ratio = TRAINING_TARGETS[name]
    runs = []
    for seed in range(3):
        ds = make_windows(default_series(name, seed), 4, 0.67)
        rec = fit(TrainConfig(seed=seed), ds)
        runs.append((rec.train_loss[-1], rec.train_loss[0] / rec.train_loss[-1], rec.wall_time, seed))
    final, ratio, _, seed = min(runs)
    slowest = max(r[2] for r in runs)
    passed = final <= max_loss and slowest < 15 * 60
    detail = f"best seed {seed}: final train MSE {final:.3e} (<= {max_loss:g})"
    if min_ratio is not None:
        passed = passed and ratio >= min_ratio
        detail += f", improvement {ratio:.0f}x (>= {min_ratio:g}x)"
    detail += f", slowest run {slowest:.0f} s"
    if name == "narma5":
        floors = [narma_noise_floor(s) for s in range(3)]
        detail += (f"; unpredictable-input noise floor {min(floors):.2e} "
                   f"exceeds the threshold, see ledger")
    check(f"AC6 training {name}", passed, detail)


def test_narma_threshold_is_below_noise_floor():
    # supporting analysis for the NARMA5 training criterion, not a criterion itself
    floors = [narma_noise_floor(s) for s in range(3)]
    assert all(f > 10 * 1e-3 for f in floors), floors


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ac7_layer_sweep(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = main(["sweep", "--dataset", "shm", "--layers", "1,2,3", "--repeats", "3",
                 "--svg", "--out", "sweep"])
    rows = read_rows(tmp_path / "sweep" / "sweep.csv")
    ok = code == 0 and len(rows) == 9 and all(r["status"] == "ok" for r in rows)

    def mean(layer, column):
        return float(np.mean([float(r[column]) for r in rows if r["qt_layers"] == str(layer)]))

    train_ratio = mean(1, "final_train_loss") / mean(3, "final_train_loss")
    test_ratio = mean(1, "final_test_loss") / mean(3, "final_test_loss")
    check("AC7 layer sweep", ok and 1 / 5 <= train_ratio <= 5,
          f"{len(rows)} cells, mean final train loss layer1/layer3 = {train_ratio:.2f} "
          f"(within 5x), test ratio {test_ratio:.2f}")


def test_ac8_determinism(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    commands = {
        "data shm": ["data", "shm", "--out", "{d}/shm.csv"],
        "data narma5": ["data", "narma5", "--seed", "3", "--out", "{d}/narma5.csv"],
        "data gw": ["data", "gw", "--seed", "3", "--out", "{d}/gw.csv"],
        "train": ["train", "--dataset", "narma5", "--epochs", "3", "--seed", "7",
                  "--batch-size", "64", "--out", "{d}/train"],
        "sweep": ["sweep", "--dataset", "gw", "--layers", "1,2", "--repeats", "2",
                  "--epochs", "2", "--seed", "4", "--out", "{d}/sweep"],
        "eval": ["eval", "--manifest", "{d}/train/run.json", "--out", "{d}/eval.csv"],
    }
    mismatched = []
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        for argv in commands.values():
            assert main([arg.format(d=d) for arg in argv]) == 0
    compared = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    for rel in compared:
        if (tmp_path / "a" / rel).read_bytes() != (tmp_path / "b" / rel).read_bytes():
            mismatched.append(str(rel))
    check("AC8 determinism", not mismatched and len(compared) >= 12,
          f"{len(compared)} CSV outputs from {', '.join(commands)} compared, "
          f"{'all byte-identical' if not mismatched else 'differ: ' + ', '.join(mismatched)}")
