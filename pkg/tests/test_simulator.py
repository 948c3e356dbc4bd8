import math

import numpy as np
import pytest
from scipy.linalg import expm

from vqse.qubitops import PAULI_PAIRS, PauliSum, dense_matrix
from vqse.simulator import (
    SETTINGS,
    CalibrationError,
    NoiseModel,
    SweepRecord,
    apply_exponential,
    default_grid,
    measure_setting,
    outcome_probabilities,
    prepare_ansatz,
    run_sweep,
    statevector_apply,
    unfold_readout,
)

YX = dense_matrix(PauliSum.from_labels({"YX": 1.0}))


def same_up_to_phase(a, b, tol=1e-12):
    return abs(abs(np.vdot(a, b)) - 1.0) < tol


def test_ansatz_special_angles():
    assert same_up_to_phase(prepare_ansatz(0.0), [1, 0, 0, 0])
    assert same_up_to_phase(prepare_ansatz(math.pi), [0, 0, 0, 1])


def test_ansatz_closed_form_and_implementations_agree():
    rng = np.random.default_rng(0)
    for theta in rng.uniform(-math.pi, math.pi, 16):
        reference = expm(-0.5j * theta * YX) @ np.array([1, 0, 0, 0], dtype=complex)
        closed = np.array([math.cos(theta / 2), 0, 0, math.sin(theta / 2)])
        circuit = prepare_ansatz(theta, "circuit")
        direct = prepare_ansatz(theta, "exponential")
        assert same_up_to_phase(circuit, reference)
        assert same_up_to_phase(closed, reference)
        np.testing.assert_allclose(direct, reference, atol=1e-12)
        assert np.linalg.norm(circuit) == pytest.approx(1.0, abs=1e-12)


def test_statevector_apply_kernels():
    psi = np.array([0.6, 0, 0.8j, 0])
    np.testing.assert_allclose(statevector_apply([np.eye(4)], psi), psi)
    np.testing.assert_allclose(statevector_apply(("exp", PauliSum.zero(2)), psi), psi)
    with pytest.raises(ValueError):
        apply_exponential(PauliSum.from_labels({"XX": 1.0}), psi)  # Hermitian, not anti-Hermitian


def test_measure_examples():
    zero = np.array([1, 0, 0, 0], dtype=complex)
    counts = measure_setting(zero, "ZZ", NoiseModel(shots=8192, readout=((0, 0), (0, 0))))
    np.testing.assert_array_equal(counts, [8192, 0, 0, 0])
    flips = NoiseModel(shots=0, readout=((0.1, 0.0), (0.1, 0.0)))
    np.testing.assert_allclose(measure_setting(zero, "ZZ", flips), [0.81, 0.09, 0.09, 0.01], atol=1e-12)
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    p = outcome_probabilities(bell, "XX", NoiseModel.noiseless())
    assert p[0] + p[3] == pytest.approx(1.0, abs=1e-12)


def test_unfolding():
    p = np.array([0.5, 0.2, 0.2, 0.1])
    assert np.allclose(unfold_readout(p, NoiseModel.noiseless()), p)
    noise = NoiseModel(shots=0, readout=((0.05, 0.05), (0.05, 0.05)))
    np.testing.assert_allclose(unfold_readout(noise.confusion_matrix() @ p, noise), p, atol=1e-12)
    with pytest.raises(CalibrationError):
        unfold_readout(p, NoiseModel(shots=0, readout=((0.6, 0.5), (0.0, 0.0))))


def test_unfolded_z_within_shot_noise():
    theta = 0.9
    psi = prepare_ansatz(theta)
    noise = NoiseModel(shots=8192, readout=((0.02, 0.02), (0.02, 0.02)))
    sigma = math.sqrt(1 - math.cos(theta) ** 2) / math.sqrt(8192) / (1 - 0.04)
    for trial in range(100):
        counts = measure_setting(psi, "ZZ", noise, np.random.default_rng(trial))
        probs = unfold_readout(counts, noise)
        z0 = probs @ np.array([1, -1, 1, -1])
        assert abs(z0 - math.cos(theta)) < 4 * sigma


def test_estimator_converges_with_shots():
    psi = prepare_ansatz(1.1)
    errors = []
    for shots in (2**16, 2**18, 2**20):
        noise = NoiseModel(shots=shots)
        errs = []
        for s in range(20):
            probs = unfold_readout(measure_setting(psi, "YY", noise, np.random.default_rng(s)), noise)
            errs.append(probs @ np.array([1, -1, -1, 1]) + math.sin(1.1))
        errors.append(math.sqrt(np.mean(np.square(errs))))
    # 4x the shots should halve the error; allow a factor of 3 either way
    for coarse, fine in zip(errors, errors[1:]):
        assert 2 / 3 < coarse / fine < 6


def test_default_grid():
    g = default_grid()
    assert len(g) == 257 and g[0] == pytest.approx(-math.pi) and g[-1] == pytest.approx(math.pi)


def test_sweep_noiseless_tables():
    rec = run_sweep([0.0], NoiseModel.noiseless())
    t = rec.table(0)
    assert t["ZI"] == t["IZ"] == t["ZZ"] == pytest.approx(1.0)
    assert all(abs(v) < 1e-12 for k, v in t.items() if set(k) & {"X", "Y"})
    rng = np.random.default_rng(2)
    thetas = rng.uniform(-math.pi, math.pi, 10)
    rec = run_sweep(thetas, NoiseModel.noiseless())
    for i, th in enumerate(thetas):
        assert rec.table(i)["ZI"] == pytest.approx(math.cos(th), abs=1e-12)
        assert rec.table(i)["YY"] == pytest.approx(-math.sin(th), abs=1e-12)


def test_sweep_invariants_and_determinism():
    noise = NoiseModel(shots=1000, seed=5)
    a = run_sweep(default_grid(9), noise)
    b = run_sweep(default_grid(9), noise)
    np.testing.assert_array_equal(a.counts, b.counts)
    np.testing.assert_array_equal(a.expectations, b.expectations)
    assert (a.counts.sum(axis=2) == 1000).all()
    assert (a.expectations[:, PAULI_PAIRS.index("II")] == 1.0).all()
    assert np.abs(a.expectations).max() <= 1.05
    c = run_sweep(default_grid(9), NoiseModel(shots=1000, seed=6))
    assert not np.array_equal(a.counts, c.counts)


def test_parallel_sweep_matches_serial():
    noise = NoiseModel(shots=500, seed=1)
    a = run_sweep(default_grid(6), noise, jobs=1)
    b = run_sweep(default_grid(6), noise, jobs=2)
    np.testing.assert_array_equal(a.counts, b.counts)


def test_sweep_json_round_trip(tmp_path):
    rec = run_sweep(default_grid(5), NoiseModel(shots=100, seed=3))
    path = tmp_path / "sweep.json"
    rec.save(path)
    back = SweepRecord.load(path)
    np.testing.assert_array_equal(back.counts, rec.counts)
    np.testing.assert_allclose(back.expectations, rec.expectations)
    assert back.settings == SETTINGS
