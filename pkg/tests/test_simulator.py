import math

import numpy as np
import pytest

from dockclique import simulator as sim
from dockclique.encoding import CostDiagonal, QubitCapError
from dockclique.relax import WarmStartAngles

from dense import X, Y, Z, embed, rot, zero_state


def basis(n, z):
    v = np.zeros(1 << n, dtype=complex)
    v[z] = 1
    return sim.Statevector(n, v)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return sim.Statevector(n, v / np.linalg.norm(v))


def test_uniform_small():
    assert np.allclose(sim.init_uniform(1).amplitudes, [2**-0.5] * 2)
    assert np.allclose(sim.init_uniform(2).amplitudes, 0.5)


def test_uniform_norm_20():
    assert abs(sim.init_uniform(20).norm() - 1) < 1e-12


def test_uniform_cap():
    with pytest.raises(QubitCapError):
        sim.init_uniform(6, cap=5)


def test_warm_start_half_is_uniform():
    sv = sim.init_warm_start(WarmStartAngles(np.full(3, math.pi / 2), 0.25))
    assert np.allclose(sv.amplitudes, sim.init_uniform(3).amplitudes, atol=1e-15)


def test_warm_start_single_qubit_probability():
    sv = sim.init_warm_start(np.array([math.pi / 3]))
    assert sv.probabilities()[1] == pytest.approx(0.25, abs=1e-15)


def test_warm_start_marginals():
    thetas = np.array([0.3, 1.1, 2.5])
    p = sim.init_warm_start(thetas).probabilities()
    for q in range(3):
        marginal = sum(p[z] for z in range(8) if z >> q & 1)
        assert marginal == pytest.approx(math.sin(thetas[q] / 2) ** 2, abs=1e-12)


def test_rx_pi_flips():
    sv = sim.apply_rx(basis(1, 0), 0, math.pi)
    assert abs(sv.amplitudes[1]) == pytest.approx(1.0)
    assert abs(sv.amplitudes[0]) < 1e-15


def test_ry_two_pi_is_minus_identity():
    sv = random_state(3, 0)
    before = sv.amplitudes.copy()
    sim.apply_ry(sv, 1, 2 * math.pi)
    np.testing.assert_allclose(sv.amplitudes, -before, atol=1e-15)


def test_qubit_index_checked():
    with pytest.raises(IndexError):
        sim.apply_rx(sim.init_uniform(2), 2, 0.1)


def test_gate_sequence_matches_dense():
    n = 4
    rng = np.random.default_rng(3)
    sv = basis(n, 0)
    ref = zero_state(n)
    for _ in range(40):
        q = int(rng.integers(n))
        phi = float(rng.uniform(-4, 4))
        kind = int(rng.integers(3))
        getattr(sim, ("apply_rx", "apply_ry", "apply_rz")[kind])(sv, q, phi)
        ref = embed(rot((X, Y, Z)[kind], phi), q, n) @ ref
    assert np.max(np.abs(sv.amplitudes - ref)) < 1e-12


def test_cost_phase_zero_and_constant():
    sv = random_state(3, 1)
    before = sv.amplitudes.copy()
    diag = CostDiagonal(3, np.random.default_rng(0).normal(size=8))
    sim.apply_cost_phase(sv, diag, 0.0)
    assert np.array_equal(sv.amplitudes, before)
    sim.apply_cost_phase(sv, CostDiagonal(3, np.full(8, 2.5)), 0.9)
    np.testing.assert_allclose(sv.probabilities(), np.abs(before) ** 2, atol=1e-15)


def test_cost_phase_elementwise():
    sv = random_state(3, 2)
    before = sv.amplitudes.copy()
    energies = np.random.default_rng(1).normal(size=8)
    sim.apply_cost_phase(sv, CostDiagonal(3, energies), 0.7)
    for z in range(8):
        expected = before[z] * complex(math.cos(-0.7 * energies[z]), math.sin(-0.7 * energies[z]))
        assert abs(sv.amplitudes[z] - expected) < 1e-15
    np.testing.assert_allclose(np.abs(sv.amplitudes), np.abs(before), rtol=1e-15)


def test_cost_phase_dims():
    with pytest.raises(ValueError):
        sim.apply_cost_phase(sim.init_uniform(2), CostDiagonal(3, np.zeros(8)), 0.1)


def test_warm_start_mixer_identity_at_zero():
    sv = random_state(3, 4)
    before = sv.amplitudes.copy()
    sim.apply_warm_start_mixer(sv, np.array([0.4, 1.2, 2.0]), 0.0)
    np.testing.assert_allclose(sv.amplitudes, before, atol=1e-15)


def test_warm_start_mixer_fixes_initial_state():
    thetas = np.full(3, math.pi / 2)
    psi0 = sim.init_warm_start(thetas)
    sv = sim.apply_warm_start_mixer(psi0.copy(), thetas, 0.83)
    assert abs(np.vdot(psi0.amplitudes, sv.amplitudes)) == pytest.approx(1.0, abs=1e-12)
    general = np.array([0.3, 1.9, 2.6])
    psi0 = sim.init_warm_start(general)
    sv = sim.apply_warm_start_mixer(psi0.copy(), general, -1.4)
    assert abs(np.vdot(psi0.amplitudes, sv.amplitudes)) == pytest.approx(1.0, abs=1e-12)


def test_warm_start_mixer_dense():
    thetas, beta = np.array([0.7, 2.2]), 0.45
    sv = random_state(2, 5)
    ref = sv.amplitudes.copy()
    sim.apply_warm_start_mixer(sv, thetas, beta)
    for q in range(2):
        u = rot(Y, thetas[q]) @ rot(Z, -2 * beta) @ rot(Y, -thetas[q])
        ref = embed(u, q, 2) @ ref
    assert np.max(np.abs(sv.amplitudes - ref)) < 1e-12


def test_expectation_uniform_and_basis():
    energies = np.random.default_rng(2).normal(size=16)
    diag = CostDiagonal(4, energies)
    assert sim.expectation(sim.init_uniform(4), diag) == pytest.approx(energies.mean(), abs=1e-14)
    assert sim.expectation(basis(4, 11), diag) == energies[11]


def test_expectation_naive_sum():
    sv = random_state(10, 6)
    energies = np.random.default_rng(3).normal(size=1 << 10) * 5
    naive = 0.0
    for a, e in zip(sv.amplitudes, energies):
        naive += abs(a) ** 2 * e
    assert sim.expectation(sv, CostDiagonal(10, energies)) == pytest.approx(naive, abs=1e-10)


def test_sample_basis_state():
    h = sim.sample(basis(3, 5), 1000, seed=1)
    assert h.counts == {"101": 1000} and h.shots == 1000


def test_sample_uniform_frequencies():
    h = sim.sample(sim.init_uniform(2), 100_000, seed=0)
    assert sum(h.counts.values()) == 100_000
    for s in ("00", "01", "10", "11"):
        assert abs(h.counts[s] / 100_000 - 0.25) <= 0.01


def test_sample_deterministic_and_validated():
    sv = random_state(5, 7)
    assert sim.sample(sv, 500, seed=3).counts == sim.sample(sv, 500, seed=3).counts
    with pytest.raises(ValueError):
        sim.sample(sv, 0)


def test_norm_preserved_long_sequence():
    sv = sim.init_uniform(12)
    rng = np.random.default_rng(0)
    diag = CostDiagonal(12, rng.normal(size=1 << 12))
    for k in range(100):
        q = k % 12
        sim.apply_rx(sv, q, rng.uniform(-3, 3))
        sim.apply_ry(sv, (q + 5) % 12, rng.uniform(-3, 3))
        sim.apply_cost_phase(sv, diag, rng.uniform(-1, 1))
        assert abs(1 - sv.norm() ** 2) <= 1e-10


def test_dump_layout(tmp_path):
    sv = random_state(3, 8)
    sv.dump(tmp_path / "sv.bin")
    raw = (tmp_path / "sv.bin").read_bytes()
    assert np.frombuffer(raw[:8], "<i8")[0] == 3
    assert np.array_equal(np.frombuffer(raw[8:], "<c16"), sv.amplitudes)
