"""Tests for the dense reference evolution on small chains."""

import numpy as np
import pytest

from noisychain.exact import (
    DenseLindbladEvolver,
    dense_hamiltonian,
    dense_liouvillian,
    embed_superop_dense,
    evolve_lindblad_dense,
    evolve_pure,
    observables_dense,
    product_state_vector,
    site_operator,
)
from noisychain.linalg import expm, kron
from noisychain.model import (
    JUMP_OPERATORS,
    HamiltonianParams,
    NoiseParams,
    PAULI_X,
    PAULI_Z,
    unvectorize,
    vectorize,
)
from noisychain.mpdo import all_down_state, plus_state


def random_density(n, seed):
    rng = np.random.default_rng(seed)
    dim = 2**n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# ---- operators and state vectors ----


def test_site_operator_msb_convention():
    # site 0 is the most significant bit
    np.testing.assert_array_equal(site_operator(PAULI_Z, 0, 2), np.diag([1, 1, -1, -1]))
    np.testing.assert_array_equal(site_operator(PAULI_Z, 1, 2), np.diag([1, -1, 1, -1]))


def test_site_operator_range():
    with pytest.raises(ValueError, match="out of range"):
        site_operator(PAULI_Z, 2, 2)


def test_product_state_vector_values():
    np.testing.assert_allclose(product_state_vector(plus_state(2)), np.full(4, 0.5))
    np.testing.assert_allclose(product_state_vector(all_down_state(2)), [0, 0, 0, 1])


# ---- Hamiltonian ----


def test_pure_ising_two_site_spectrum():
    params = HamiltonianParams(n=2, j_z=1.0, j_x=0.0, h_x=0.0)
    np.testing.assert_allclose(
        dense_hamiltonian(params), np.diag([-0.5, 0.5, 0.5, -0.5]), atol=1e-15
    )


def test_dense_hamiltonian_matches_kron_construction():
    params = HamiltonianParams(n=3, j_z=1.0, j_x=0.1, h_x=0.1)
    eye = np.eye(2, dtype=complex)
    x, z = PAULI_X, PAULI_Z
    expected = -0.5 * (
        1.0 * (kron(kron(z, z), eye) + kron(eye, kron(z, z)))
        + 0.1 * (kron(kron(x, x), eye) + kron(eye, kron(x, x)))
        + 0.1 * (kron(kron(x, eye), eye) + kron(kron(eye, x), eye) + kron(eye, kron(eye, x)))
    )
    np.testing.assert_allclose(dense_hamiltonian(params), expected, atol=1e-15)


def test_dense_hamiltonian_is_hermitian():
    h = dense_hamiltonian(HamiltonianParams(n=4))
    np.testing.assert_allclose(h, h.conj().T, atol=1e-15)


def test_dense_hamiltonian_size_guard():
    with pytest.raises(ValueError, match="n <= 12"):
        dense_hamiltonian(HamiltonianParams(n=13))


# ---- Liouvillian ----


def test_dense_liouvillian_action_matches_master_equation():
    # independent oracle: -i[H, rho] + gamma sum_{i, mu} (s rho s - rho)
    params = HamiltonianParams(n=2)
    noise = NoiseParams(gamma=0.07)
    h = dense_hamiltonian(params)
    rho = random_density(2, seed=11)
    expected = -1j * (h @ rho - rho @ h)
    for i in range(2):
        for sigma in JUMP_OPERATORS:
            s = site_operator(sigma, i, 2)
            expected += noise.gamma * (s @ rho @ s.conj().T - rho)
    lv = dense_liouvillian(params, noise)
    np.testing.assert_allclose(unvectorize(lv @ vectorize(rho)), expected, atol=1e-13)


def test_dense_liouvillian_size_guard():
    with pytest.raises(ValueError, match="n <= 6"):
        dense_liouvillian(HamiltonianParams(n=7), NoiseParams(gamma=0.0))


# ---- superoperator embedding ----


def test_embed_single_site_superop():
    # vec(X rho X) embedded at each site of a 2-site chain
    sup = kron(PAULI_X, PAULI_X.T)
    rho = random_density(2, seed=3)
    for site in range(2):
        big = embed_superop_dense(sup, n=2, first_site=site)
        x = site_operator(PAULI_X, site, 2)
        np.testing.assert_allclose(
            unvectorize(big @ vectorize(rho)), x @ rho @ x, atol=1e-14
        )


def test_embed_two_site_superop():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    sup = kron(a, a.conj())  # vec(A rho A^dagger) on two sites
    rho = random_density(3, seed=7)
    for first in range(2):
        big = embed_superop_dense(sup, n=3, first_site=first)
        a_big = (
            kron(a, np.eye(2, dtype=complex))
            if first == 0
            else kron(np.eye(2, dtype=complex), a)
        )
        np.testing.assert_allclose(
            unvectorize(big @ vectorize(rho)), a_big @ rho @ a_big.conj().T, atol=1e-13
        )


def test_embed_superop_validation():
    with pytest.raises(ValueError, match="4\\^k"):
        embed_superop_dense(np.eye(6), n=3, first_site=0)
    with pytest.raises(ValueError, match="out of range"):
        embed_superop_dense(np.eye(16), n=2, first_site=1)


# ---- pure evolution ----


def test_evolve_pure_matches_expm():
    params = HamiltonianParams(n=3)
    psi0 = product_state_vector(plus_state(3))
    t = 0.7
    expected = expm(-1j * dense_hamiltonian(params) * t) @ psi0
    np.testing.assert_allclose(evolve_pure(psi0, params, t).data, expected, atol=1e-12)


def test_evolve_pure_preserves_norm_and_energy():
    params = HamiltonianParams(n=4)
    psi0 = product_state_vector(plus_state(4))
    h = dense_hamiltonian(params)
    e0 = np.real(np.vdot(psi0, h @ psi0))
    for t in [0.5, 2.0, 10.0]:
        psi = evolve_pure(psi0, params, t).data
        np.testing.assert_allclose(np.linalg.norm(psi), 1.0, rtol=1e-12)
        np.testing.assert_allclose(np.real(np.vdot(psi, h @ psi)), e0, rtol=1e-11)


def test_evolve_pure_t_zero_is_identity():
    params = HamiltonianParams(n=2)
    psi0 = product_state_vector(plus_state(2))
    np.testing.assert_allclose(evolve_pure(psi0, params, 0.0).data, psi0, atol=1e-14)


def test_evolve_pure_validates_input():
    params = HamiltonianParams(n=2)
    with pytest.raises(ValueError, match="shape"):
        evolve_pure(np.ones(3) / np.sqrt(3), params, 1.0)
    with pytest.raises(ValueError, match="normalized"):
        evolve_pure(np.array([1.0, 0.0, 0.0, 1.0]), params, 1.0)


# ---- Lindblad evolution ----


def test_expm_path_matches_generator_exponential():
    params = HamiltonianParams(n=3)
    noise = NoiseParams(gamma=0.05)
    rho0 = random_density(3, seed=2)
    t = 0.4
    expected = unvectorize(expm(t * dense_liouvillian(params, noise)) @ vectorize(rho0))
    got = evolve_lindblad_dense(rho0, params, noise, t).data
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_rk4_path_matches_generator_exponential():
    # n = 5 takes the matrix-free branch; the 1024 x 1024 generator is the oracle
    params = HamiltonianParams(n=5)
    noise = NoiseParams(gamma=0.08)
    psi0 = product_state_vector(plus_state(5))
    rho0 = np.outer(psi0, psi0.conj())
    t = 0.3
    expected = unvectorize(expm(t * dense_liouvillian(params, noise)) @ vectorize(rho0))
    got = evolve_lindblad_dense(rho0, params, noise, t, dt=0.002).data
    np.testing.assert_allclose(got, expected, atol=1e-9)


def test_rk4_trace_is_exact_even_at_coarse_step():
    params = HamiltonianParams(n=5)
    noise = NoiseParams(gamma=0.1)
    psi0 = product_state_vector(plus_state(5))
    rho = evolve_lindblad_dense(np.outer(psi0, psi0.conj()), params, noise, 2.0, dt=0.1).data
    np.testing.assert_allclose(np.trace(rho), 1.0, rtol=1e-12)


@pytest.mark.parametrize("n", [3, 5])
def test_zero_noise_lindblad_equals_pure_evolution(n):
    params = HamiltonianParams(n=n)
    psi0 = product_state_vector(plus_state(n))
    t = 0.8
    pure = evolve_pure(psi0, params, t)
    mixed = evolve_lindblad_dense(
        np.outer(psi0, psi0.conj()), params, NoiseParams(gamma=0.0), t, dt=0.002
    )
    np.testing.assert_allclose(mixed.data, pure.density(), atol=1e-8)


def test_incremental_advance_matches_single_advance():
    params = HamiltonianParams(n=5)
    noise = NoiseParams(gamma=0.05)
    psi0 = product_state_vector(plus_state(5))
    rho0 = np.outer(psi0, psi0.conj())

    one = DenseLindbladEvolver(rho0, params, noise, max_step=0.005)
    one.advance(0.3)
    chunked = DenseLindbladEvolver(rho0, params, noise, max_step=0.005)
    for _ in range(3):
        chunked.advance(0.1)

    assert chunked.t == pytest.approx(0.3)
    np.testing.assert_allclose(chunked.rho, one.rho, atol=1e-10)


def test_propagator_cache_reused_on_repeated_duration():
    params = HamiltonianParams(n=2)
    psi0 = product_state_vector(plus_state(2))
    ev = DenseLindbladEvolver(np.outer(psi0, psi0.conj()), params, NoiseParams(gamma=0.01))
    ev.advance(0.05)
    ev.advance(0.05)
    assert len(ev._propagators) == 1
    assert ev.t == pytest.approx(0.1)


def test_advance_zero_is_noop():
    params = HamiltonianParams(n=2)
    psi0 = product_state_vector(plus_state(2))
    rho0 = np.outer(psi0, psi0.conj())
    ev = DenseLindbladEvolver(rho0, params, NoiseParams(gamma=0.01))
    ev.advance(0.0)
    assert ev.t == 0.0
    np.testing.assert_array_equal(ev.rho, rho0)


def test_evolver_validates_inputs():
    params = HamiltonianParams(n=2)
    psi0 = product_state_vector(plus_state(2))
    rho0 = np.outer(psi0, psi0.conj())
    noise = NoiseParams(gamma=0.0)
    with pytest.raises(ValueError, match="n <= 8"):
        DenseLindbladEvolver(np.eye(512) / 512, HamiltonianParams(n=9), noise)
    with pytest.raises(ValueError, match="max_step"):
        DenseLindbladEvolver(rho0, params, noise, max_step=0.0)
    with pytest.raises(ValueError, match="shape"):
        DenseLindbladEvolver(np.eye(8) / 8, params, noise)
    with pytest.raises(ValueError, match="Hermitian"):
        bad = rho0 + 0.01j * np.eye(4)
        DenseLindbladEvolver(bad, params, noise)
    with pytest.raises(ValueError, match="trace"):
        DenseLindbladEvolver(2.0 * rho0, params, noise)
    ev = DenseLindbladEvolver(rho0, params, noise)
    with pytest.raises(ValueError, match="duration"):
        ev.advance(-0.1)
    with pytest.raises(ValueError, match="t must be"):
        evolve_lindblad_dense(rho0, params, noise, -1.0)


def test_state_property_is_mixed():
    params = HamiltonianParams(n=2)
    psi0 = product_state_vector(plus_state(2))
    ev = DenseLindbladEvolver(np.outer(psi0, psi0.conj()), params, NoiseParams(gamma=0.02))
    ev.advance(0.1)
    state = ev.state
    assert not state.pure
    assert state.n == 2


# ---- observables ----


def test_observables_at_t_zero():
    psi0 = product_state_vector(plus_state(4))
    state = evolve_pure(psi0, HamiltonianParams(n=4), 0.0)
    obs = observables_dense(state, psi0)
    np.testing.assert_allclose(obs.loschmidt, 1.0, rtol=1e-13)
    np.testing.assert_allclose(obs.return_rate, 0.0, atol=1e-13)
    np.testing.assert_allclose(obs.czz, 0.0, atol=1e-13)


def test_observables_pure_and_mixed_paths_agree():
    params = HamiltonianParams(n=3)
    psi0 = product_state_vector(plus_state(3))
    pure = evolve_pure(psi0, params, 1.3)
    from noisychain.exact import DenseState

    mixed = DenseState(n=3, data=pure.density(), pure=False)
    obs_p = observables_dense(pure, psi0)
    obs_m = observables_dense(mixed, psi0)
    np.testing.assert_allclose(obs_m.loschmidt, obs_p.loschmidt, rtol=1e-12)
    np.testing.assert_allclose(obs_m.return_rate, obs_p.return_rate, rtol=1e-12)
    np.testing.assert_allclose(obs_m.czz, obs_p.czz, rtol=1e-10, atol=1e-12)


def test_observables_single_site_czz_is_zero():
    from noisychain.exact import DenseState

    ket = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    state = DenseState(n=1, data=ket, pure=True)
    obs = observables_dense(state, ket)
    assert obs.czz == 0.0
    np.testing.assert_allclose(obs.loschmidt, 1.0, rtol=1e-14)
