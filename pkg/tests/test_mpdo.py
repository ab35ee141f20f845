"""Tests for the vectorized density-matrix chain and its evolution."""

import numpy as np
import pytest

from noisychain.exact import dense_liouvillian
from noisychain.linalg import TruncationPolicy, expm
from noisychain.model import (
    HamiltonianParams,
    NoiseParams,
    PAULI_X,
    PAULI_Z,
    middle_bond,
    trotter_sequence,
    unvectorize,
)
from noisychain.mpdo import (
    ECHO_FLOOR,
    MPDO,
    ProductState,
    all_down_state,
    load_checkpoint,
    plus_state,
    return_rate,
    save_checkpoint,
)

LOOSE = TruncationPolicy(schmidt_cutoff=0.0, chi_max=256)


# ---- product states ----


def test_plus_state_is_x_polarized():
    state = plus_state(3)
    assert state.n == 3
    for ket in state.kets:
        np.testing.assert_allclose(ket, np.array([1.0, 1.0]) / np.sqrt(2.0))


def test_all_down_state_basis_index():
    state = all_down_state(2)
    np.testing.assert_allclose(state.kets[0], [0.0, 1.0])


def test_product_state_rejects_unnormalized():
    with pytest.raises(ValueError, match="not normalized"):
        ProductState(kets=(np.array([1.0, 1.0]),))


def test_product_state_rejects_wrong_shape():
    with pytest.raises(ValueError, match="2-vector"):
        ProductState(kets=(np.array([1.0, 0.0, 0.0]),))


def test_product_state_rejects_empty():
    with pytest.raises(ValueError, match="at least one site"):
        ProductState(kets=())


def test_product_state_kets_are_locked():
    state = plus_state(2)
    with pytest.raises(ValueError):
        state.kets[0][0] = 2.0


# ---- return rate ----


def test_return_rate_zero_at_unit_echo():
    assert return_rate(1.0, 8) == 0.0


def test_return_rate_value():
    np.testing.assert_allclose(return_rate(0.5, 4), np.log(2.0) / 4.0, rtol=1e-15)


def test_return_rate_clamps_above_one():
    # slight >1 overshoot from truncation noise must not go negative
    assert return_rate(1.0 + 1e-12, 8) == 0.0


def test_return_rate_clamps_underflow():
    assert return_rate(1e-320, 2) == -np.log(ECHO_FLOOR) / 2.0


def test_return_rate_rejects_nonpositive_echo():
    with pytest.raises(ValueError, match="positive"):
        return_rate(0.0, 4)
    with pytest.raises(ValueError, match="positive"):
        return_rate(-0.1, 4)


def test_return_rate_rejects_bad_n():
    with pytest.raises(ValueError, match="n must be"):
        return_rate(0.5, 0)


# ---- construction and validation ----


def test_mpdo_rejects_empty():
    with pytest.raises(ValueError, match="at least one site"):
        MPDO([])


def test_mpdo_rejects_wrong_rank():
    with pytest.raises(ValueError, match=r"\(chi_l, 4, chi_r\)"):
        MPDO([np.zeros((1, 2, 1))])


def test_mpdo_rejects_open_boundary():
    with pytest.raises(ValueError, match="boundary"):
        MPDO([np.zeros((2, 4, 1))])


def test_mpdo_rejects_bond_mismatch():
    with pytest.raises(ValueError, match="bond mismatch"):
        MPDO([np.zeros((1, 4, 2)), np.zeros((3, 4, 1))])


def test_from_product_state_bond_dims_are_one():
    state = MPDO.from_product_state(plus_state(4))
    assert state.n == 4
    assert state.bond_dims() == [1, 1, 1]
    assert state.max_bond_dim() == 1


def test_single_site_max_bond_dim():
    state = MPDO.from_product_state(plus_state(1))
    assert state.bond_dims() == []
    assert state.max_bond_dim() == 1


def test_fresh_state_diagnostics():
    state = MPDO.from_product_state(plus_state(2))
    assert state.cumulative_discarded == 0.0
    assert state.cutoff_hits == 0
    assert state.chimax_hits == 0
    assert state.steps_taken == 0
    assert state.last_pre_trace == 1.0


# ---- exact observables on product / mixed states ----


def test_trace_of_pure_product_state():
    state = MPDO.from_product_state(plus_state(5))
    np.testing.assert_allclose(state.trace(), 1.0, rtol=1e-14)


def test_maximally_mixed_trace_and_purity():
    state = MPDO.maximally_mixed(4)
    np.testing.assert_allclose(state.trace(), 1.0, rtol=1e-14)
    np.testing.assert_allclose(state.purity(), 2.0**-4, rtol=1e-13)


def test_pure_state_purity_is_one():
    state = MPDO.from_product_state(plus_state(4))
    np.testing.assert_allclose(state.purity(), 1.0, rtol=1e-13)


def test_loschmidt_echo_self_overlap():
    psi0 = plus_state(3)
    state = MPDO.from_product_state(psi0)
    np.testing.assert_allclose(state.loschmidt_echo(psi0), 1.0, rtol=1e-14)


def test_loschmidt_echo_orthogonal_states():
    up = ProductState(kets=(np.array([1.0, 0.0]),) * 2)
    state = MPDO.from_product_state(all_down_state(2))
    np.testing.assert_allclose(state.loschmidt_echo(up), 0.0, atol=1e-15)


def test_loschmidt_echo_mixed_state():
    # <psi0| I/2^n |psi0> = 2^-n for any product psi0
    state = MPDO.maximally_mixed(3)
    np.testing.assert_allclose(state.loschmidt_echo(plus_state(3)), 2.0**-3, rtol=1e-14)


def test_loschmidt_echo_size_mismatch():
    state = MPDO.from_product_state(plus_state(3))
    with pytest.raises(ValueError, match="sites"):
        state.loschmidt_echo(plus_state(2))


def test_local_expectation_x_on_plus_state():
    state = MPDO.from_product_state(plus_state(3))
    np.testing.assert_allclose(
        complex(state.local_expectation({1: PAULI_X})), 1.0, rtol=1e-14
    )


def test_local_expectation_zz_on_down_state():
    state = MPDO.from_product_state(all_down_state(4))
    val = state.local_expectation({1: PAULI_Z, 2: PAULI_Z})
    np.testing.assert_allclose(complex(val), 1.0, rtol=1e-14)


def test_local_expectation_z_on_plus_state_vanishes():
    state = MPDO.from_product_state(plus_state(2))
    np.testing.assert_allclose(complex(state.local_expectation({0: PAULI_Z})), 0.0, atol=1e-15)


def test_local_expectation_validates_site_and_shape():
    state = MPDO.from_product_state(plus_state(2))
    with pytest.raises(ValueError, match="out of range"):
        state.local_expectation({5: PAULI_Z})
    with pytest.raises(ValueError, match="2 x 2"):
        state.local_expectation({0: np.eye(3)})


def test_two_site_rdm_of_product_state():
    state = MPDO.from_product_state(all_down_state(3))
    rdm = state.two_site_rdm(1)
    expected = np.zeros((4, 4))
    expected[3, 3] = 1.0  # |down down><down down|
    np.testing.assert_allclose(rdm, expected, atol=1e-14)


def test_two_site_rdm_bond_range():
    state = MPDO.from_product_state(plus_state(3))
    with pytest.raises(ValueError, match="out of range"):
        state.two_site_rdm(2)


def test_to_dense_matrix_product_state():
    psi0 = plus_state(3)
    state = MPDO.from_product_state(psi0)
    psi = np.ones(8, dtype=complex) / np.sqrt(8.0)
    np.testing.assert_allclose(state.to_dense_matrix(), np.outer(psi, psi.conj()), atol=1e-14)


def test_to_dense_matrix_size_guard():
    state = MPDO.maximally_mixed(9)
    with pytest.raises(ValueError, match="n <= 8"):
        state.to_dense_matrix()


# ---- gate application vs dense evolution ----


def run_dense(n, params, noise, t):
    psi = np.ones(2**n, dtype=complex) / np.sqrt(2.0**n)
    rho0 = np.outer(psi, psi.conj())
    lv = dense_liouvillian(params, noise)
    vec = expm(lv * t) @ rho0.reshape(-1)
    return unvectorize(vec)


@pytest.mark.parametrize("gamma", [0.0, 0.1])
def test_step_matches_dense_evolution(gamma):
    n, dt, steps = 4, 0.01, 50
    params = HamiltonianParams(n=n)
    noise = NoiseParams(gamma=gamma)
    gates = trotter_sequence(params, noise, dt, order=2)
    state = MPDO.from_product_state(plus_state(n))
    for _ in range(steps):
        state.step(gates, LOOSE)
    rho = run_dense(n, params, noise, dt * steps)
    np.testing.assert_allclose(state.to_dense_matrix(), rho, atol=2e-5)


def test_step_preserves_trace_and_hermiticity():
    n = 4
    params = HamiltonianParams(n=n)
    noise = NoiseParams(gamma=0.05)
    gates = trotter_sequence(params, noise, 0.02, order=2)
    state = MPDO.from_product_state(plus_state(n))
    for _ in range(25):
        state.step(gates, LOOSE)
    np.testing.assert_allclose(state.trace(), 1.0, rtol=1e-12)
    rho = state.to_dense_matrix()
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)


def test_apply_gate_bond_range():
    state = MPDO.from_product_state(plus_state(3))
    gates = trotter_sequence(HamiltonianParams(n=8), NoiseParams(gamma=0.0), 0.01)
    bad = [g for g in gates if g.bond_index >= 3]
    with pytest.raises(ValueError, match="out of range"):
        state.apply_gate(bad[0], LOOSE)


def test_step_counts_and_pre_trace():
    params = HamiltonianParams(n=3)
    gates = trotter_sequence(params, NoiseParams(gamma=0.0), 0.01)
    state = MPDO.from_product_state(plus_state(3))
    state.step(gates, LOOSE)
    assert state.steps_taken == 1
    # unitary gates on an untruncated chain keep the trace exactly
    np.testing.assert_allclose(state.last_pre_trace, 1.0, rtol=1e-12)


def test_step_raises_on_destroyed_trace():
    state = MPDO.from_product_state(plus_state(2))
    state.tensors[0] = state.tensors[0] * 0.0
    gates = trotter_sequence(HamiltonianParams(n=2), NoiseParams(gamma=0.0), 0.01)
    with pytest.raises(FloatingPointError, match="trace"):
        state.step(gates, LOOSE)


def test_truncation_counters_fire():
    # chi_max=2 forces hard truncation during entangling evolution
    tight = TruncationPolicy(schmidt_cutoff=1e-12, chi_max=2)
    params = HamiltonianParams(n=4)
    gates = trotter_sequence(params, NoiseParams(gamma=0.0), 0.05, order=2)
    state = MPDO.from_product_state(plus_state(4))
    for _ in range(20):
        state.step(gates, tight)
    assert state.chimax_hits > 0
    assert state.cumulative_discarded > 0.0
    assert state.max_bond_dim() <= 2


def test_cutoff_counter_fires_without_chi_pressure():
    # generous chi_max, aggressive cutoff: only the cutoff branch triggers
    policy = TruncationPolicy(schmidt_cutoff=1e-2, chi_max=512)
    params = HamiltonianParams(n=4)
    gates = trotter_sequence(params, NoiseParams(gamma=0.0), 0.05, order=2)
    state = MPDO.from_product_state(plus_state(4))
    for _ in range(20):
        state.step(gates, policy)
    assert state.cutoff_hits > 0
    assert state.chimax_hits == 0


# ---- canonicalization ----


def test_canonicalize_preserves_observables():
    params = HamiltonianParams(n=5)
    gates = trotter_sequence(params, NoiseParams(gamma=0.02), 0.02, order=2)
    state = MPDO.from_product_state(plus_state(5))
    for _ in range(30):
        state.step(gates, LOOSE)
    psi0 = plus_state(5)
    before = (
        state.trace(),
        state.loschmidt_echo(psi0),
        complex(state.local_expectation({1: PAULI_Z, 2: PAULI_Z})),
        state.purity(),
    )
    state.canonicalize()
    after = (
        state.trace(),
        state.loschmidt_echo(psi0),
        complex(state.local_expectation({1: PAULI_Z, 2: PAULI_Z})),
        state.purity(),
    )
    np.testing.assert_allclose(np.asarray(after, dtype=complex), np.asarray(before, dtype=complex), rtol=1e-10)


def test_canonicalize_right_isometries():
    params = HamiltonianParams(n=4)
    gates = trotter_sequence(params, NoiseParams(gamma=0.0), 0.02, order=2)
    state = MPDO.from_product_state(plus_state(4))
    for _ in range(10):
        state.step(gates, LOOSE)
    state.canonicalize()
    for t in state.tensors[1:]:
        mat = t.reshape(t.shape[0], -1)
        np.testing.assert_allclose(mat @ mat.conj().T, np.eye(t.shape[0]), atol=1e-12)


# ---- physics sanity under depolarization ----


def test_purity_decays_toward_mixed_state():
    n = 3
    params = HamiltonianParams(n=n)
    gates = trotter_sequence(params, NoiseParams(gamma=0.2), 0.02, order=2)
    state = MPDO.from_product_state(plus_state(n))
    purities = [state.purity()]
    for _ in range(100):
        state.step(gates, LOOSE)
        purities.append(state.purity())
    diffs = np.diff(purities)
    assert np.all(diffs < 1e-12)
    assert purities[-1] < 0.3  # well on the way to 2^-3


def test_strong_noise_drives_echo_to_mixed_value():
    n = 4
    params = HamiltonianParams(n=n)
    gates = trotter_sequence(params, NoiseParams(gamma=0.5), 0.02, order=2)
    state = MPDO.from_product_state(plus_state(n))
    for _ in range(600):
        state.step(gates, LOOSE)
    np.testing.assert_allclose(state.loschmidt_echo(plus_state(n)), 2.0**-n, rtol=1e-3)


def test_czz_starts_at_zero_for_plus_state():
    state = MPDO.from_product_state(plus_state(8))
    a, b = middle_bond(8), middle_bond(8) + 1
    czz = complex(state.local_expectation({a: PAULI_Z, b: PAULI_Z}))
    np.testing.assert_allclose(czz, 0.0, atol=1e-14)


# ---- checkpointing ----


def test_checkpoint_roundtrip(tmp_path):
    params = HamiltonianParams(n=4)
    gates = trotter_sequence(params, NoiseParams(gamma=0.03), 0.02, order=2)
    state = MPDO.from_product_state(plus_state(4))
    policy = TruncationPolicy(schmidt_cutoff=1e-8, chi_max=16)
    for _ in range(40):
        state.step(gates, policy)

    path = str(tmp_path / "state.npz")
    save_checkpoint(state, path, t=0.8, metadata={"gamma": 0.03})
    loaded, meta = load_checkpoint(path)

    assert meta["t"] == 0.8
    assert meta["n"] == 4
    assert meta["extra"] == {"gamma": 0.03}
    assert loaded.steps_taken == state.steps_taken
    assert loaded.cutoff_hits == state.cutoff_hits
    assert loaded.chimax_hits == state.chimax_hits
    assert loaded.cumulative_discarded == state.cumulative_discarded
    assert loaded.last_pre_trace == state.last_pre_trace
    for a, b in zip(loaded.tensors, state.tensors):
        np.testing.assert_array_equal(a, b)


def test_checkpoint_resume_matches_uninterrupted_run(tmp_path):
    params = HamiltonianParams(n=3)
    gates = trotter_sequence(params, NoiseParams(gamma=0.02), 0.02, order=2)
    policy = TruncationPolicy(schmidt_cutoff=1e-10, chi_max=32)

    straight = MPDO.from_product_state(plus_state(3))
    for _ in range(30):
        straight.step(gates, policy)

    state = MPDO.from_product_state(plus_state(3))
    for _ in range(15):
        state.step(gates, policy)
    path = str(tmp_path / "mid.npz")
    save_checkpoint(state, path, t=0.3)
    resumed, _ = load_checkpoint(path)
    for _ in range(15):
        resumed.step(gates, policy)

    np.testing.assert_allclose(
        resumed.to_dense_matrix(), straight.to_dense_matrix(), atol=1e-13
    )


def test_checkpoint_version_guard(tmp_path):
    state = MPDO.from_product_state(plus_state(2))
    path = str(tmp_path / "state.npz")
    save_checkpoint(state, path, t=0.0)
    with np.load(path) as data:
        meta = dict(np.load(path))
        import json

        parsed = json.loads(data["meta"].tobytes().decode("utf-8"))
    parsed["version"] = 999
    bad = np.frombuffer(json.dumps(parsed).encode("utf-8"), dtype=np.uint8)
    np.savez(path, meta=bad, **{k: v for k, v in meta.items() if k != "meta"})
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(path)
