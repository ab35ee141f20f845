"""Dense reference evolution for small chains.

Everything in here scales exponentially and exists to validate the
tensor-network and circuit paths on chains small enough to brute-force:
dense Hamiltonians up to n = 12, dense Liouvillians up to n = 6, and
Lindblad time evolution up to n = 8 (matrix-free, the 4^n x 4^n
generator is never materialized above n = 4).

Qubit ordering: site 0 is the most significant bit of the computational
basis index, matching the row-major reshape of an n-site tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .linalg import expm, kron
from .model import (
    JUMP_OPERATORS,
    HamiltonianParams,
    NoiseParams,
    PAULI_X,
    PAULI_Z,
    lindblad_superop,
    middle_bond,
    unvectorize,
    vectorize,
)
from .mpdo import ProductState, return_rate

MAX_DENSE_HAMILTONIAN_SITES = 12
MAX_DENSE_LIOUVILLIAN_SITES = 6
MAX_LINDBLAD_SITES = 8


@dataclass
class DenseState:
    """A pure state vector (2^n,) or a density matrix (2^n, 2^n)."""

    n: int
    data: np.ndarray
    pure: bool

    def density(self) -> np.ndarray:
        """The state as a density matrix regardless of representation."""
        if self.pure:
            return np.outer(self.data, self.data.conj())
        return self.data


class Observables(NamedTuple):
    loschmidt: float
    return_rate: float
    czz: float


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Dense embedding of a single-site operator into the n-site space."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} sites")
    left = 2**site
    right = 2 ** (n - site - 1)
    return kron(np.eye(left, dtype=complex), kron(op, np.eye(right, dtype=complex)))


def product_state_vector(state: ProductState) -> np.ndarray:
    """2^n state vector of a product of single-site kets."""
    psi = np.array([1.0 + 0.0j])
    for ket in state.kets:
        psi = np.kron(psi, ket)
    return psi


def dense_hamiltonian(params: HamiltonianParams) -> np.ndarray:
    """Full 2^n x 2^n chain Hamiltonian."""
    n = params.n
    if n > MAX_DENSE_HAMILTONIAN_SITES:
        raise ValueError(
            f"dense Hamiltonian limited to n <= {MAX_DENSE_HAMILTONIAN_SITES}, got {n}"
        )
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n - 1):
        zz = site_operator(PAULI_Z, i, n) @ site_operator(PAULI_Z, i + 1, n)
        xx = site_operator(PAULI_X, i, n) @ site_operator(PAULI_X, i + 1, n)
        h += params.j_z * zz + params.j_x * xx
    for i in range(n):
        h += params.h_x * site_operator(PAULI_X, i, n)
    return -0.5 * h


def dense_liouvillian(params: HamiltonianParams, noise: NoiseParams) -> np.ndarray:
    """Full 4^n x 4^n vectorized Lindblad generator, built site by site.

    This is the direct global construction; the bond-wise construction in
    :mod:`noisychain.model` must sum to it exactly, which the test suite
    checks entrywise.
    """
    n = params.n
    if n > MAX_DENSE_LIOUVILLIAN_SITES:
        raise ValueError(
            f"dense Liouvillian limited to n <= {MAX_DENSE_LIOUVILLIAN_SITES}, got {n}"
        )
    h = dense_hamiltonian(params)
    jumps = []
    if noise.gamma > 0.0:
        for i in range(n):
            for sigma in JUMP_OPERATORS:
                jumps.append((noise.gamma, site_operator(sigma, i, n)))
    return lindblad_superop(h, jumps)


def embed_superop_dense(sup: np.ndarray, n: int, first_site: int) -> np.ndarray:
    """Embed a k-site superoperator into the global 4^n vectorized space.

    ``sup`` acts on the row-major vectorization of a density matrix of
    k = log4(sup dim) contiguous sites starting at ``first_site``. Dense
    and exponential in n; for tests and assembly checks only.
    """
    sup = np.asarray(sup)
    dim_k = math.isqrt(sup.shape[0])
    k = round(math.log2(dim_k))
    if sup.shape != (dim_k**2, dim_k**2) or 2**k != dim_k:
        raise ValueError(f"superoperator shape {sup.shape} is not 4^k x 4^k")
    if not 0 <= first_site <= n - k:
        raise ValueError(f"sites [{first_site}, {first_site + k}) out of range for n={n}")
    left = 2**first_site
    right = 2 ** (n - first_site - k)
    big = kron(np.eye(left**2, dtype=complex), kron(sup, np.eye(right**2, dtype=complex)))
    # kron layout ((rL cL)(rK cK)(rR cR)) -> global vec layout ((rL rK rR)(cL cK cR))
    big = big.reshape(left, left, dim_k, dim_k, right, right, left, left, dim_k, dim_k, right, right)
    big = big.transpose(0, 2, 4, 1, 3, 5, 6, 8, 10, 7, 9, 11)
    dim = 2**n
    return big.reshape(dim * dim, dim * dim)


@lru_cache(maxsize=8)
def _eigh_cached(params: HamiltonianParams):
    evals, evecs = np.linalg.eigh(dense_hamiltonian(params))
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return evals, evecs


def evolve_pure(psi0: np.ndarray, params: HamiltonianParams, t: float) -> DenseState:
    """Exact unitary evolution psi(t) = exp(-i H t) psi0 via eigendecomposition."""
    psi0 = np.asarray(psi0, dtype=complex)
    dim = 2**params.n
    if psi0.shape != (dim,):
        raise ValueError(f"psi0 must have shape ({dim},), got {psi0.shape}")
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"psi0 must be normalized, got |psi0| = {norm}")
    evals, evecs = _eigh_cached(params)
    phases = np.exp(-1j * evals * t)
    psi_t = evecs @ (phases * (evecs.conj().T @ psi0))
    return DenseState(n=params.n, data=psi_t, pure=True)


def _check_density(rho: np.ndarray, n: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    dim = 2**n
    if rho.shape != (dim, dim):
        raise ValueError(f"rho must have shape ({dim}, {dim}), got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValueError("rho is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValueError(f"rho must have unit trace, got {np.trace(rho)}")
    return rho


def _lindblad_rhs(rho: np.ndarray, h: np.ndarray, gamma: float, n: int) -> np.ndarray:
    """d rho / dt for uniform x/y/z depolarizing jumps at rate gamma.

    Uses the per-site identity sum_mu sigma rho sigma = 2 (1_site kron
    Tr_site rho) - rho, so the cost is one commutator plus n partial
    traces instead of 3n operator sandwiches.
    """
    out = -1j * (h @ rho - rho @ h)
    if gamma > 0.0:
        eye = np.eye(2, dtype=complex)
        for i in range(n):
            left = 2**i
            right = 2 ** (n - i - 1)
            rho6 = rho.reshape(left, 2, right, left, 2, right)
            reduced = np.einsum("larmas->lrms", rho6)
            lifted = np.einsum("ab,lrms->larmbs", eye, reduced)
            out += 2.0 * gamma * lifted.reshape(rho.shape)
        out -= 4.0 * gamma * n * rho
    return out


class DenseLindbladEvolver:
    """Stepwise dense Lindblad integrator, for recording time series.

    n <= 4 advances with cached exact propagators expm(duration * L);
    larger chains use classical fixed-step RK4 applied matrix-free with
    step <= max_step. RK4 preserves the trace identically (the trace
    functional annihilates the generator), so trace drift stays at
    rounding level for any step size; max_step controls state accuracy.
    """

    def __init__(
        self,
        rho0: np.ndarray,
        params: HamiltonianParams,
        noise: NoiseParams,
        max_step: float = 0.005,
    ):
        if params.n > MAX_LINDBLAD_SITES:
            raise ValueError(
                f"dense Lindblad evolution limited to n <= {MAX_LINDBLAD_SITES}, got {params.n}"
            )
        if not (max_step > 0.0):
            raise ValueError(f"max_step must be > 0, got {max_step}")
        self.params = params
        self.noise = noise
        self.max_step = float(max_step)
        self.t = 0.0
        self.rho = _check_density(rho0, params.n).copy()
        self._h = dense_hamiltonian(params)
        self._use_expm = params.n <= 4
        self._liouvillian = dense_liouvillian(params, noise) if self._use_expm else None
        self._propagators: dict[float, np.ndarray] = {}

    def advance(self, duration: float) -> None:
        if duration < 0.0:
            raise ValueError(f"duration must be >= 0, got {duration}")
        if duration == 0.0:
            return
        if self._use_expm:
            prop = self._propagators.get(duration)
            if prop is None:
                prop = expm(duration * self._liouvillian)
                self._propagators[duration] = prop
            self.rho = unvectorize(prop @ vectorize(self.rho))
        else:
            steps = max(1, math.ceil(duration / self.max_step - 1e-12))
            dt = duration / steps
            gamma, n, h = self.noise.gamma, self.params.n, self._h
            rho = self.rho
            for _ in range(steps):
                k1 = _lindblad_rhs(rho, h, gamma, n)
                k2 = _lindblad_rhs(rho + 0.5 * dt * k1, h, gamma, n)
                k3 = _lindblad_rhs(rho + 0.5 * dt * k2, h, gamma, n)
                k4 = _lindblad_rhs(rho + dt * k3, h, gamma, n)
                rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            self.rho = rho
        self.t += duration

    @property
    def state(self) -> DenseState:
        return DenseState(n=self.params.n, data=self.rho, pure=False)


def evolve_lindblad_dense(
    rho0: np.ndarray,
    params: HamiltonianParams,
    noise: NoiseParams,
    t: float,
    dt: float = 0.005,
) -> DenseState:
    """Dense Lindblad evolution of rho0 for time t.

    Exact (single expm) for n <= 4, fixed-step RK4 with step <= dt for
    5 <= n <= 8.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    ev = DenseLindbladEvolver(rho0, params, noise, max_step=dt)
    ev.advance(t)
    return ev.state


def observables_dense(state: DenseState, psi0: np.ndarray) -> Observables:
    """Loschmidt echo, return rate and middle-bond C_zz of a dense state.

    The echo is <psi0| rho |psi0> (squared overlap for pure states); the
    return rate is -ln of that over n; C_zz is <sz_a sz_b> on the two
    central sites, matching the tensor-network observable definitions.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    n = state.n
    a = middle_bond(n) if n >= 2 else None
    if state.pure:
        amp = np.vdot(psi0, state.data)
        loschmidt = float(np.abs(amp) ** 2)
        if a is None:
            czz = 0.0
        else:
            zz = site_operator(PAULI_Z, a, n) @ site_operator(PAULI_Z, a + 1, n)
            czz = float(np.real(np.vdot(state.data, zz @ state.data)))
    else:
        loschmidt = float(np.real(np.vdot(psi0, state.data @ psi0)))
        if a is None:
            czz = 0.0
        else:
            zz = site_operator(PAULI_Z, a, n) @ site_operator(PAULI_Z, a + 1, n)
            czz = float(np.real(np.trace(state.data @ zz)))
    return Observables(loschmidt=loschmidt, return_rate=return_rate(loschmidt, n), czz=czz)
