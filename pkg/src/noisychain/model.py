"""Spin-chain model and its vectorized Lindblad generators.

The Hamiltonian is a transverse-field Ising chain with an extra XX
coupling and open boundaries,

    H = -1/2 [ sum_i (J_z sz_i sz_{i+1} + J_x sx_i sx_{i+1}) + sum_i h_x sx_i ],

with uniform single-site depolarizing noise: jump operators sx, sy, sz
on every site, all at rate gamma. Couplings are quoted in units of J
(so j_z defaults to 1.0) and times in units of 1/J.

Vectorization convention, used everywhere in the package: density
matrices are flattened row-major, so the pair index of a single site is
p = sigma * 2 + sigma' with sigma the row (ket) index. Under this
convention vec(A rho B) = (A kron B^T) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import expm, kron

IDENT = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
for _m in (IDENT, PAULI_X, PAULI_Y, PAULI_Z):
    _m.flags.writeable = False

#: Jump operators of the depolarizing bath, one set per site.
JUMP_OPERATORS = (PAULI_X, PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class HamiltonianParams:
    """Chain parameters. ``n`` is the number of sites.

    n = 1 is allowed so the single-site dissipative problem (used for
    noise calibration) can be expressed; bond-level operations require
    n >= 2 and say so.
    """

    n: int
    j_z: float = 1.0
    j_x: float = 0.1
    h_x: float = 0.1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        for name in ("j_z", "j_x", "h_x"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")

    @property
    def n_bonds(self) -> int:
        return self.n - 1


@dataclass(frozen=True)
class NoiseParams:
    """Uniform depolarizing rate gamma >= 0 (units of J)."""

    gamma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")


@dataclass(frozen=True)
class BondGate:
    """One two-site superoperator gate of a Trotter sweep.

    ``superop`` is 16 x 16 and acts on the row-major vectorization of a
    two-site density matrix (row index sigma_i sigma_j, column index
    sigma_i' sigma_j'). ``sub_step`` is the evolution time this gate
    realizes, so superop = expm(sub_step * L_bond).
    """

    bond_index: int
    sub_step: float
    superop: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.superop, dtype=complex)
        if sup.shape != (16, 16):
            raise ValueError(f"bond superop must be 16 x 16, got {sup.shape}")
        sup.flags.writeable = False
        object.__setattr__(self, "superop", sup)


def middle_bond(n: int) -> int:
    """Index of the central bond, sites (n//2 - 1, n//2); the C_zz probe lives here."""
    if n < 2:
        raise ValueError(f"a chain of {n} site(s) has no bonds")
    return n // 2 - 1


def bond_field_weights(bond: int, n: int) -> tuple[float, float]:
    """Weights (w_left, w_right) splitting single-site terms across bonds.

    Interior sites appear in two bonds and get 1/2 from each; the chain
    ends appear in one bond only and get weight 1 there. The same split
    is used for the transverse field and for the per-site dissipators,
    so summing all bond generators reproduces the full chain generator
    exactly.
    """
    if n < 2:
        raise ValueError(f"a chain of {n} site(s) has no bonds")
    if not 0 <= bond <= n - 2:
        raise ValueError(f"bond {bond} out of range for {n} sites")
    w_left = 1.0 if bond == 0 else 0.5
    w_right = 1.0 if bond == n - 2 else 0.5
    return w_left, w_right


def two_site_hamiltonian(params: HamiltonianParams, bond: int) -> np.ndarray:
    """4 x 4 Hamiltonian of one bond, field terms weighted per bond_field_weights."""
    w_l, w_r = bond_field_weights(bond, params.n)
    h = params.j_z * kron(PAULI_Z, PAULI_Z) + params.j_x * kron(PAULI_X, PAULI_X)
    h = h + params.h_x * (w_l * kron(PAULI_X, IDENT) + w_r * kron(IDENT, PAULI_X))
    return -0.5 * h


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major flattening of a density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1)


def unvectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a flattened square matrix")
    return v.reshape(d, d)


def lindblad_superop(h: np.ndarray, jumps: list[tuple[float, np.ndarray]]) -> np.ndarray:
    """Vectorized Lindblad generator for Hamiltonian ``h`` and weighted jumps.

    Row-major convention throughout:

        L = -i (h kron 1 - 1 kron h^T)
            + sum_k rate_k [ L_k kron L_k* - 1/2 (L_k^+ L_k) kron 1
                                          - 1/2 1 kron (L_k^+ L_k)^T ].

    Works at any Hilbert-space dimension; the bond generator uses it at
    d = 4 and the dense reference at d = 2^n.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if h.shape != (d, d):
        raise ValueError(f"hamiltonian must be square, got shape {h.shape}")
    eye = np.eye(d, dtype=complex)
    out = -1j * (kron(h, eye) - kron(eye, h.T))
    for rate, op in jumps:
        op = np.asarray(op, dtype=complex)
        if op.shape != (d, d):
            raise ValueError(f"jump operator shape {op.shape} does not match dim {d}")
        opdop = op.conj().T @ op
        out += rate * (
            kron(op, op.conj()) - 0.5 * kron(opdop, eye) - 0.5 * kron(eye, opdop.T)
        )
    return out


def bond_liouvillian(params: HamiltonianParams, noise: NoiseParams, bond: int) -> np.ndarray:
    """16 x 16 vectorized generator of one bond.

    Contains the bond Hamiltonian's commutator plus the two sites'
    depolarizing dissipators, each weighted like the field terms so the
    sum over bonds gives each site's dissipator exactly once.
    """
    w_l, w_r = bond_field_weights(bond, params.n)
    h = two_site_hamiltonian(params, bond)
    jumps: list[tuple[float, np.ndarray]] = []
    if noise.gamma > 0.0:
        for sigma in JUMP_OPERATORS:
            jumps.append((noise.gamma * w_l, kron(sigma, IDENT)))
            jumps.append((noise.gamma * w_r, kron(IDENT, sigma)))
    return lindblad_superop(h, jumps)


def superop_pair_tensor(superop: np.ndarray) -> np.ndarray:
    """Reshape a 16 x 16 two-site superoperator into pair-index layout.

    Input rows/columns are indexed (sigma_i, sigma_j, sigma_i', sigma_j');
    output has shape (4, 4, 4, 4) indexed (p_i_out, p_j_out, p_i_in,
    p_j_in) with p = sigma * 2 + sigma'. This is the form contracted
    against the two physical-pair legs of a density-operator chain.
    """
    superop = np.asarray(superop)
    if superop.shape != (16, 16):
        raise ValueError(f"expected a 16 x 16 superoperator, got shape {superop.shape}")
    s8 = superop.reshape((2,) * 8)
    # (si sj si' sj' | ti tj ti' tj') -> (si si' sj sj' | ti ti' tj tj')
    return s8.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(4, 4, 4, 4)


@lru_cache(maxsize=None)
def _cached_bond_superop(
    params: HamiltonianParams, noise: NoiseParams, weights: tuple[float, float], sub_step: float
) -> np.ndarray:
    # All bonds sharing (w_l, w_r) have identical generators, so a chain
    # needs at most three distinct exponentials per sub_step.
    w_l, w_r = weights
    if w_l == 1.0:
        bond = 0
    elif w_r == 1.0:
        bond = params.n - 2
    else:
        bond = 1
    gen = bond_liouvillian(params, noise, bond)
    sup = expm(sub_step * gen)
    sup.flags.writeable = False
    return sup


def trotter_sequence(
    params: HamiltonianParams, noise: NoiseParams, dt: float, order: int = 2
) -> list[BondGate]:
    """Bond-gate sequence advancing the chain state by one step dt.

    order 2 is the symmetric split: odd bonds at dt/2, even bonds at dt,
    odd bonds at dt/2 (bond parity by 0-based index). order 1 applies
    odd then even bonds, all at dt. The 16 x 16 exponentials are shared
    between gates with the same boundary weights and sub-step, so a
    sequence costs at most a handful of expm calls however long the
    chain is.
    """
    if params.n < 2:
        raise ValueError("trotter_sequence needs a chain with at least one bond")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be finite and > 0, got {dt}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")

    odd = [b for b in range(params.n_bonds) if b % 2 == 1]
    even = [b for b in range(params.n_bonds) if b % 2 == 0]

    def gates(bonds: list[int], sub_step: float) -> list[BondGate]:
        out = []
        for b in bonds:
            weights = bond_field_weights(b, params.n)
            sup = _cached_bond_superop(params, noise, weights, sub_step)
            out.append(BondGate(bond_index=b, sub_step=sub_step, superop=sup))
        return out

    if order == 1:
        return gates(odd, dt) + gates(even, dt)
    return gates(odd, dt / 2.0) + gates(even, dt) + gates(odd, dt / 2.0)


def lindblad_to_depolarizing_p(gamma: float, delta_t: float) -> float:
    """Depolarizing probability equivalent to rate gamma over a window delta_t.

    Uniform x/y/z dissipation at rate gamma contracts every Bloch
    component by exp(-4 gamma t), which is exactly the single-qubit
    channel E(rho) = (1 - p) rho + p I/2 with p = 1 - exp(-4 gamma dt).
    """
    if gamma < 0.0 or delta_t < 0.0:
        raise ValueError(f"gamma and delta_t must be >= 0, got {gamma}, {delta_t}")
    return -math.expm1(-4.0 * gamma * delta_t)
