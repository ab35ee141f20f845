"""Pure-state chain evolution for noiseless reference curves.

The density chain in :mod:`noisychain.mpdo` represents the echo as
<psi0| rho |psi0>, which is the *squared* overlap; near a return-rate
peak at large n that number sits below double-precision resolution
(e.g. n = 20, lambda = 1.8 gives 2e-16) and the contraction result is
pure rounding noise. Zero-noise evolution stays pure, so the ideal
curve is computed here on a state-vector chain instead: the overlap
*amplitude* <psi0|psi(t)> ~ exp(-n lambda / 2) stays far from the
floor, and lambda is read off its logarithm.

Gates are the unitary bond exponentials of the same bond-split
Hamiltonian (same field weights, same odd/even sweep order) used by
the density chain, so the two paths share one Trotter scheme and their
truncation policies mean the same thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import TruncationPolicy, expm, svd_truncate
from .model import HamiltonianParams, bond_field_weights, two_site_hamiltonian
from .mpdo import RECANONICALIZE_EVERY, ProductState

AMPLITUDE_FLOOR = 1e-150  # squares to the density-chain echo floor


@dataclass(frozen=True)
class PureBondGate:
    """Unitary two-site gate acting on one bond of the state chain."""

    bond_index: int
    sub_step: float
    unitary: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        if u.shape != (4, 4):
            raise ValueError(f"bond unitary must be 4 x 4, got shape {u.shape}")
        u.flags.writeable = False
        object.__setattr__(self, "unitary", u)


@lru_cache(maxsize=None)
def _cached_bond_unitary(
    params: HamiltonianParams, weights: tuple[float, float], sub_step: float
) -> np.ndarray:
    w_l, w_r = weights
    if w_l == 1.0:
        bond = 0
    elif w_r == 1.0:
        bond = params.n - 2
    else:
        bond = 1
    u = expm(-1j * sub_step * two_site_hamiltonian(params, bond))
    u.flags.writeable = False
    return u


def unitary_trotter_sequence(
    params: HamiltonianParams, dt: float, order: int = 2
) -> list[PureBondGate]:
    """Unitary bond-gate sequence for one step dt, same split as the
    density-chain sequence: order 2 is odd at dt/2, even at dt, odd at
    dt/2; order 1 is odd then even at dt."""
    if params.n < 2:
        raise ValueError("unitary_trotter_sequence needs a chain with at least one bond")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be finite and > 0, got {dt}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")

    odd = [b for b in range(params.n_bonds) if b % 2 == 1]
    even = [b for b in range(params.n_bonds) if b % 2 == 0]

    def gates(bonds: list[int], sub_step: float) -> list[PureBondGate]:
        return [
            PureBondGate(
                bond_index=b,
                sub_step=sub_step,
                unitary=_cached_bond_unitary(params, bond_field_weights(b, params.n), sub_step),
            )
            for b in bonds
        ]

    if order == 1:
        return gates(odd, dt) + gates(even, dt)
    return gates(odd, dt / 2.0) + gates(even, dt) + gates(odd, dt / 2.0)


def return_rate_from_amplitude(amplitude: complex, n: int) -> float:
    """-2 ln|<psi0|psi>| / n, the return rate without squaring first."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    mag = abs(amplitude)
    if mag == 0.0:
        raise ValueError("overlap amplitude is exactly zero")
    clamped = min(max(mag, AMPLITUDE_FLOOR), 1.0)
    return -2.0 * float(np.log(clamped)) / n


class MPS:
    """Chain of rank-3 site tensors (chi_l, 2, chi_r) holding a state vector.

    Mutable, with the same truncation bookkeeping as the density chain;
    ``last_pre_norm`` is the pre-renormalization norm of each step, whose
    drift from 1 plays the role the trace drift plays for mixed states.
    """

    def __init__(self, tensors: list[np.ndarray]):
        if not tensors:
            raise ValueError("an MPS needs at least one site tensor")
        checked = []
        for i, t in enumerate(tensors):
            t = np.asarray(t, dtype=complex)
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError(
                    f"site tensor {i} must have shape (chi_l, 2, chi_r), got {t.shape}"
                )
            checked.append(t)
        if checked[0].shape[0] != 1 or checked[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for i in range(len(checked) - 1):
            if checked[i].shape[2] != checked[i + 1].shape[0]:
                raise ValueError(
                    f"bond mismatch between sites {i} and {i + 1}: "
                    f"{checked[i].shape} vs {checked[i + 1].shape}"
                )
        self.tensors = checked
        self.cumulative_discarded = 0.0
        self.cutoff_hits = 0
        self.chimax_hits = 0
        self.steps_taken = 0
        self.last_pre_norm = 1.0

    @classmethod
    def from_product_state(cls, state: ProductState) -> "MPS":
        return cls([ket.reshape(1, 2, 1).astype(complex) for ket in state.kets])

    @property
    def n(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond_dim(self) -> int:
        dims = self.bond_dims()
        return max(dims) if dims else 1

    # ---- contractions ----

    def amplitude(self, psi0: ProductState) -> complex:
        """Overlap <psi0|psi> with a product state."""
        if psi0.n != self.n:
            raise ValueError(f"state has {self.n} sites but psi0 has {psi0.n}")
        env = np.ones((1,), dtype=complex)
        for ket, m in zip(psi0.kets, self.tensors):
            env = env @ np.tensordot(ket.conj(), m, axes=(0, 1))
        return complex(env[0])

    def norm(self) -> float:
        """||psi||, contracted exactly."""
        env = np.ones((1, 1), dtype=complex)
        for m in self.tensors:
            upper = np.tensordot(env, m.conj(), axes=(0, 0))  # (b, s, a')
            env = np.tensordot(upper, m, axes=([0, 1], [0, 1]))  # (a', b')
        return float(np.sqrt(np.real(env[0, 0])))

    def local_expectation(self, site_ops) -> complex:
        """<psi| prod_i O_i |psi> for single-site operators on distinct sites."""
        ops = {}
        for site, op in site_ops.items():
            if not 0 <= site < self.n:
                raise ValueError(f"site {site} out of range for {self.n} sites")
            op = np.asarray(op, dtype=complex)
            if op.shape != (2, 2):
                raise ValueError(f"operator on site {site} must be 2 x 2, got {op.shape}")
            ops[site] = op
        env = np.ones((1, 1), dtype=complex)
        for i, m in enumerate(self.tensors):
            if i in ops:
                acted = np.tensordot(ops[i], m, axes=(1, 1)).transpose(1, 0, 2)
            else:
                acted = m
            upper = np.tensordot(env, m.conj(), axes=(0, 0))  # (b, s, a')
            env = np.tensordot(upper, acted, axes=([0, 1], [0, 1]))  # (a', b')
        return complex(env[0, 0])

    def to_vector(self) -> np.ndarray:
        """Contract into a dense 2^n state vector (n <= 16)."""
        if self.n > 16:
            raise ValueError(f"dense reconstruction limited to n <= 16, got {self.n}")
        acc = self.tensors[0]
        for i in range(1, self.n):
            acc = np.tensordot(acc, self.tensors[i], axes=(acc.ndim - 1, 0))
        return acc.reshape(-1)

    # ---- evolution ----

    def apply_gate(self, gate: PureBondGate, policy: TruncationPolicy) -> None:
        b = gate.bond_index
        if not 0 <= b <= self.n - 2:
            raise ValueError(f"gate bond {b} out of range for {self.n} sites")
        left, right = self.tensors[b], self.tensors[b + 1]
        chi_l, chi_r = left.shape[0], right.shape[2]

        theta = np.tensordot(left, right, axes=(2, 0))  # (chi_l, s, t, chi_r)
        u = gate.unitary.reshape(2, 2, 2, 2)
        theta = np.tensordot(u, theta, axes=([2, 3], [1, 2]))  # (s', t', chi_l, chi_r)
        theta = theta.transpose(2, 0, 1, 3).reshape(chi_l * 2, 2 * chi_r)

        u_m, s, v, discarded = svd_truncate(theta, policy)
        k = s.size
        full_rank = min(theta.shape)
        if k == policy.chi_max and k < full_rank:
            self.chimax_hits += 1
        elif k < full_rank:
            self.cutoff_hits += 1
        self.cumulative_discarded += discarded

        self.tensors[b] = u_m.reshape(chi_l, 2, k)
        self.tensors[b + 1] = (s[:, None] * v).reshape(k, 2, chi_r)

    def step(self, gates: list[PureBondGate], policy: TruncationPolicy) -> None:
        """One full Trotter step, then norm renormalization."""
        if self.steps_taken > 0 and self.steps_taken % RECANONICALIZE_EVERY == 0:
            self.canonicalize()
        for gate in gates:
            self.apply_gate(gate, policy)
        nrm = self.norm()
        if nrm <= 0.0 or not np.isfinite(nrm):
            raise FloatingPointError(f"state norm became {nrm} after step {self.steps_taken}")
        self.last_pre_norm = nrm
        self.tensors[0] = self.tensors[0] / nrm
        self.steps_taken += 1

    def canonicalize(self) -> None:
        """Right-to-left sweep to right-canonical form, no truncation."""
        for i in range(self.n - 1, 0, -1):
            t = self.tensors[i]
            chi_l = t.shape[0]
            mat = t.reshape(chi_l, -1)
            q1, r1 = np.linalg.qr(mat.T)
            k = q1.shape[1]
            self.tensors[i] = q1.T.reshape(k, 2, t.shape[2])
            self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], r1.T, axes=(2, 0))
