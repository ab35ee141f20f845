"""Matrix-product density operator simulator.

The density matrix of the chain is stored as a tensor train of rank-3
site tensors ``M_i`` with index order (left bond, physical pair, right
bond). The physical pair index flattens the local (sigma, sigma') pair
row-major, p = sigma * 2 + sigma', so the chain is exactly the
row-major vectorization of rho written as an MPS with local dimension 4.

Time evolution is plain TEBD on that vectorized state: two-site
superoperator gates (see :func:`noisychain.model.trotter_sequence`) are
contracted in and re-split with a truncated SVD. No canonical gauge is
maintained between gates; the truncation at each SVD is therefore only
locally informed, which the periodic re-canonicalization sweep (every
``RECANONICALIZE_EVERY`` steps) keeps close to optimal. The trace is
renormalized to one after every full step; its pre-normalization drift
is recorded as a diagnostic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .linalg import TruncationPolicy, svd_truncate
from .model import BondGate, superop_pair_tensor

#: Sweep cadence of the gauge-restoring canonicalization, in Trotter steps.
RECANONICALIZE_EVERY = 50

#: Loschmidt echoes are clamped to this floor before taking logs.
ECHO_FLOOR = 1e-300

_TRACE_WEIGHTS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)  # vec of the 2x2 identity
_TRACE_WEIGHTS.flags.writeable = False

_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ProductState:
    """Product of normalized single-site kets."""

    kets: tuple[np.ndarray, ...]

    def __post_init__(self):
        kets = []
        for i, ket in enumerate(self.kets):
            ket = np.asarray(ket, dtype=complex).reshape(-1)
            if ket.shape != (2,):
                raise ValueError(f"ket {i} must be a 2-vector, got shape {ket.shape}")
            norm = np.linalg.norm(ket)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"ket {i} is not normalized: |ket| = {norm}")
            ket.flags.writeable = False
            kets.append(ket)
        if not kets:
            raise ValueError("a product state needs at least one site")
        object.__setattr__(self, "kets", tuple(kets))

    @property
    def n(self) -> int:
        return len(self.kets)


def plus_state(n: int) -> ProductState:
    """|+>^n, the x-polarized product state used as the quench initial state."""
    ket = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return ProductState(kets=(ket,) * n)


def all_down_state(n: int) -> ProductState:
    """|down>^n in the sz basis (basis index 1)."""
    ket = np.array([0.0, 1.0], dtype=complex)
    return ProductState(kets=(ket,) * n)


def return_rate(loschmidt: float, n: int) -> float:
    """Finite-size return rate -ln(Lambda) / n.

    Lambda is clamped to [ECHO_FLOOR, 1] before the log to guard
    underflow at large n; a non-positive Lambda is a domain error.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if loschmidt <= 0.0:
        raise ValueError(f"Loschmidt echo must be positive, got {loschmidt}")
    clamped = min(max(loschmidt, ECHO_FLOOR), 1.0)
    return -float(np.log(clamped)) / n


class MPDO:
    """Chain of rank-3 site tensors holding a vectorized density matrix.

    Mutable: gate application, stepping and canonicalization update the
    instance in place. Truncation bookkeeping (cumulative discarded
    Schmidt weight, cutoff / chi_max hit counters) accumulates on the
    instance and travels with checkpoints.
    """

    def __init__(self, tensors: list[np.ndarray]):
        if not tensors:
            raise ValueError("an MPDO needs at least one site tensor")
        checked = []
        for i, t in enumerate(tensors):
            t = np.asarray(t, dtype=complex)
            if t.ndim != 3 or t.shape[1] != 4:
                raise ValueError(
                    f"site tensor {i} must have shape (chi_l, 4, chi_r), got {t.shape}"
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
        self.last_pre_trace = 1.0

    # ---- construction ----

    @classmethod
    def from_product_state(cls, state: ProductState) -> "MPDO":
        """Pure product density matrix |psi><psi| as a bond-dimension-1 chain."""
        tensors = []
        for ket in state.kets:
            pair = np.outer(ket, ket.conj()).reshape(4)  # p = sigma * 2 + sigma'
            tensors.append(pair.reshape(1, 4, 1).astype(complex))
        return cls(tensors)

    @classmethod
    def maximally_mixed(cls, n: int) -> "MPDO":
        """(1/2^n) identity, a bond-dimension-1 chain of vectorized I/2."""
        site = (0.5 * _TRACE_WEIGHTS).reshape(1, 4, 1).copy()
        return cls([site.copy() for _ in range(n)])

    # ---- structure ----

    @property
    def n(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        """Internal bond dimensions, length n - 1."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond_dim(self) -> int:
        dims = self.bond_dims()
        return max(dims) if dims else 1

    # ---- observables (exact contractions, gauge independent) ----

    def _weighted_transfer(self, site: int, weights: np.ndarray) -> np.ndarray:
        # sum_p w[p] M[:, p, :], a (chi_l, chi_r) matrix
        return np.tensordot(weights, self.tensors[site], axes=(0, 1))

    def trace(self) -> float:
        """Tr rho, contracting every pair index with the vectorized identity."""
        env = np.ones((1,), dtype=complex)
        for i in range(self.n):
            env = env @ self._weighted_transfer(i, _TRACE_WEIGHTS)
        value = env[0]
        return float(np.real(value))

    def loschmidt_echo(self, psi0: ProductState) -> float:
        """<psi0| rho |psi0> for a product state psi0."""
        if psi0.n != self.n:
            raise ValueError(f"state has {self.n} sites but psi0 has {psi0.n}")
        env = np.ones((1,), dtype=complex)
        for i, ket in enumerate(psi0.kets):
            w = np.outer(ket.conj(), ket).reshape(4)
            env = env @ self._weighted_transfer(i, w)
        return float(np.real(env[0]))

    def local_expectation(self, site_ops: Mapping[int, np.ndarray]) -> complex:
        """Tr(rho * prod_i O_i) for single-site operators O_i on distinct sites."""
        ops = {}
        for site, op in site_ops.items():
            if not 0 <= site < self.n:
                raise ValueError(f"site {site} out of range for {self.n} sites")
            op = np.asarray(op, dtype=complex)
            if op.shape != (2, 2):
                raise ValueError(f"operator on site {site} must be 2 x 2, got {op.shape}")
            ops[site] = op
        env = np.ones((1,), dtype=complex)
        for i in range(self.n):
            if i in ops:
                w = ops[i].T.reshape(4)  # w[(sigma, sigma')] = O[sigma', sigma]
            else:
                w = _TRACE_WEIGHTS
            env = env @ self._weighted_transfer(i, w)
        return complex(env[0])

    def purity(self) -> float:
        """Tr(rho^2), contracted exactly through transfer tensors."""
        env = np.ones((1, 1), dtype=complex)
        swap = np.zeros((4, 4), dtype=complex)
        for s in range(2):
            for sp in range(2):
                swap[s * 2 + sp, sp * 2 + s] = 1.0
        for i in range(self.n):
            m = self.tensors[i]
            # env'[b, d] = env[a, c] M[a, p, b] swap[p, q] M[c, q, d]
            upper = np.tensordot(env, m, axes=(0, 0))  # (c, p, b)
            upper = np.tensordot(upper, swap, axes=(1, 0))  # (c, b, q)
            env = np.tensordot(upper, m, axes=([0, 2], [0, 1]))  # (b, d)
        return float(np.real(env[0, 0]))

    def two_site_rdm(self, bond: int) -> np.ndarray:
        """Reduced density matrix of sites (bond, bond + 1) as a 4 x 4 matrix."""
        if not 0 <= bond <= self.n - 2:
            raise ValueError(f"bond {bond} out of range for {self.n} sites")
        left = np.ones((1,), dtype=complex)
        for i in range(bond):
            left = left @ self._weighted_transfer(i, _TRACE_WEIGHTS)
        right = np.ones((1,), dtype=complex)
        for i in range(self.n - 1, bond + 1, -1):
            right = self._weighted_transfer(i, _TRACE_WEIGHTS) @ right
        a = np.tensordot(left, self.tensors[bond], axes=(0, 0))  # (p, chi)
        b = np.tensordot(self.tensors[bond + 1], right, axes=(2, 0))  # (chi, q)
        rdm_pairs = a @ b  # (p, q)
        rdm = rdm_pairs.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
        return rdm

    def to_dense_matrix(self) -> np.ndarray:
        """Contract the chain into a dense 2^n x 2^n density matrix (n <= 8)."""
        if self.n > 8:
            raise ValueError(f"dense reconstruction limited to n <= 8, got {self.n}")
        acc = self.tensors[0]  # (1, p..., chi)
        for i in range(1, self.n):
            acc = np.tensordot(acc, self.tensors[i], axes=(acc.ndim - 1, 0))
        acc = acc.reshape(acc.shape[1:-1])  # (4,) * n
        acc = acc.reshape((2,) * (2 * self.n))  # (s1, s1', s2, s2', ...)
        rows = tuple(range(0, 2 * self.n, 2))
        cols = tuple(range(1, 2 * self.n, 2))
        dim = 2**self.n
        return acc.transpose(rows + cols).reshape(dim, dim)

    # ---- evolution ----

    def apply_gate(self, gate: BondGate, policy: TruncationPolicy) -> None:
        """Contract a two-site superoperator into the chain and re-split.

        The combined two-site tensor is reshaped to a matrix with the
        left (bond, pair) legs as rows and split with a truncated SVD;
        singular values are absorbed into the right tensor. Discarded
        weight and truncation-trigger counters accumulate on the state.
        """
        b = gate.bond_index
        if not 0 <= b <= self.n - 2:
            raise ValueError(f"gate bond {b} out of range for {self.n} sites")
        left, right = self.tensors[b], self.tensors[b + 1]
        chi_l, chi_r = left.shape[0], right.shape[2]

        theta = np.tensordot(left, right, axes=(2, 0))  # (chi_l, p, q, chi_r)
        pair = superop_pair_tensor(gate.superop)  # (P, Q, p, q)
        theta = np.tensordot(pair, theta, axes=([2, 3], [1, 2]))  # (P, Q, chi_l, chi_r)
        theta = theta.transpose(2, 0, 1, 3).reshape(chi_l * 4, 4 * chi_r)

        u, s, v, discarded = svd_truncate(theta, policy)
        k = s.size
        full_rank = min(theta.shape)
        if k == policy.chi_max and k < full_rank:
            self.chimax_hits += 1
        elif k < full_rank:
            self.cutoff_hits += 1
        self.cumulative_discarded += discarded

        self.tensors[b] = u.reshape(chi_l, 4, k)
        self.tensors[b + 1] = (s[:, None] * v).reshape(k, 4, chi_r)

    def step(self, gates: list[BondGate], policy: TruncationPolicy) -> None:
        """Apply one full Trotter step and renormalize the trace.

        The pre-normalization trace is kept in ``last_pre_trace``; its
        drift from 1 is the per-step truncation signature. Every
        RECANONICALIZE_EVERY steps a full gauge sweep runs first, so the
        local SVDs keep seeing a near-canonical environment.
        """
        if self.steps_taken > 0 and self.steps_taken % RECANONICALIZE_EVERY == 0:
            self.canonicalize()
        for gate in gates:
            self.apply_gate(gate, policy)
        tr = self.trace()
        if tr <= 0.0 or not np.isfinite(tr):
            raise FloatingPointError(f"state trace became {tr} after step {self.steps_taken}")
        self.last_pre_trace = tr
        self.tensors[0] = self.tensors[0] / tr
        self.steps_taken += 1

    def canonicalize(self) -> None:
        """Right-to-left LQ sweep bringing every tensor to right-canonical form.

        No truncation happens here; bond dimensions can only drop where
        the exact rank is lower than the stored one. Afterwards the norm
        sits on site 0 and left-to-right gate sweeps see an isometric
        right environment.
        """
        for i in range(self.n - 1, 0, -1):
            t = self.tensors[i]
            chi_l = t.shape[0]
            mat = t.reshape(chi_l, -1)
            q1, r1 = np.linalg.qr(mat.T)
            k = q1.shape[1]
            self.tensors[i] = q1.T.reshape(k, 4, t.shape[2])
            self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], r1.T, axes=(2, 0))


# ---- checkpointing ----


def save_checkpoint(
    state: MPDO,
    path: str,
    t: float,
    metadata: dict | None = None,
) -> None:
    """Write the chain and its bookkeeping to a self-describing .npz file.

    ``metadata`` must be JSON-serializable (parameter dataclasses go in
    as plain dicts); it round-trips through :func:`load_checkpoint`.
    """
    meta = {
        "version": _CHECKPOINT_VERSION,
        "n": state.n,
        "t": float(t),
        "cumulative_discarded": state.cumulative_discarded,
        "cutoff_hits": state.cutoff_hits,
        "chimax_hits": state.chimax_hits,
        "steps_taken": state.steps_taken,
        "last_pre_trace": state.last_pre_trace,
        "extra": metadata or {},
    }
    arrays = {f"tensor_{i}": t for i, t in enumerate(state.tensors)}
    meta_bytes = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    np.savez(path, meta=meta_bytes, **arrays)


def load_checkpoint(path: str) -> tuple[MPDO, dict]:
    """Inverse of :func:`save_checkpoint`; returns (state, metadata dict)."""
    with np.load(path) as data:
        meta = json.loads(data["meta"].tobytes().decode("utf-8"))
        if meta.get("version") != _CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        tensors = [data[f"tensor_{i}"] for i in range(meta["n"])]
    state = MPDO(tensors)
    state.cumulative_discarded = float(meta["cumulative_discarded"])
    state.cutoff_hits = int(meta["cutoff_hits"])
    state.chimax_hits = int(meta["chimax_hits"])
    state.steps_taken = int(meta["steps_taken"])
    state.last_pre_trace = float(meta["last_pre_trace"])
    return state, meta
