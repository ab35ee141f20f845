"""Gate-level Trotter circuits with depolarizing noise and unitary folding.

The circuit abstraction is deliberately small: four gate kinds (h, rx,
rzz, rxx), layers of gates on disjoint qubits, and a dense density
matrix simulator with a single-qubit depolarizing channel applied to
every qubit after every layer, idle qubits included: a layer is one
noise window, which keeps the dose uniform along the chain and makes
folded depth an exact noise multiplier. The channel is

    E(rho) = (1 - p) rho + p (1/2 kron Tr_q rho),

the uniform-over-Bloch-sphere convention; the Pauli-twirl form
(1 - q) rho + (q/3) sum_mu sigma rho sigma is the same channel with
q = 3 p / 4.

Rotation conventions: rx(a) = exp(-i a/2 X), rzz(a) = exp(-i a/2 Z Z),
rxx(a) = exp(-i a/2 X X). The Trotter angles are fixed by requiring the
noiseless circuit to converge to the exact chain evolution, which pins
a = -dt * coupling for each term of the -1/2-normalized Hamiltonian.

Qubit ordering matches the dense reference: qubit 0 is the most
significant bit of the basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import HamiltonianParams

MAX_SIMULATED_QUBITS = 10

_ARITY = {"h": 1, "rx": 1, "rzz": 2, "rxx": 2}


@dataclass(frozen=True)
class Gate:
    """One gate: kind, target qubits, rotation angle (None for h)."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits) or any(q < 0 for q in qubits):
            raise ValueError(f"qubits must be distinct and >= 0, got {qubits}")
        object.__setattr__(self, "qubits", qubits)
        if self.kind == "h":
            if self.angle is not None:
                raise ValueError("h takes no angle")
        else:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle, got {self.angle}")

    def matrix(self) -> np.ndarray:
        """Dense unitary of the gate (2 x 2 or 4 x 4)."""
        if self.kind == "h":
            return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
        c, s = math.cos(self.angle / 2.0), math.sin(self.angle / 2.0)
        if self.kind == "rx":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if self.kind == "rzz":
            e_m, e_p = np.exp(-0.5j * self.angle), np.exp(0.5j * self.angle)
            return np.diag([e_m, e_p, e_p, e_m]).astype(complex)
        # rxx
        m = c * np.eye(4, dtype=complex)
        anti = np.fliplr(np.eye(4, dtype=complex))
        return m - 1j * s * anti

    def dagger(self) -> "Gate":
        if self.kind == "h":
            return self
        return Gate(kind=self.kind, qubits=self.qubits, angle=-self.angle)


@dataclass(frozen=True)
class Circuit:
    """Layered gate list; gates within a layer act on disjoint qubits."""

    n: int
    layers: tuple[tuple[Gate, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        layers = tuple(tuple(layer) for layer in self.layers)
        for li, layer in enumerate(layers):
            seen: set[int] = set()
            for gate in layer:
                if max(gate.qubits) >= self.n:
                    raise ValueError(f"gate {gate} exceeds qubit count {self.n}")
                if seen & set(gate.qubits):
                    raise ValueError(f"layer {li} has overlapping qubits")
                seen |= set(gate.qubits)
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def dagger(self) -> "Circuit":
        layers = tuple(
            tuple(g.dagger() for g in layer) for layer in reversed(self.layers)
        )
        return Circuit(n=self.n, layers=layers)


def build_trotter_circuit(
    params: HamiltonianParams,
    t: float,
    m_steps: int,
    final_rotation: bool = True,
) -> Circuit:
    """First-order Trotter circuit for evolution to time t in m_steps steps.

    Layout: a Hadamard layer preparing |+>^n from |0>^n, then per step
    rzz layers on even and odd bonds, rxx layers likewise, and an rx
    layer, then a closing Hadamard layer that rotates the echo
    measurement back to the all-zeros probability. Pass
    final_rotation=False to stop before that closing layer, for
    observables measured directly on the evolved state (e.g. sz sz
    correlators). Layers whose angle is exactly zero (a coupling
    switched off) are omitted rather than compiled as identity gates, so
    they also contribute no noise events.
    """
    n = params.n
    if n < 2:
        raise ValueError("circuits need n >= 2")
    if m_steps < 0 or int(m_steps) != m_steps:
        raise ValueError(f"m_steps must be a non-negative integer, got {m_steps}")
    if m_steps == 0 and t != 0.0:
        raise ValueError("m_steps = 0 only represents t = 0")

    delta = t / m_steps if m_steps else 0.0
    theta = -delta * params.j_z
    phi = -delta * params.j_x
    g_x = -delta * params.h_x

    h_layer = tuple(Gate("h", (q,)) for q in range(n))
    even = [(q, q + 1) for q in range(0, n - 1, 2)]
    odd = [(q, q + 1) for q in range(1, n - 1, 2)]

    layers: list[tuple[Gate, ...]] = [h_layer]
    for _ in range(m_steps):
        if theta != 0.0:
            layers.append(tuple(Gate("rzz", pair, theta) for pair in even))
            if odd:
                layers.append(tuple(Gate("rzz", pair, theta) for pair in odd))
        if phi != 0.0:
            layers.append(tuple(Gate("rxx", pair, phi) for pair in even))
            if odd:
                layers.append(tuple(Gate("rxx", pair, phi) for pair in odd))
        if g_x != 0.0:
            layers.append(tuple(Gate("rx", (q,), g_x) for q in range(n)))
    if final_rotation:
        layers.append(h_layer)
    return Circuit(n=n, layers=tuple(layers))


def fold_global(circuit: Circuit, n_folds: int) -> Circuit:
    """Global unitary folding U (U^+ U)^n_folds; noise scale 1 + 2 n_folds."""
    if n_folds < 0 or int(n_folds) != n_folds:
        raise ValueError(f"n_folds must be a non-negative integer, got {n_folds}")
    layers = list(circuit.layers)
    inverse = circuit.dagger().layers
    for _ in range(n_folds):
        layers.extend(inverse)
        layers.extend(circuit.layers)
    return Circuit(n=circuit.n, layers=tuple(layers))


def layer_fold_count(depth: int, alpha: float) -> int:
    """Number of layer folds approximating a target noise scale alpha."""
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return round((alpha - 1.0) * depth / 2.0)


def fold_layers(circuit: Circuit, k: int, seed: int = 0) -> Circuit:
    """Fold k layers picked at random: each chosen layer L becomes L L^+ L.

    The achieved noise scale is alpha = 1 + 2 k / depth exactly. For
    k > depth the selection cycles: every layer is folded k // depth
    times and a random subset without replacement gets one more. The
    choice is deterministic in ``seed``.
    """
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    d = circuit.depth
    if d == 0:
        raise ValueError("cannot fold an empty circuit")
    base, rem = divmod(k, d)
    counts = np.full(d, base, dtype=int)
    if rem:
        rng = np.random.default_rng(seed)
        counts[rng.choice(d, size=rem, replace=False)] += 1
    layers: list[tuple[Gate, ...]] = []
    for layer, c in zip(circuit.layers, counts):
        layers.append(layer)
        inverse = tuple(g.dagger() for g in layer)
        for _ in range(c):
            layers.append(inverse)
            layers.append(layer)
    return Circuit(n=circuit.n, layers=tuple(layers))


def _apply_unitary(rho_t: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """U rho U^+ on a (2,)*2n tensor, rows = axes q, cols = axes n + q."""
    k = len(qubits)
    ut = u.reshape((2,) * (2 * k))
    # rows: contract input row axes with U's column indices
    rho_t = np.tensordot(ut, rho_t, axes=(tuple(range(k, 2 * k)), qubits))
    rho_t = np.moveaxis(rho_t, tuple(range(k)), qubits)
    # cols: same with conj(U), shifted by n
    col_axes = tuple(n + q for q in qubits)
    rho_t = np.tensordot(ut.conj(), rho_t, axes=(tuple(range(k, 2 * k)), col_axes))
    rho_t = np.moveaxis(rho_t, tuple(range(k)), col_axes)
    return rho_t


def _depolarize_qubit(rho_t: np.ndarray, q: int, n: int, p: float) -> np.ndarray:
    """(1 - p) rho + p (1/2 kron Tr_q rho) on a (2,)*2n tensor."""
    reduced = np.trace(rho_t, axis1=q, axis2=n + q)  # (2,)*(2n - 2)
    lifted = np.tensordot(0.5 * np.eye(2, dtype=complex), reduced, axes=0)
    # lifted axes: (q_row, q_col, rows-without-q..., cols-without-q...)
    lifted = np.moveaxis(lifted, (0, 1), (q, n + q))
    return (1.0 - p) * rho_t + p * lifted


def simulate_noisy(circuit: Circuit, p: float, rho0: np.ndarray | None = None) -> np.ndarray:
    """Run the circuit as a density-matrix simulation with layered noise.

    After every layer, every qubit passes through the depolarizing
    channel of strength p: a layer is one noise window, and a qubit
    idling through it decoheres just like a driven one. This keeps the
    dose uniform across the chain (matching a uniform continuous rate)
    and makes folded depth an exact noise multiplier. p = 0 reproduces
    the exact noiseless state; p = 1 fully mixes the register at the
    first layer. Returns the final 2^n x 2^n density matrix. Default
    initial state is |0...0>.
    """
    n = circuit.n
    if n > MAX_SIMULATED_QUBITS:
        raise ValueError(f"dense circuit simulation limited to n <= {MAX_SIMULATED_QUBITS}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    dim = 2**n
    if rho0 is None:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
    else:
        rho = np.asarray(rho0, dtype=complex).copy()
        if rho.shape != (dim, dim):
            raise ValueError(f"rho0 must be {dim} x {dim}, got {rho.shape}")
    rho_t = rho.reshape((2,) * (2 * n))
    for layer in circuit.layers:
        for gate in layer:
            rho_t = _apply_unitary(rho_t, gate.matrix(), gate.qubits, n)
        if p > 0.0:
            for q in range(n):
                rho_t = _depolarize_qubit(rho_t, q, n, p)
    rho = rho_t.reshape(dim, dim)
    trace = np.trace(rho)
    if abs(trace - 1.0) > 1e-12 * max(1.0, circuit.gate_count()):
        raise FloatingPointError(f"trace drifted to {trace} during simulation")
    return rho


def loschmidt_from_circuit(rho: np.ndarray) -> float:
    """All-zeros return probability <0...0| rho |0...0>."""
    return float(np.real(rho[0, 0]))


def to_netlist(circuit: Circuit) -> str:
    """Plain-text gate list, one gate per line: kind, qubits, angle."""
    lines = [f"qubits {circuit.n}"]
    for li, layer in enumerate(circuit.layers):
        lines.append(f"layer {li}")
        for g in layer:
            qubits = " ".join(str(q) for q in g.qubits)
            if g.angle is None:
                lines.append(f"  {g.kind} {qubits}")
            else:
                lines.append(f"  {g.kind} {qubits} {g.angle!r}")
    return "\n".join(lines) + "\n"
