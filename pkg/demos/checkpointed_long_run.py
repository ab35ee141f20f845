"""Checkpoint a density-chain evolution and resume it losslessly.

Long sweeps (the n=32 preset runs for hours) want restartable state.
This script evolves an n=6 chain to t=2, writes a checkpoint, keeps
evolving to t=4, then reloads the checkpoint in a fresh state object
and evolves the copy over the same stretch. The resumed run must land
on bitwise-identical observables. Runs in about a minute.
"""

import os

import numpy as np

from noisychain.linalg import TruncationPolicy
from noisychain.model import HamiltonianParams, NoiseParams, trotter_sequence
from noisychain.mpdo import MPDO, load_checkpoint, plus_state, save_checkpoint

out = "demo_out/checkpoint"
os.makedirs(out, exist_ok=True)

params = HamiltonianParams(n=6)
noise = NoiseParams(gamma=0.05)
dt = 0.01
gates = trotter_sequence(params, noise, dt, order=2)
policy = TruncationPolicy(schmidt_cutoff=1e-6, chi_max=64)
psi0 = plus_state(6)

state = MPDO.from_product_state(psi0)
for _ in range(200):  # to t = 2.0
    state.step(gates, policy)

path = os.path.join(out, "chain_t2.npz")
save_checkpoint(state, path, t=2.0, metadata={"n": params.n, "gamma": noise.gamma, "dt": dt})
print(f"checkpoint written to {path} ({os.path.getsize(path) // 1024} KiB)")

for _ in range(200):  # original continues to t = 4.0
    state.step(gates, policy)

resumed, meta = load_checkpoint(path)
print(f"reloaded at t = {meta['t']}, steps so far = {meta['steps_taken']}")
for _ in range(200):  # the copy covers the same stretch
    resumed.step(gates, policy)

echo_a = state.loschmidt_echo(psi0)
echo_b = resumed.loschmidt_echo(psi0)
print(f"echo at t=4, uninterrupted: {echo_a!r}")
print(f"echo at t=4, resumed:       {echo_b!r}")
print(f"trace gap: {abs(state.trace() - resumed.trace()):.1e}")
assert echo_a == echo_b, "resume drifted"
print("\nresumed evolution is bit-identical; safe to shard the n=32 preset this way")

rho_gap = max(
    float(np.abs(a - b).max()) for a, b in zip(state.tensors, resumed.tensors)
)
print(f"worst tensor entry gap: {rho_gap:.1e}")
