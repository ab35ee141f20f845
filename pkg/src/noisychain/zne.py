"""Richardson extrapolation to the zero-noise limit.

Noise scaling is exact here, not hardware-style: the Lindblad backends
scale the depolarizing rate gamma -> alpha * gamma directly (equivalent
to stretching all couplings by 1/alpha and evolving for alpha * t,
which :func:`stretch_hamiltonian` exposes as a consistency check), and
the circuit backend reaches alpha through unitary folding.

With samples y(alpha_k) at distinct noise scales, the degree-(m-1)
polynomial through them evaluated at alpha = 0 is

    y(0) ~= sum_k beta_k y(alpha_k),  beta_k = prod_{i != k} alpha_i / (alpha_i - alpha_k),

which satisfies sum beta_k = 1 and sum beta_k alpha_k^j = 0 for
1 <= j < m. Large sum |beta_k| means severe cancellation; a warning is
emitted above CONDITIONING_LIMIT.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import HamiltonianParams, NoiseParams

CONDITIONING_LIMIT = 100.0


def richardson_coefficients(alphas) -> np.ndarray:
    """Extrapolation-to-zero weights for arbitrary distinct nodes."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alphas must be a non-empty 1-d sequence")
    if not np.isfinite(alphas).all():
        raise ValueError("alphas must be finite")
    if np.unique(alphas).size != alphas.size:
        raise ValueError(f"alphas must be distinct, got {alphas.tolist()}")
    betas = np.empty_like(alphas)
    for k, a_k in enumerate(alphas):
        others = np.delete(alphas, k)
        betas[k] = np.prod(others / (others - a_k))
    return betas


@dataclass(frozen=True)
class ZneSchedule:
    """Noise-scale schedule with its derived Richardson weights.

    alphas must start at 1 (the bare run) and increase strictly; betas
    and the conditioning number sum |beta| are computed on construction.
    """

    alphas: tuple[float, ...]
    betas: tuple[float, ...] = ()

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise ValueError("schedule needs at least one alpha")
        if alphas[0] != 1.0:
            raise ValueError(f"alphas must start at 1, got {alphas[0]}")
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ValueError(f"alphas must be strictly increasing, got {alphas}")
        betas = tuple(float(b) for b in richardson_coefficients(alphas))
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)

    @property
    def conditioning(self) -> float:
        return float(sum(abs(b) for b in self.betas))

    def __len__(self) -> int:
        return len(self.alphas)


def _warn_if_ill_conditioned(schedule: ZneSchedule) -> None:
    cond = schedule.conditioning
    if cond > CONDITIONING_LIMIT:
        warnings.warn(
            f"Richardson weights sum |beta| = {cond:.3g} exceeds "
            f"{CONDITIONING_LIMIT:g}; extrapolation amplifies noise in the inputs",
            stacklevel=3,
        )


def extrapolate(schedule: ZneSchedule, values) -> float:
    """Zero-noise estimate sum_k beta_k values[k]; values ordered like alphas."""
    values = np.asarray(values, dtype=float)
    if values.shape != (len(schedule),):
        raise ValueError(
            f"need one value per alpha ({len(schedule)}), got shape {values.shape}"
        )
    _warn_if_ill_conditioned(schedule)
    return float(np.dot(schedule.betas, values))


def extrapolate_series(schedule: ZneSchedule, series_by_alpha: Mapping[float, np.ndarray]) -> np.ndarray:
    """Pointwise Richardson extrapolation of same-grid series keyed by alpha."""
    missing = [a for a in schedule.alphas if a not in series_by_alpha]
    if missing:
        raise ValueError(f"missing series for alphas {missing}")
    arrays = [np.asarray(series_by_alpha[a], dtype=float) for a in schedule.alphas]
    length = arrays[0].shape
    if any(arr.shape != length for arr in arrays):
        raise ValueError("series must share one time grid")
    _warn_if_ill_conditioned(schedule)
    out = np.zeros(length, dtype=float)
    for beta, arr in zip(schedule.betas, arrays):
        out += beta * arr
    return out


def scale_noise_lindblad(noise: NoiseParams, alpha: float) -> NoiseParams:
    """Exact noise scaling gamma -> alpha gamma, alpha >= 1."""
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise ValueError(f"alpha must be finite and >= 1, got {alpha}")
    return NoiseParams(gamma=noise.gamma * alpha)


def stretch_hamiltonian(params: HamiltonianParams, alpha: float) -> HamiltonianParams:
    """Couplings divided by alpha; evolving this for alpha * t at rate gamma
    equals evolving the original for t at rate alpha * gamma, exactly."""
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise ValueError(f"alpha must be finite and >= 1, got {alpha}")
    return HamiltonianParams(
        n=params.n,
        j_z=params.j_z / alpha,
        j_x=params.j_x / alpha,
        h_x=params.h_x / alpha,
    )
