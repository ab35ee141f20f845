"""Dense tensor kernels: contraction, truncated SVD, Kronecker products, expm.

Everything here operates on plain numpy arrays. Tensors are dense and
complex-valued; no sparsity, no symmetry blocking, no GPU. The truncated
SVD is the only lossy operation in the package and every caller funnels
through :func:`svd_truncate` so truncation bookkeeping stays in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SvdConvergenceError(np.linalg.LinAlgError):
    """SVD failed to converge even after the fallback driver.

    Carries the shape of the offending matrix so long runs can report
    where they died without keeping the matrix itself alive.
    """

    def __init__(self, shape: tuple[int, ...]):
        self.shape = tuple(shape)
        super().__init__(f"SVD did not converge for matrix of shape {self.shape}")


@dataclass(frozen=True)
class TruncationPolicy:
    """Bond truncation rule applied at every SVD.

    schmidt_cutoff is relative: singular values below
    ``schmidt_cutoff * max(s)`` are dropped. chi_max caps the retained
    rank regardless of the cutoff. At least one singular value is always
    kept.
    """

    schmidt_cutoff: float = 1e-5
    chi_max: int = 200

    def __post_init__(self):
        if not (self.schmidt_cutoff >= 0.0):
            raise ValueError(f"schmidt_cutoff must be >= 0, got {self.schmidt_cutoff}")
        if int(self.chi_max) != self.chi_max or self.chi_max < 1:
            raise ValueError(f"chi_max must be an integer >= 1, got {self.chi_max}")


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: list[tuple[int, int]]) -> np.ndarray:
    """Contract ``a`` with ``b`` over the given (axis_of_a, axis_of_b) pairs.

    The result carries the uncontracted axes of ``a`` (in order) followed
    by the uncontracted axes of ``b`` (in order), i.e. tensordot semantics.
    Mismatched extents raise immediately with both shapes in the message
    instead of deep inside einsum machinery.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    for ax_a, ax_b in axis_pairs:
        if a.shape[ax_a] != b.shape[ax_b]:
            raise ValueError(
                f"cannot contract axis {ax_a} of shape {a.shape} with "
                f"axis {ax_b} of shape {b.shape}: extents differ"
            )
    if axis_pairs:
        axes_a, axes_b = zip(*axis_pairs)
    else:
        axes_a, axes_b = (), ()
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with row-major index grouping, kron(A, B)[ij, kl] = A[i, k] B[j, l]."""
    return np.kron(np.asarray(a), np.asarray(b))


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square matrix.

    Delegates to scipy's scaling-and-squaring implementation. Hot-path
    inputs here are at most 16 x 16 (two-site superoperators), so
    precision is what matters, not speed.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("expm input contains non-finite entries")
    return scipy.linalg.expm(a)


def _svd_with_fallback(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # gesdd (numpy default) is fast but occasionally fails to converge on
    # ill-conditioned inputs; gesvd is slower and more robust.
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
        except Exception as exc:
            raise SvdConvergenceError(a.shape) from exc


def svd_truncate(
    a: np.ndarray, policy: TruncationPolicy
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Truncated SVD of a matrix under a :class:`TruncationPolicy`.

    Returns ``(u, s, v, discarded_weight)`` with ``a ~= u @ diag(s) @ v``,
    singular values descending. Retained are the values
    ``s_i >= schmidt_cutoff * s_max``, capped at ``chi_max``, never fewer
    than one. ``discarded_weight`` is the discarded squared Schmidt mass
    relative to the total, sum(s_cut^2) / sum(s_all^2); zero for an
    all-zero input.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"svd_truncate needs a matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("svd_truncate input contains non-finite entries")

    u, s, v = _svd_with_fallback(a)

    total = float(np.sum(s**2))
    if total == 0.0:
        # Zero matrix: keep a single null direction, nothing was discarded.
        return u[:, :1], s[:1], v[:1, :], 0.0

    keep = int(np.count_nonzero(s >= policy.schmidt_cutoff * s[0]))
    keep = max(1, min(keep, policy.chi_max, s.size))
    discarded = float(np.sum(s[keep:] ** 2)) / total
    return u[:, :keep], s[:keep], v[:keep, :], discarded
