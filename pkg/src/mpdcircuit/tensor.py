"""Dense complex tensor algebra.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128``. This module
provides the three primitives everything else is built on: pairwise
contraction, truncated SVD with a reproducible phase gauge, and the
orthonormal complement of an isometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NotIsometricError

DEFAULT_CUTOFF = 1e-12
ISOMETRY_TOL = 1e-10


def as_tensor(x) -> np.ndarray:
    """Coerce ``x`` to a C-contiguous complex128 array."""
    return np.ascontiguousarray(x, dtype=np.complex128)


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over the paired axes of ``a`` and ``b``.

    The free axes of ``a`` come first, then those of ``b``, each in their
    original order.

    Raises:
        DimensionMismatchError: if a pair has unequal extents or an axis is
            out of range / repeated.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a, axes_b = [], []
    for ia, ib in axis_pairs:
        if not (-a.ndim <= ia < a.ndim) or not (-b.ndim <= ib < b.ndim):
            raise DimensionMismatchError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim}, {b.ndim}")
        ia %= a.ndim
        ib %= b.ndim
        if a.shape[ia] != b.shape[ib]:
            raise DimensionMismatchError(
                f"axis pair ({ia}, {ib}): extent {a.shape[ia]} != {b.shape[ib]}"
            )
        axes_a.append(ia)
        axes_b.append(ib)
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise DimensionMismatchError(f"repeated axis in pairs {list(axis_pairs)}")
    return np.tensordot(a, b, axes=(axes_a, axes_b))


@dataclass(frozen=True)
class SvdResult:
    """Truncated factorization ``m ~ left @ diag(singular_values) @ right_adjoint``."""

    left: np.ndarray
    singular_values: np.ndarray
    right_adjoint: np.ndarray
    discarded_weight: float

    @property
    def rank(self) -> int:
        return len(self.singular_values)


def _fix_column_phases(u: np.ndarray, vh: np.ndarray | None = None) -> None:
    """Rotate each column of ``u`` so its largest-magnitude entry is real positive.

    ``vh`` rows receive the compensating phase. Operates in place.
    """
    if u.shape[1] == 0:
        return
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    mags = np.abs(pivots)
    phases = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    u *= phases.conj()[None, :]
    if vh is not None:
        vh *= phases[:, None]


def truncated_svd(m: np.ndarray, max_rank: int, cutoff: float = DEFAULT_CUTOFF) -> SvdResult:
    """Truncated singular value decomposition of a matrix.

    Keeps ``min(max_rank, #{s_i / s_max > cutoff}, full rank)`` singular
    values. A zero matrix yields a single zero singular value instead of an
    empty factorization.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionMismatchError(f"truncated_svd expects a matrix, got rank {m.ndim}")
    if max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        u, s, vh = _svd_gesvd(m)
    total = float(np.sum(s**2))
    if s.size == 0 or s[0] == 0.0:
        keep = 1
    else:
        keep = int(np.count_nonzero(s / s[0] > cutoff))
        keep = max(1, min(keep, max_rank, s.size))
    discarded = float(np.sum(s[keep:] ** 2)) / total if total > 0 else 0.0
    u = np.array(u[:, :keep], dtype=np.complex128)
    vh = np.array(vh[:keep, :], dtype=np.complex128)
    _fix_column_phases(u, vh)
    return SvdResult(u, np.array(s[:keep], dtype=np.float64), vh, min(max(discarded, 0.0), 1.0))


def _svd_gesvd(m: np.ndarray):
    # gesdd occasionally fails to converge; gesvd is slower but robust
    import scipy.linalg

    return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def isometry_defect(v: np.ndarray) -> float:
    """Spectral norm of ``v^dag v - I``."""
    v = np.asarray(v)
    if v.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1]), ord=2))


def orthonormal_complement(v: np.ndarray, tol: float = ISOMETRY_TOL) -> np.ndarray:
    """Orthonormal basis of the complement of the column space of ``v``.

    ``v`` is ``m x r`` with orthonormal columns. The result ``K`` is
    ``m x (m - r)`` with ``K^dag K = I``, ``v^dag K = 0`` and
    ``v v^dag + K K^dag = I``. The basis is taken from the null-space left
    singular vectors of ``v`` and phase-fixed, so it is reproducible.
    """
    v = as_tensor(v)
    if v.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got rank {v.ndim}")
    m, r = v.shape
    if r > m:
        raise DimensionMismatchError(f"{r} columns cannot be orthonormal in C^{m}")
    if r == 0:
        return np.eye(m, dtype=np.complex128)
    defect = isometry_defect(v)
    if defect > tol:
        raise NotIsometricError(f"input columns are not orthonormal (defect {defect:.3e})", defect)
    if r == m:
        return np.zeros((m, 0), dtype=np.complex128)
    u, _, _ = np.linalg.svd(v, full_matrices=True)
    k = np.array(u[:, r:], dtype=np.complex128)
    _fix_column_phases(k)
    return k


def unitarity_defect(u: np.ndarray) -> float:
    """``||U^dag U - I||_2`` for a square matrix."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {u.shape}")
    return isometry_defect(u)
