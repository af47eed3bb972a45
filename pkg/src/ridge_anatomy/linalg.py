"""
Dense matrix primitives.

Thin singular value decomposition with a deterministic sign convention,
spectral condition numbers, Frobenius distances and symmetric positive
definite solves. Everything else in the package consumes these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, RankDeficient, ShapeMismatch

__all__ = [
    "RANK_TOLERANCE",
    "SvdFactors",
    "as_matrix",
    "svd_thin",
    "spectral_condition",
    "frobenius_distance",
    "solve_spd",
]

#: Relative rank tolerance: singular values below ``RANK_TOLERANCE * xi_1``
#: are treated as zero.
RANK_TOLERANCE = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite 2-D float array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD ``m = left @ diag(spectrum) @ right.T``.

    Attributes
    ----------
    left : ndarray, shape (n, k)
        Orthonormal columns (the P factor).
    spectrum : ndarray, shape (k,)
        Singular values, strictly positive and non-increasing.
    right : ndarray, shape (k, k)
        Orthogonal matrix whose columns are the right singular vectors (Q).
    """

    left: np.ndarray
    spectrum: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spectrum, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ShapeMismatch("spectrum must be a non-empty vector")
        if np.any(s <= 0):
            raise RankDeficient("singular values must be strictly positive")
        if np.any(np.diff(s) > 0):
            raise ValueError("singular values must be non-increasing")
        for arr in (self.left, self.spectrum, self.right):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def k(self) -> int:
        return self.spectrum.size

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.spectrum) @ self.right.T


def svd_thin(m, rank_tolerance: float = RANK_TOLERANCE) -> SvdFactors:
    """Thin SVD of a full-column-rank matrix.

    The sign of each singular pair is fixed so that the largest-magnitude
    entry of every right singular vector is positive. Ties in magnitude are
    broken by the lowest index.

    Parameters
    ----------
    m : array_like, shape (n, k)
        Matrix with n >= k.
    rank_tolerance : float
        Relative threshold; the smallest singular value must exceed
        ``rank_tolerance * xi_1``.

    Raises
    ------
    RankDeficient
        If ``n < k`` or the smallest singular value is below the threshold.
    """
    a = as_matrix(m)
    n, k = a.shape
    if n < k:
        raise RankDeficient(f"{n} rows cannot support rank {k}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0 or s[-1] <= rank_tolerance * s[0]:
        raise RankDeficient(
            f"smallest singular value {s[-1]:.3e} is below {rank_tolerance:g} x {s[0]:.3e}"
        )
    v = vt.T
    pivot = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[pivot, np.arange(k)])
    signs[signs == 0] = 1.0
    return SvdFactors(left=u * signs, spectrum=s, right=v * signs)


def spectral_condition(spectrum) -> float:
    """Ratio ``xi_1 / xi_k`` of the extreme values of a positive spectrum.

    The ordering of the input is not assumed.
    """
    s = np.asarray(spectrum, dtype=float).ravel()
    if s.size == 0 or np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise ValueError("spectrum must be non-empty, finite and strictly positive")
    return float(s.max() / s.min())


def frobenius_distance(a, b) -> float:
    """``sqrt(tr((a - b)^T (a - b)))``."""
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ShapeMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x - y))


def solve_spd(a, rhs, symmetry_tolerance: float = 1e-10) -> np.ndarray:
    """Solve ``a z = rhs`` for symmetric positive definite ``a`` via Cholesky.

    Raises
    ------
    NotPositiveDefinite
        If ``a`` is not symmetric within ``symmetry_tolerance`` (relative to
        its largest entry) or the Cholesky factorization fails.
    """
    m = as_matrix(a, "a")
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"a must be square, got {m.shape}")
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != m.shape[0]:
        raise ShapeMismatch(f"rhs has {b.shape[0]} rows, a has {m.shape[0]}")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > symmetry_tolerance * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return scipy.linalg.cho_solve(factor, b)
