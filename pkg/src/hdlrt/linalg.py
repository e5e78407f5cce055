"""Dense symmetric-matrix kernels: sample covariance, log-determinants,
block extraction, and symmetric square roots.

Two independent log-determinant routes are provided on purpose.  The
Cholesky route works on an explicitly formed scatter matrix; the
incremental route never forms a p x p matrix and instead accumulates the
squared residual norms of each variable projected onto the orthogonal
complement of its predecessors.  Agreement between the two is part of the
test contract, see ``hdlrt.oracle`` for a third (LU based) route.

All determinants are handled in log space throughout; the raw determinant
ratios underflow already for moderate dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateColumn,
    DimensionExceedsSample,
    DimensionMismatch,
    NegativeEigenvalue,
    NotPositiveDefinite,
)

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class BlockPartition:
    """Ordered block sizes (p_1, ..., p_q) splitting the coordinates of a
    p-dimensional vector into q contiguous groups.

    Attributes
    ----------
    sizes : tuple of int
        Block sizes, all >= 1.
    cumulative : tuple of int
        Running sums (0, p_1, p_1 + p_2, ..., p); strictly increasing.
    """

    sizes: tuple[int, ...]
    cumulative: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ValueError("partition needs at least one block")
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        cum = [0]
        for s in sizes:
            cum.append(cum[-1] + s)
        object.__setattr__(self, "cumulative", tuple(cum))

    @property
    def q(self) -> int:
        """Number of blocks."""
        return len(self.sizes)

    @property
    def p(self) -> int:
        """Total dimension, sum of the block sizes."""
        return self.cumulative[-1]

    def block_range(self, i: int) -> tuple[int, int]:
        """Half-open column range [start, stop) of block ``i`` (0-based)."""
        if not 0 <= i < self.q:
            raise IndexError(f"block index {i} outside [0, {self.q})")
        return self.cumulative[i], self.cumulative[i + 1]

    @classmethod
    def uniform(cls, q: int, size: int) -> "BlockPartition":
        """q blocks of equal size."""
        return cls((size,) * q)

    @classmethod
    def unit(cls, p: int) -> "BlockPartition":
        """p singleton blocks; turns the block statistic into the
        correlation-determinant statistic."""
        return cls((1,) * p)


def _as_data_matrix(data) -> np.ndarray:
    """Validate and coerce an observations-by-variables array."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"data must be 2-d (n x p), got shape {a.shape}")
    n, p = a.shape
    if n < 1 or p < 1:
        raise DimensionMismatch(f"data must be non-empty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("data contains non-finite entries")
    return a


def _check_symmetric(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not exactly symmetric")
    return m


def _mirror(a: np.ndarray) -> np.ndarray:
    """Copy the lower triangle onto the upper one, making symmetry exact."""
    lower = np.tril(a)
    return lower + np.tril(a, -1).T


def sample_covariance(data) -> np.ndarray:
    """Sample covariance (1/n) sum_k y_k y_k^T of the rows of ``data``.

    No mean-centering is applied; the sampling model underlying the tests
    fixes the mean at zero, and centering would silently change the null
    distribution of the statistics.

    Returns a p x p exactly-symmetric positive semidefinite matrix.
    """
    a = _as_data_matrix(data)
    n = a.shape[0]
    s = a.T @ a
    return _mirror(s) / n


def log_det_cholesky(a) -> float:
    """Log-determinant of a symmetric positive definite matrix via Cholesky.

    Returns sum of 2*log(L_ii) for the Cholesky factor L.

    Raises
    ------
    NotPositiveDefinite
        If the factorization fails or produces a non-positive or
        non-finite pivot (e.g. a singular sample covariance with p >= n).
    """
    m = _check_symmetric(a)
    if not np.isfinite(m).all():
        raise NotPositiveDefinite("matrix contains non-finite entries")
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    diag = np.diagonal(chol)
    if not np.all(diag > 0) or not np.isfinite(diag).all():
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return float(2.0 * np.sum(np.log(diag)))


def incremental_quad_forms(data, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Per-step squared residual norms of the projection recursion.

    For the variable vectors b_start, ..., b_{stop-1} (columns of ``data``),
    entry j is b_i^T P b_i where P projects onto the orthogonal complement
    of span(b_start, ..., b_{i-1}); the first entry is the plain squared
    norm.  The product of these quadratic forms equals the determinant of
    the scatter matrix of the selected columns.

    The projection matrices are never formed.  An orthonormal basis of the
    processed columns is grown one vector at a time; each new column is
    projected against the basis and reorthogonalized once whenever the
    residual norm drops below 1/sqrt(2) of the pre-projection norm.

    Raises
    ------
    DegenerateColumn
        If a residual norm underflows the rank-deficiency tolerance
        (squared norm below n * eps^2 * squared column norm).
    DimensionExceedsSample
        If the range holds more columns than there are observations.
    """
    a = _as_data_matrix(data)
    n, p = a.shape
    if stop is None:
        stop = p
    if not 0 <= start <= stop <= p:
        raise IndexError(f"column range [{start}, {stop}) outside [0, {p})")
    k = stop - start
    if k > n:
        raise DimensionExceedsSample(
            f"{k} columns cannot be linearly independent with n={n} observations"
        )
    quad = np.empty(k)
    basis = np.empty((k, n))  # rows are orthonormal
    for j in range(k):
        v = a[:, start + j]
        norm0_sq = float(v @ v)
        if norm0_sq == 0.0:
            raise DegenerateColumn(f"column {start + j} is identically zero")
        if j == 0:
            r = v.copy()
            r_sq = norm0_sq
        else:
            q = basis[:j]
            r = v - q.T @ (q @ v)
            r_sq = float(r @ r)
            if r_sq < 0.5 * norm0_sq:
                r -= q.T @ (q @ r)
                r_sq = float(r @ r)
        if r_sq < n * _EPS * _EPS * norm0_sq:
            raise DegenerateColumn(
                f"column {start + j} is numerically dependent on its predecessors"
            )
        quad[j] = r_sq
        basis[j] = r / math.sqrt(r_sq)
    return quad


def log_det_incremental(data, start: int = 0, stop: int | None = None) -> float:
    """Log-determinant of the scatter matrix X^T X of a column range of
    ``data``, accumulated as the sum of log projection quadratic forms.

    For the full range this equals ``log_det_cholesky`` of n times the
    sample covariance, without ever forming the p x p matrix.
    """
    return float(np.sum(np.log(incremental_quad_forms(data, start, stop))))


def extract_block(a, part: BlockPartition, i: int) -> np.ndarray:
    """Principal submatrix of ``a`` for block ``i`` (0-based) of ``part``.

    Raises IndexError if ``i`` is outside [0, q) and DimensionMismatch if
    ``a`` is not p x p for the partition's total dimension.
    """
    m = _check_symmetric(a)
    if m.shape[0] != part.p:
        raise DimensionMismatch(
            f"matrix of size {m.shape[0]} does not match partition p={part.p}"
        )
    lo, hi = part.block_range(i)
    return m[lo:hi, lo:hi].copy()


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition by the cyclic Jacobi method.

    Sweeps rotate away every off-diagonal entry in turn until the
    off-diagonal Frobenius norm falls below ``tol`` times the Frobenius
    norm of the input.  Returns (eigenvalues, eigenvectors) with
    eigenvectors in columns; a @ v = v @ diag(w) up to rounding.
    """
    m = _check_symmetric(a).copy()
    d = m.shape[0]
    v = np.eye(d)
    fnorm = float(np.linalg.norm(m))
    if fnorm == 0.0 or d == 1:
        return np.diagonal(m).copy(), v
    for _ in range(max_sweeps):
        off_part = m.copy()
        np.fill_diagonal(off_part, 0.0)
        if float(np.linalg.norm(off_part)) <= tol * fnorm:
            break
        for r in range(d - 1):
            for c in range(r + 1, d):
                if abs(m[r, c]) <= tol * fnorm / d:
                    continue
                diff = m[c, c] - m[r, r]
                if abs(m[r, c]) < abs(diff) * 1e-36:
                    t = m[r, c] / diff  # rotation angle ~ 0, avoids overflow below
                else:
                    theta = diff / (2.0 * m[r, c])
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                cos = 1.0 / math.hypot(1.0, t)
                sin = t * cos
                row_r = m[r].copy()
                row_c = m[c].copy()
                m[r] = cos * row_r - sin * row_c
                m[c] = sin * row_r + cos * row_c
                col_r = m[:, r].copy()
                col_c = m[:, c].copy()
                m[:, r] = cos * col_r - sin * col_c
                m[:, c] = sin * col_r + cos * col_c
                m[r, c] = 0.0
                m[c, r] = 0.0
                vec_r = v[:, r].copy()
                vec_c = v[:, c].copy()
                v[:, r] = cos * vec_r - sin * vec_c
                v[:, c] = sin * vec_r + cos * vec_c
    return np.diagonal(m).copy(), v


def symmetric_sqrt(a) -> np.ndarray:
    """Symmetric positive semidefinite square root of a PSD matrix.

    Computed from a cyclic-Jacobi eigendecomposition with the eigenvalues
    square-rooted; eigenvalues below a relative negativity tolerance raise
    NegativeEigenvalue, tiny negative rounding noise is clipped to zero.
    """
    m = _check_symmetric(a)
    w, v = jacobi_eigh(m)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if np.min(w) < -1e-10 * scale:
        raise NegativeEigenvalue(f"eigenvalue {np.min(w):.3e} below tolerance")
    root = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return _mirror(root)


def compound_symmetry_sqrt(delta: float, p: int) -> np.ndarray:
    """Exact symmetric square root of (1 - delta) I + delta * ones((p, p)).

    The matrix has eigenvalues 1 - delta (multiplicity p - 1) and
    1 - delta + p*delta, so the root is a*I + b*ones with
    a = sqrt(1 - delta) and b = (sqrt(1 - delta + p*delta) - a) / p.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    a = math.sqrt(1.0 - delta)
    b = (math.sqrt(1.0 - delta + p * delta) - a) / p
    root = np.full((p, p), b)
    np.fill_diagonal(root, a + b)
    return root
