"""Brute-force reference implementations used by the test suite.

Deliberately different algorithms from the main paths: partial-pivot LU
instead of Cholesky (no symmetry exploited), and explicit least-squares
projection per step instead of the incremental orthonormal basis, so that
agreement between the routes is evidence rather than tautology.

Not part of the public library surface; reachable from the hidden CLI
subcommand ``debug trace`` for inspection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumn, DimensionExceedsSample, DimensionMismatch, SingularMatrix
from .linalg import BlockPartition, _as_data_matrix, extract_block, sample_covariance

_EPS = float(np.finfo(np.float64).eps)


def lu_log_det(a) -> tuple[float, int]:
    """(log|det|, sign) of a square matrix by LU with partial pivoting.

    Raises SingularMatrix when a pivot magnitude falls at or below
    d * eps * max|a_ij|.
    """
    m = np.array(a, dtype=np.float64, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    tol = d * _EPS * float(np.max(np.abs(m))) if m.size else 0.0
    sign = 1
    log_abs = 0.0
    for k in range(d):
        piv = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[piv, k]) <= tol:
            raise SingularMatrix(f"pivot {abs(m[piv, k]):.3e} at step {k} below tolerance")
        if piv != k:
            m[[k, piv]] = m[[piv, k]]
            sign = -sign
        pivot = m[k, k]
        if pivot < 0.0:
            sign = -sign
        log_abs += math.log(abs(pivot))
        if k + 1 < d:
            mult = m[k + 1:, k] / pivot
            m[k + 1:, k + 1:] -= np.outer(mult, m[k, k + 1:])
    return log_abs, sign


def naive_log_vn(data, part: BlockPartition) -> float:
    """log V_n evaluated literally: LU log-determinants of the explicitly
    formed sample covariance and each of its diagonal blocks."""
    a = _as_data_matrix(data)
    n, p = a.shape
    if part.p != p:
        raise DimensionMismatch(f"partition p={part.p} does not match data p={p}")
    if p >= n:
        raise DimensionExceedsSample(f"requires p < n, got p={p}, n={n}")
    s = sample_covariance(a)
    total, _ = lu_log_det(s)
    blocks = 0.0
    for i in range(part.q):
        block_val, _ = lu_log_det(extract_block(s, part, i))
        blocks += block_val
    return total - blocks


def explicit_quad_form(span_columns: np.ndarray, b: np.ndarray) -> float:
    """b^T P b for the projection P onto the orthogonal complement of the
    column span, via a full least-squares solve and explicit residual."""
    if span_columns.shape[1] == 0:
        return float(b @ b)
    coef, *_ = np.linalg.lstsq(span_columns, b, rcond=None)
    r = b - span_columns @ coef
    return float(r @ r)


@dataclass(frozen=True, eq=False)
class DiagnosticTrace:
    """Per-step projection diagnostics for the block statistic.

    ``quad_forms[i]`` is the full-span quadratic form of column i (0-based)
    against all preceding columns; ``block_quad_forms[i]`` the within-block
    one.  ``x_terms`` and ``xj_terms`` are the centered and scaled versions
    for the columns beyond the first block (the martingale differences of
    the normal approximation), and ``sigma1_sum`` is the closed-form sum of
    their leading per-step variances, which approaches sigma_n^2.
    """

    quad_forms: np.ndarray
    block_quad_forms: np.ndarray
    x_terms: np.ndarray
    xj_terms: np.ndarray
    sigma1_sum: float


def sigma1_closed_form(n: int, part: BlockPartition) -> float:
    """sum_i 2 [ 1/(n-i+1) - 1/(n-i+1+c_{g(i)-1}) ] over the columns i
    beyond the first block, where c_{g(i)-1} counts the columns before
    column i's block."""
    total = 0.0
    for g in range(1, part.q):
        lo, hi = part.block_range(g)
        shift = part.cumulative[g]
        for i in range(lo + 1, hi + 1):  # 1-based column index
            dof = n - i + 1
            total += 2.0 * (1.0 / dof - 1.0 / (dof + shift))
    return total


def martingale_trace(data, part: BlockPartition) -> DiagnosticTrace:
    """Explicit-projection quadratic forms and martingale terms.

    Every projection is recomputed from scratch through a least-squares
    solve; cost is cubic in p and irrelevant here.
    """
    a = _as_data_matrix(data)
    n, p = a.shape
    if part.p != p:
        raise DimensionMismatch(f"partition p={part.p} does not match data p={p}")
    if p >= n:
        raise DimensionExceedsSample(f"requires p < n, got p={p}, n={n}")
    quad = np.empty(p)
    block_quad = np.empty(p)
    starts = np.empty(p, dtype=int)
    for g in range(part.q):
        lo, hi = part.block_range(g)
        starts[lo:hi] = lo
    for i in range(p):
        b = a[:, i]
        quad[i] = explicit_quad_form(a[:, :i], b)
        block_quad[i] = explicit_quad_form(a[:, starts[i]:i], b)
        norm_sq = float(b @ b)
        if norm_sq == 0.0 or min(quad[i], block_quad[i]) < n * _EPS * _EPS * norm_sq:
            raise DegenerateColumn(f"column {i} is numerically dependent on its predecessors")
    p1 = part.sizes[0]
    x_terms = np.empty(p - p1)
    xj_terms = np.empty(p - p1)
    for i in range(p1, p):
        dof = n - i  # n - (i+1) + 1 for the 1-based column index i+1
        shifted = dof + starts[i]
        x_terms[i - p1] = (quad[i] - dof) / dof
        xj_terms[i - p1] = (block_quad[i] - shifted) / shifted
    return DiagnosticTrace(
        quad_forms=quad,
        block_quad_forms=block_quad,
        x_terms=x_terms,
        xj_terms=xj_terms,
        sigma1_sum=sigma1_closed_form(n, part),
    )
