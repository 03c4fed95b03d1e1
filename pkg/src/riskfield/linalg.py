"""Dense symmetric-positive-definite linear algebra.

Every posterior and likelihood formula in this library reduces to products
of the form ``A^{-1} v`` and to ``log|A|`` for a correlation matrix ``A``.
Both are served by a single lower-Cholesky factorization with an escalating
jitter retry, the usual defence against correlation matrices of
near-duplicate points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

# Retry diagonal inflation: 0, then 1e-12 escalating by decades up to 1e-4.
JITTER_FLOOR = 1e-12
JITTER_CAP = 1e-4

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpdFactorization:
    """Lower-Cholesky factorization of ``A + jitter * I``.

    Attributes
    ----------
    order : int
        Matrix order n.
    lower : ndarray, shape (n, n)
        Lower-triangular factor L with ``L @ L.T = A + jitter * I``.
    log_det : float
        ``log|A + jitter * I|``, computed as ``2 * sum(log(diag(L)))``.
    jitter : float
        Diagonal inflation that was actually applied.
    """

    order: int
    lower: np.ndarray
    log_det: float
    jitter: float


def factor(matrix: np.ndarray, jitter: float = 0.0) -> SpdFactorization:
    """Factor a symmetric positive-definite matrix, retrying with jitter.

    Parameters
    ----------
    matrix : ndarray, shape (n, n)
        Symmetric matrix to factor.
    jitter : float, optional
        Initial diagonal inflation. When factorization fails the jitter is
        escalated geometrically (x10 per attempt, starting at 1e-12 if the
        initial value is zero) until it exceeds the 1e-4 cap.

    Returns
    -------
    SpdFactorization

    Raises
    ------
    NotSymmetricError
        If the input is not square and symmetric to 1e-12.
    NotPositiveDefiniteError
        If no jitter level up to the cap yields a Cholesky factorization.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    if float(np.max(np.abs(a - a.T), initial=0.0)) > SYMMETRY_TOL * scale:
        raise NotSymmetricError("matrix is not symmetric to tolerance 1e-12")

    level = float(jitter)
    while True:
        try:
            lower = np.linalg.cholesky(a + level * np.eye(n) if level else a)
        except np.linalg.LinAlgError:
            nxt = JITTER_FLOOR if level == 0.0 else level * 10.0
            if nxt > JITTER_CAP:
                raise NotPositiveDefiniteError(
                    f"Cholesky failed for order-{n} matrix even with "
                    f"jitter {level:g} (cap {JITTER_CAP:g})"
                ) from None
            level = nxt
            continue
        log_det = 2.0 * float(np.sum(np.log(np.diag(lower))))
        return SpdFactorization(order=n, lower=lower, log_det=log_det, jitter=level)


def solve(fact: SpdFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(A + jitter * I) X = rhs`` from a factorization.

    ``rhs`` may be a vector of length n or a matrix with n rows; the result
    has the same shape.
    """
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != fact.order:
        raise DimensionMismatchError(
            f"rhs has {b.shape[0]} rows, factorization order is {fact.order}"
        )
    return cho_solve((fact.lower, True), b, check_finite=False)


def half_solve(fact: SpdFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve ``L W = rhs`` only, so that ``W.T @ W = rhs.T A^{-1} rhs``."""
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != fact.order:
        raise DimensionMismatchError(
            f"rhs has {b.shape[0]} rows, factorization order is {fact.order}"
        )
    return solve_triangular(fact.lower, b, lower=True, check_finite=False)
