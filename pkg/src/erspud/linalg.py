"""Small dense linear algebra helpers.

Matrices are plain 2-D ``float64`` numpy arrays; :func:`as_matrix` is the
single place where shape and finiteness are enforced.
"""

import numpy as np
import scipy.linalg

DEFAULT_RANK_TOL = 1e-9
SINGULAR_COND = 1e12


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised by :func:`solve_linear` for numerically singular systems."""

    def __init__(self, condition):
        super().__init__(f"matrix is numerically singular (condition estimate {condition:.3e})")
        self.condition = condition


def as_matrix(a):
    """Return ``a`` as a finite 2-D float64 array (copying only if needed)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matmul(a, b):
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def numerical_rank(m, tol=DEFAULT_RANK_TOL):
    """Rank from column-pivoted QR.

    Counts diagonal entries of ``R`` whose magnitude exceeds ``tol`` times the
    largest one. An empty or all-zero matrix has rank 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    if m.size == 0:
        return 0
    r = scipy.linalg.qr(m, mode="r", pivoting=True)[0]
    d = np.abs(np.diag(r))
    if d.size == 0 or d[0] == 0.0:
        return 0
    return int(np.count_nonzero(d > tol * d[0]))


def condition_estimate(a):
    a = as_matrix(a)
    if a.size == 0:
        return 1.0
    with np.errstate(all="ignore"):
        c = np.linalg.cond(a)
    return float(c) if np.isfinite(c) else np.inf


def solve_linear(a, b):
    """Solve ``a @ x = b`` for square, numerically nonsingular ``a``.

    ``b`` may be a vector or a matrix. Raises :class:`SingularMatrixError`
    when the condition estimate exceeds ``1e12``.
    """
    a = as_matrix(a)
    b_arr = np.asarray(b, dtype=np.float64)
    vector = b_arr.ndim == 1
    b2 = b_arr[:, None] if vector else as_matrix(b_arr)
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError(f"coefficient matrix must be square, got {a.shape}")
    if b2.shape[0] != n:
        raise DimensionError(f"right-hand side has {b2.shape[0]} rows, expected {n}")
    cond = condition_estimate(a)
    if not cond < SINGULAR_COND:
        raise SingularMatrixError(cond)
    x = scipy.linalg.lu_solve(scipy.linalg.lu_factor(a, check_finite=False), b2, check_finite=False)
    return x[:, 0] if vector else x


def inverse(a):
    a = as_matrix(a)
    return solve_linear(a, np.eye(a.shape[0]))
