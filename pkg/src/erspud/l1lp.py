"""Exact solver for ``min ||w^T Y||_1`` subject to ``r^T w = 1``.

The solver walks vertices of the piecewise-linear objective on the feasible
hyperplane. A vertex is described by a basis of the bounded-variable program

    maximize  lam
    s.t.      Y u - lam r = 0,   -1 <= u_j <= 1,   lam free,

whose simplex multipliers are the vertex ``w`` (strong duality gives
``lam* = ||Y^T w||_1``). Every basis is dual feasible, so no phase one is
needed, and each step performs an exact line search across all kinks of the
objective along the chosen edge. The returned ``w`` is always a vertex.
"""

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _simplex
from .linalg import as_matrix

FEAS_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
PIVOT_TOL = 1e-11
REFACTOR_EVERY = 50
PERTURBATION = 1e-7
ZERO_R_TOL = 1e-12
ORACLE_MAX_N = 6
ORACLE_MAX_P = 12


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    TIE_DEGENERATE = "TieDegenerate"


class LpError(RuntimeError):
    pass


@dataclass
class LpSolution:
    w: np.ndarray
    objective: float
    status: LpStatus
    iterations: int = 0

    @property
    def solved(self):
        return self.status in (LpStatus.OPTIMAL, LpStatus.TIE_DEGENERATE)


def _as_vector(r, n):
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    if r.shape[0] != n:
        raise ValueError(f"constraint vector has length {r.shape[0]}, expected {n}")
    if not np.all(np.isfinite(r)):
        raise ValueError("constraint vector has non-finite entries")
    return r


def _infeasible(n):
    return LpSolution(np.zeros(n), math.inf, LpStatus.INFEASIBLE, 0)


def solve_l1(y, r, detect_ties=True, max_iter=None):
    """Globally minimize ``||w^T y||_1`` over ``{w : r^T w = 1}``.

    Parameters
    ----------
    y : (n, p) array
    r : (n,) array
        Normalization vector. ``||r||_inf < 1e-12`` is reported as infeasible.
    detect_ties : bool
        Probe the optimal basis for an alternative optimum with a different
        ``w``; a hit turns the status into ``TIE_DEGENERATE`` (the returned
        ``w`` is still optimal).

    Returns
    -------
    LpSolution
    """
    y = as_matrix(y)
    n, p = y.shape
    r = _as_vector(r, n)
    if np.max(np.abs(r), initial=0.0) < ZERO_R_TOL:
        return _infeasible(n)

    sy = np.max(np.abs(y), initial=0.0) or 1.0
    sr = np.max(np.abs(r))
    ys = y / sy
    rs = r / sr

    basis = _crash_basis(ys, rs)
    bland_after = 50 * (n + p)
    if max_iter is None:
        max_iter = bland_after + 200 * (n + p)
    yt = np.ascontiguousarray(ys.T)
    # a perturbed solve steers clear of degenerate vertices; the exact solve
    # then restarts from its basis, usually a few pivots from optimal
    iters = 0
    signs = np.zeros(p)
    for eps in (_kink_shifts(ys), np.zeros(p)):
        try:
            status, it, binv, ws = _simplex.l1_simplex(
                yt, rs, eps, basis, signs, max_iter, bland_after, FEAS_TOL, PIVOT_TOL, REFACTOR_EVERY)
        except np.linalg.LinAlgError as exc:
            raise LpError(f"basis became singular: {exc}") from exc
        iters += it
        if status == _simplex.UNBOUNDED:
            raise LpError("line search found no blocking kink; the data are numerically degenerate")
        if status == _simplex.ITERATION_LIMIT:
            raise LpError(f"simplex hit the iteration limit ({max_iter})")

    w = ws / sr
    objective = float(np.abs(y.T @ w).sum())
    lp_status = LpStatus.OPTIMAL
    if detect_ties and _has_tie(ys, rs, ws, binv, basis, p):
        lp_status = LpStatus.TIE_DEGENERATE
    return LpSolution(w, objective, lp_status, int(iters))


def _kink_shifts(ys):
    # distinct, index-determined shifts well above the feasibility tolerance
    p = ys.shape[1]
    frac = (np.arange(1, p + 1) * 0.6180339887498949) % 1.0
    return PERTURBATION * (1.0 + frac) * (1.0 + np.abs(ys).sum(axis=0))


def _crash_basis(ys, rs):
    """``lam`` plus ``n - 1`` columns spanning ``r``-perp, padded with unit vectors.

    Columns are picked by pivoted QR of ``Y`` projected onto ``r``-perp; if
    ``Y`` does not span it, artificial unit columns complete the basis.
    """
    n, p = ys.shape
    rn = rs / np.linalg.norm(rs)
    proj = ys - np.outer(rn, rn @ ys)
    chosen = []
    if p and n > 1:
        _, rr, piv = scipy.linalg.qr(proj, mode="economic", pivoting=True)
        d = np.abs(np.diag(rr))
        # ys has unit max entry, so projection noise of columns parallel to r
        # sits far below this absolute floor
        k = int(np.count_nonzero(d > 1e-9 * max(d[0], 1.0))) if d.size else 0
        chosen = [int(j) for j in piv[:min(k, n - 1)]]
    basis = chosen + [p]
    if len(chosen) < n - 1:
        q, _ = np.linalg.qr(np.column_stack([rn, ys[:, chosen]]))
        rest = np.eye(n) - q @ q.T
        piv = scipy.linalg.qr(rest, mode="r", pivoting=True)[1]
        basis += [p + 1 + int(i) for i in piv[:n - 1 - len(chosen)]]
    return np.asarray(basis, dtype=np.int64)


def _directional(s, yd, zero):
    """One-sided derivative of ``||Y^T w||_1`` along ``d`` (``yd = Y^T d``)."""
    return float(np.sign(s[~zero]) @ yd[~zero] + np.abs(yd[zero]).sum())


def _has_tie(ys, rs, ws, binv, basis, p):
    s = ys.T @ ws
    zero = np.abs(s) <= FEAS_TOL * (1.0 + np.max(np.abs(s), initial=0.0))
    for k, var in enumerate(basis):
        if var == p:
            continue
        d = binv[k]
        yd = ys.T @ d
        scale = np.abs(yd).sum()
        if scale <= 1e-12 * np.abs(d).sum():
            return True  # objective is flat along a feasible line
        tol = REDUCED_COST_TOL * scale
        if _directional(s, yd, zero) <= tol or _directional(s, -yd, zero) <= tol:
            return True
    return False


def is_unique_minimizer(y, r, w, max_subsets=200_000):
    """Decide exactly whether the optimal ``w`` is the only minimizer.

    The objective's one-sided derivative at ``w`` is a nonnegative,
    positively homogeneous piecewise-linear function on ``{d : r^T d = 0}``.
    ``w`` is unique iff that function vanishes nowhere except at 0, which is
    decided by evaluating it on every extreme ray of the hyperplane
    arrangement ``{d : y_j^T d = 0}`` over the zero residuals ``j``.

    Returns ``None`` when more than ``max_subsets`` rays would be enumerated.
    """
    y = as_matrix(y)
    n, p = y.shape
    r = _as_vector(r, n)
    w = np.asarray(w, dtype=np.float64)
    if n == 1:
        return True
    # orthonormal basis of r-perp
    q_full = np.linalg.svd(r[None, :])[2]
    q = q_full[1:].T
    d = n - 1
    s = y.T @ w
    zero = np.abs(s) <= FEAS_TOL * (1.0 + np.max(np.abs(s), initial=0.0))
    yq = y.T @ q  # rows are y_j^T q
    colscale = np.max(np.abs(yq), initial=0.0) or 1.0

    def flat(c):
        yd = yq @ c
        scale = np.abs(yd).sum()
        if scale <= 1e-12 * colscale * np.abs(c).sum():
            return True
        tol = REDUCED_COST_TOL * scale
        return _directional(s, yd, zero) <= tol or _directional(s, -yd, zero) <= tol

    h = yq[zero]
    h = h[np.linalg.norm(h, axis=1) > 1e-12 * colscale]
    if h.shape[0]:
        h = _distinct_directions(h)
    if d == 1:
        return not flat(np.ones(1))
    if h.shape[0] == 0 or np.linalg.matrix_rank(h) < d:
        # the cells contain a line on which the derivative is linear
        return False
    if math.comb(h.shape[0], d - 1) > max_subsets:
        return None
    for idx in itertools.combinations(range(h.shape[0]), d - 1):
        sub = h[list(idx)]
        _, sv, vt = np.linalg.svd(sub)
        if sv[-1] <= 1e-10 * sv[0]:
            continue
        if flat(vt[-1]):
            return False
    return True


def _distinct_directions(h):
    u = h / np.linalg.norm(h, axis=1, keepdims=True)
    k = np.argmax(np.abs(u) > 1e-9, axis=1)
    u = u * np.sign(u[np.arange(len(u)), k])[:, None]
    _, keep = np.unique(np.round(u, 9), axis=0, return_index=True)
    return h[np.sort(keep)]


def oracle_vertex_enum(y, r):
    """Brute-force optimum by enumerating every basic point.

    Candidate points satisfy ``r^T w = 1`` together with ``y_j^T w = 0`` for
    every ``j`` in a subset of at most ``n - 1`` columns (minimum-norm
    solution, accepted when consistent). The best candidate is optimal; the
    status is ``TIE_DEGENERATE`` iff two distinct optimal candidates exist or
    the objective is constant along a feasible line.
    """
    y = as_matrix(y)
    n, p = y.shape
    if n > ORACLE_MAX_N or p > ORACLE_MAX_P:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N}, p <= {ORACLE_MAX_P}; got {y.shape}")
    r = _as_vector(r, n)
    if np.max(np.abs(r), initial=0.0) < ZERO_R_TOL:
        return _infeasible(n)

    scale = 1.0 + np.max(np.abs(y), initial=0.0) + np.max(np.abs(r))
    points = []
    values = []
    for k in range(0, min(n - 1, p) + 1):
        for subset in itertools.combinations(range(p), k):
            a = np.vstack([r[None, :], y[:, list(subset)].T])
            rhs = np.zeros(k + 1)
            rhs[0] = 1.0
            w, *_ = np.linalg.lstsq(a, rhs, rcond=None)
            if np.max(np.abs(a @ w - rhs)) > 1e-9 * scale:
                continue
            points.append(w)
            values.append(np.abs(y.T @ w).sum())
    values = np.asarray(values)
    best = int(np.argmin(values))
    w_best = points[best]
    opt = values[best]
    near = np.flatnonzero(values <= opt + 1e-9 * (1.0 + opt))
    wscale = 1.0 + np.max(np.abs(w_best))
    distinct = any(np.max(np.abs(points[i] - w_best)) > 1e-7 * wscale for i in near)
    lineal = np.linalg.matrix_rank(np.column_stack([r, y])) < n
    status = LpStatus.TIE_DEGENERATE if (distinct or lineal) else LpStatus.OPTIMAL
    return LpSolution(w_best, float(opt), status, len(points))
