"""Vertex-following simplex for ``min ||Y^T w||_1`` s.t. ``r^T w = 1`` (numba).

Variables of the bounded-variable program ``max lam : Y u - lam r = 0,
|u_j| <= 1`` are indexed ``0..p-1`` (``u``), ``p`` (``lam``, always basic) and
``p+1..p+n`` (artificial unit columns fixed at zero). A basis of ``n`` of
these fixes a vertex ``w`` of the piecewise-linear objective: basic ``u_j``
means ``y_j^T w = 0``, basic artificial ``i`` means ``w_i = 0`` and ``lam``
means ``r^T w = 1``. Nonbasic ``u_j`` sit at ``sign(y_j^T w)``, so every basis
is dual feasible and no phase one is needed.

Each iteration picks a basic variable outside its bounds (an edge along
which the objective decreases), walks the edge with an exact line search
over every kink ``y_j^T w = 0`` it crosses (each crossing flips one ``u_j``)
and pivots in the kink where the slope turns nonnegative. A vertex with all
basic variables inside their bounds is optimal. After ``bland_after``
iterations both choices switch to smallest-index rules.
"""

import numpy as np
from numba import njit

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


@njit(cache=True, nogil=True)
def _column(j, yt, rs, out):
    p, n = yt.shape
    if j < p:
        for i in range(n):
            out[i] = yt[j, i]
    elif j == p:
        for i in range(n):
            out[i] = -rs[i]
    else:
        for i in range(n):
            out[i] = 0.0
        out[j - p - 1] = 1.0


@njit(cache=True, nogil=True)
def _signed_sum(yt, u, is_basic):
    # g = sum of u_j y_j over nonbasic j; basic values are -B^{-1} g
    p, n = yt.shape
    g = np.zeros(n)
    for j in range(p):
        if not is_basic[j] and u[j] != 0.0:
            for i in range(n):
                g[i] += u[j] * yt[j, i]
    return g


@njit(cache=True, nogil=True)
def _axpy(g, c, row):
    for i in range(g.shape[0]):
        g[i] += c * row[i]


@njit(cache=True, nogil=True)
def _factor(yt, rs, basis, eps):
    p, n = yt.shape
    b = np.empty((n, n))
    col = np.empty(n)
    cb = np.zeros(n)
    for k in range(n):
        _column(basis[k], yt, rs, col)
        b[:, k] = col
        if basis[k] == p:
            cb[k] = -1.0
        elif basis[k] < p:
            cb[k] = -eps[basis[k]]
    binv = np.ascontiguousarray(np.linalg.inv(b))
    return binv, binv.T @ cb


@njit(cache=True, nogil=True)
def l1_simplex(yt, rs, eps, basis, u, max_iter, bland_after, feas_tol, piv_tol, refactor_every):
    """Optimize in place on ``basis``; returns ``(status, iterations, binv, w)``.

    ``yt`` is ``Y^T`` (``p x n``) and ``basis`` must contain ``p`` (``lam``)
    and index a nonsingular basis matrix. ``u`` carries the signs of the
    nonbasic ``u_j`` in and out (zero means undecided); signs only change
    where the residual is clearly nonzero, so a warm start keeps the sign
    pattern of degenerate kinks. ``eps`` shifts the kinks to
    ``y_j^T w = -eps_j`` (the objective becomes ``sum_j |y_j^T w + eps_j|``);
    small distinct shifts break the ties that make degenerate vertices stall.
    """
    p, n = yt.shape
    nvar = p + 1 + n
    is_basic = np.zeros(nvar, dtype=np.bool_)
    for k in range(n):
        is_basic[basis[k]] = True
    s = np.empty(p)
    a = np.empty(p)
    tbreak = np.empty(p)
    cand = np.empty(p, dtype=np.int64)
    col = np.empty(n)
    alpha = np.empty(n)
    binv = np.empty((n, n))
    w = np.empty(n)
    xb = np.empty(n)
    g = np.zeros(n)

    it = 0
    since = refactor_every
    status = OPTIMAL
    while True:
        if since >= refactor_every:
            binv, w = _factor(yt, rs, basis, eps)
            s = yt @ w + eps
            ztol = feas_tol * (1.0 + np.max(np.abs(s)))
            for j in range(p):
                if is_basic[j]:
                    u[j] = 0.0
                elif s[j] > ztol:
                    u[j] = 1.0
                elif s[j] < -ztol:
                    u[j] = -1.0
                elif u[j] == 0.0:
                    u[j] = 1.0
            g = _signed_sum(yt, u, is_basic)
            xb = -(binv @ g)
            since = 0

        if it >= max_iter:
            status = ITERATION_LIMIT
            break
        bland = it >= bland_after

        # leaving variable: basic u outside [-1, 1] or nonzero artificial
        r = -1
        worst = 0.0
        for k in range(n):
            v = basis[k]
            if v == p:
                continue
            bound = 1.0 if v < p else 0.0
            viol = abs(xb[k]) - bound
            if viol > feas_tol * (1.0 + bound):
                if bland:
                    if r < 0 or v < basis[r]:
                        r = k
                        worst = viol
                elif viol > worst:
                    r = k
                    worst = viol
        if r < 0:
            break
        sigma = 1.0 if xb[r] > 0.0 else -1.0

        # edge d = sigma * B^{-T} e_r; kinks where nonbasic residuals hit zero
        nc = 0
        for j in range(p):
            if is_basic[j]:
                continue
            z = 0.0
            for i in range(n):
                z += yt[j, i] * binv[r, i]
            z *= sigma
            a[j] = z
            if u[j] > 0.0 and z < -piv_tol:
                t = s[j] / (-z)
            elif u[j] < 0.0 and z > piv_tol:
                t = -s[j] / z
            else:
                continue
            tbreak[nc] = t if t > 0.0 else 0.0
            cand[nc] = j
            nc += 1
        if nc == 0:
            status = UNBOUNDED
            break

        order = np.argsort(tbreak[:nc], kind="mergesort")
        slope = -worst
        q = -1
        tstar = 0.0
        m = 0
        while m < nc:
            t0 = tbreak[order[m]]
            e = m
            while e < nc and tbreak[order[e]] <= t0 + 1e-12 * (1.0 + t0):
                e += 1
            gsum = 0.0
            for h in range(m, e):
                gsum += 2.0 * abs(a[cand[order[h]]])
            if slope + gsum >= 0.0:
                # the slope turns inside this group of coincident kinks
                best = cand[order[m]]
                for h in range(m + 1, e):
                    j = cand[order[h]]
                    if (j < best) if bland else (abs(a[j]) > abs(a[best])):
                        best = j
                acc = slope
                for h in range(m, e):
                    j = cand[order[h]]
                    if j == best:
                        continue
                    if acc + 2.0 * abs(a[j]) >= 0.0:
                        break
                    acc += 2.0 * abs(a[j])
                    u[j] = -u[j]
                    _axpy(g, 2.0 * u[j], yt[j])
                q = best
                tstar = t0
                break
            for h in range(m, e):
                j = cand[order[h]]
                u[j] = -u[j]
                _axpy(g, 2.0 * u[j], yt[j])
            slope += gsum
            m = e
        if q < 0:
            status = UNBOUNDED
            break

        it += 1
        since += 1
        for i in range(n):
            w[i] += tstar * sigma * binv[r, i]
        for j in range(p):
            if not is_basic[j]:
                s[j] += tstar * a[j]
        s[q] = 0.0
        out = basis[r]
        if out < p:
            s[out] = sigma * tstar
            u[out] = sigma
            _axpy(g, sigma, yt[out])
        _axpy(g, -u[q], yt[q])
        _column(q, yt, rs, col)
        for i in range(n):
            z = 0.0
            for k in range(n):
                z += binv[i, k] * col[k]
            alpha[i] = z
        piv = alpha[r]
        for c in range(n):
            binv[r, c] /= piv
        for i in range(n):
            if i != r and alpha[i] != 0.0:
                f = alpha[i]
                for c in range(n):
                    binv[i, c] -= f * binv[r, c]
        is_basic[out] = False
        is_basic[q] = True
        basis[r] = q
        u[q] = 0.0
        xb = -(binv @ g)

    binv, w = _factor(yt, rs, basis, eps)
    return status, it, binv, w
