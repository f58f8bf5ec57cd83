"""Checkers for the deterministic conditions under which ER-SpUD recovers X.

Conditions are evaluated on a coefficient matrix ``X`` (``n x p``):

* P0: every row has ``0 < |supp| <= (10/9) theta p`` and every combination of
  at least two rows has support ``>= (11/9) theta p``.
* P1 (behavioral): for a pair sum ``b`` with ``|J| <= 1/(8 theta)`` the
  program ``min ||z^T X||_1 s.t. b^T z = 1`` has ``supp(z*)`` inside ``J``.
* P1': a margin inequality over ``v`` on the rows outside ``J`` (sampled).
* P2': the program restricted to rows ``J`` has a unique, 1-sparse optimum on
  the largest entry of ``b``.
* P3: every row index is the unique largest entry of some admissible pair
  sum of the pairing mode.

Every failed verdict carries a witness that can be re-checked on ``X``.
"""

import ast
import math
from dataclasses import dataclass, field

import numpy as np

from .l1lp import LpStatus, is_unique_minimizer, solve_l1
from .linalg import as_matrix
from .recovery import PairingMode

SUPPORT_TOL = 1e-6
P1_PRIME_C = 1.0 / 16.0
SUFFICIENT_EPS = 1.0 / 8.0
SUFFICIENT_ALPHA = 1.0 / 8.0
SUFFICIENT_BETA = 7.0 / 8.0
RATIO_MAX = 0.5


class RegimeError(ValueError):
    """A pair sum lies outside the regime in which a condition is stated."""


@dataclass
class Verdict:
    ok: bool
    witness: object = None
    note: str = ""

    def __bool__(self):
        return bool(self.ok)


def sparsity_cap(theta):
    """``q = 1/(8 theta)``, the largest admissible pair-sum support."""
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    return 1.0 / (8.0 * theta)


def is_integral(x):
    return bool(np.all(x == np.round(x)))


def support_mask(v, integral, tol=SUPPORT_TOL):
    """Nonzero pattern: exact for integer data, else relative to ``max |v|``."""
    v = np.asarray(v, dtype=np.float64)
    if integral:
        return v != 0.0
    top = np.max(np.abs(v), axis=-1, keepdims=True) if v.size else 0.0
    return np.abs(v) > tol * top


@dataclass
class PairSum:
    b: np.ndarray
    j1: int
    j2: int
    support: tuple
    ratio: float
    argmax: int

    @property
    def size(self):
        return len(self.support)


def pair_sum(x, j1, j2, tol=SUPPORT_TOL, integral=None):
    """``b = X e_j1 + X e_j2`` with its support, top-two ratio and argmax.

    The ratio is ``|b|_(2) / |b|_(1)``; it is 0 for a single nonzero entry
    and ``nan`` for ``b = 0``.
    """
    x = as_matrix(x)
    if integral is None:
        integral = is_integral(x)
    b = x[:, j1] + x[:, j2]
    mask = support_mask(b, integral, tol)
    support = tuple(int(i) for i in np.flatnonzero(mask))
    mags = np.sort(np.abs(b[mask]))[::-1]
    if mags.size == 0:
        ratio, top = math.nan, -1
    else:
        ratio = float(mags[1] / mags[0]) if mags.size > 1 else 0.0
        top = int(np.argmax(np.abs(b)))
    return PairSum(b, int(j1), int(j2), support, ratio, top)


# ---------------------------------------------------------------- P0

def _combo_support(x, rows, coeffs, tol=SUPPORT_TOL):
    # coefficients are floats, so exact zeros cannot be relied on
    v = np.asarray(coeffs, dtype=np.float64) @ x[list(rows)]
    return int(np.count_nonzero(support_mask(v, False, tol)))


def _pair_min_support(xi, xj, integral):
    """Exact ``min_{c1, c2 != 0} |supp(c1 x_i + c2 x_j)|`` and a minimizing ratio.

    A combination ``c x_i + x_j`` loses exactly the columns of the common
    support where ``c = -x_j / x_i``, so the minimum follows from the most
    frequent cancellation ratio.
    """
    si, sj = xi != 0.0, xj != 0.0
    union = int(np.count_nonzero(si | sj))
    both = si & sj
    if not np.any(both):
        return union, 1.0
    ratios = np.sort(-xj[both] / xi[both])
    if integral:
        vals, counts = np.unique(ratios, return_counts=True)
    else:
        # group ratios equal up to rounding
        brk = np.flatnonzero(np.diff(ratios) > 1e-9 * (1.0 + np.abs(ratios[1:])))
        starts = np.concatenate([[0], brk + 1])
        counts = np.diff(np.concatenate([starts, [ratios.size]]))
        vals = ratios[starts]
    k = int(np.argmax(counts))
    return union - int(counts[k]), float(vals[k])


def check_p0(x, theta, n_subsets=2000, draws=2000, seed=0, tol=SUPPORT_TOL):
    """(P0) with the exact pair clause and a randomized clause for 3+ rows.

    Subsets of three or more rows are sampled ``n_subsets`` times; each gets
    ``draws`` coefficient vectors with all entries nonzero, half of them
    small random integers and half chosen to cancel ``k - 1`` columns of the
    subset's joint support. A reported violation is always genuine; a pass
    of the 3+ clause is evidence only.

    Witness: ``("row", i, support)`` or ``("combo", rows, coeffs, support)``.
    """
    x = as_matrix(x)
    n, p = x.shape
    integral = is_integral(x)
    upper = (10.0 / 9.0) * theta * p
    lower = (11.0 / 9.0) * theta * p
    sizes = np.count_nonzero(support_mask(x, integral, tol), axis=1)
    for i in range(n):
        if not 0 < sizes[i] <= upper:
            return Verdict(False, ("row", i, int(sizes[i])), "row support outside (0, 10/9 theta p]")

    xs = np.where(support_mask(x, integral, tol), x, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            size, c = _pair_min_support(xs[i], xs[j], integral)
            if size < lower:
                return Verdict(False, ("combo", (i, j), (c, 1.0), size), "two-row combination too sparse")

    if n >= 3 and n_subsets > 0:
        hit = _sampled_combinations(xs, lower, n_subsets, draws, seed, tol)
        if hit is not None:
            return Verdict(False, hit, "sampled combination too sparse")
    return Verdict(True)


def _sampled_combinations(xs, lower, n_subsets, draws, seed, tol):
    n, p = xs.shape
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xC0B0])))
    for _ in range(n_subsets):
        k = int(rng.integers(3, n + 1))
        rows = np.sort(rng.choice(n, size=k, replace=False))
        sub = xs[rows]
        half = draws // 2
        ints = rng.integers(1, 4, size=(draws - half, k)) * rng.choice([-1.0, 1.0], size=(draws - half, k))
        coeffs = [ints.astype(np.float64)]
        union = np.flatnonzero(np.any(sub != 0.0, axis=0))
        if union.size >= k - 1 and half:
            # repeated picks only make a draw less targeted
            picks = rng.integers(0, union.size, size=(half, k - 1))
            blocks = np.transpose(sub[:, union[picks]], (1, 2, 0))  # (half, k-1, k)
            null = np.linalg.svd(blocks)[2][:, -1, :]
            coeffs.append(null)
        c = np.vstack(coeffs)
        keep = np.all(np.abs(c) > 1e-9 * np.max(np.abs(c), axis=1, keepdims=True), axis=1)
        c = c[keep]
        if not c.size:
            continue
        counts = np.count_nonzero(support_mask(c @ sub, False, tol), axis=1)
        bad = np.flatnonzero(counts < lower)
        if bad.size:
            m = int(bad[0])
            return ("combo", tuple(int(r) for r in rows), tuple(float(v) for v in c[m]), int(counts[m]))
    return None


def p0_witness_violates(x, theta, witness, tol=SUPPORT_TOL):
    """Re-check a P0 witness against ``x``."""
    x = as_matrix(x)
    n, p = x.shape
    integral = is_integral(x)
    if witness[0] == "row":
        size = int(np.count_nonzero(support_mask(x[witness[1]], integral, tol)))
        return not 0 < size <= (10.0 / 9.0) * theta * p
    _, rows, coeffs, _ = witness
    return _combo_support(np.where(support_mask(x, integral, tol), x, 0.0), rows, coeffs, tol) < (11.0 / 9.0) * theta * p


# ---------------------------------------------------------------- P1 / P1'

def check_p1_behavioral(x, b, theta, tol=SUPPORT_TOL):
    """Solve ``min ||z^T X||_1 s.t. b^T z = 1``; pass iff ``supp(z*)`` is inside ``J``.

    Raises :class:`RegimeError` when ``|J| > 1/(8 theta)``. The LP status is
    returned in ``note`` (a ``TieDegenerate`` optimum is still judged by the
    returned minimizer). Witness: ``(j1, j2, indices outside J)``.
    """
    x = as_matrix(x)
    if b.size > sparsity_cap(theta):
        raise RegimeError(f"|J| = {b.size} exceeds 1/(8 theta) = {sparsity_cap(theta):.4g}")
    if b.size == 0:
        raise RegimeError("pair sum is zero")
    sol = solve_l1(x, b.b)
    z = sol.w
    outside = [int(i) for i in np.flatnonzero(np.abs(z) > tol * np.max(np.abs(z))) if i not in b.support]
    if outside:
        return Verdict(False, (b.j1, b.j2, tuple(outside)), sol.status.value)
    return Verdict(True, None, sol.status.value)


def columns_touching(x, support, integral=None, tol=SUPPORT_TOL):
    """``S``: columns whose support meets the row set ``support``."""
    x = as_matrix(x)
    if integral is None:
        integral = is_integral(x)
    if not support:
        return np.zeros(0, dtype=np.int64)
    mask = support_mask(x.T, integral, tol).T
    return np.flatnonzero(np.any(mask[list(support)], axis=0))


def random_unit_l1(rng, count, dim, sign_rng=None):
    """Symmetric-Dirichlet magnitudes with independent signs (rows sum to 1 in l1).

    Magnitudes are normalized exponentials drawn row by row, so with a
    separate ``sign_rng`` the first ``k`` rows do not depend on ``count``.
    """
    e = rng.standard_exponential((count, dim))
    mags = e / e.sum(axis=1, keepdims=True)
    signs = (sign_rng or rng).random((count, dim)) < 0.5
    return np.where(signs, -mags, mags)


def p1_prime_margin(x, b, theta, s_cols=None, c_const=P1_PRIME_C, samples=1000, seed=0):
    """Smallest sampled value of the P1' margin for the pair sum ``b``.

    ``f(v) = ||v^T X_{Jbar,*}||_1 - 2 ||v^T X_{Jbar,S}||_1 - C p sqrt(theta/|Jbar|) ||v||_1``
    over the coordinate vertices of the l1 ball on ``Jbar`` and ``samples``
    random unit-l1 vectors. ``-inf`` when ``|S| >= p/4`` (or ``Jbar`` is
    empty). Negative values refute P1'; positive ones are evidence only.

    Returns
    -------
    margin : float
    s_cols : ndarray
        The columns ``S`` used.
    """
    x = as_matrix(x)
    n, p = x.shape
    if s_cols is None:
        s_cols = columns_touching(x, b.support)
    s_cols = np.asarray(s_cols, dtype=np.int64)
    jbar = np.setdiff1d(np.arange(n), np.asarray(b.support, dtype=np.int64))
    if s_cols.size >= p / 4.0 or jbar.size == 0:
        return -math.inf, s_cols
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xF1])))
    v = np.vstack([np.eye(jbar.size), random_unit_l1(rng, samples, jbar.size)])
    xj = x[jbar]
    full = np.abs(v @ xj).sum(axis=1)
    part = np.abs(v @ xj[:, s_cols]).sum(axis=1)
    const = c_const * p * math.sqrt(theta / jbar.size)
    f = full - 2.0 * part - const * np.abs(v).sum(axis=1)
    return float(np.min(f)), s_cols


# ---------------------------------------------------------------- P2'

def check_p2_prime(x, b, theta, tol=SUPPORT_TOL, max_subsets=200_000):
    """Restricted program on rows ``J``: unique, 1-sparse, on the largest entry.

    Raises :class:`RegimeError` unless ``0 < |J| <= 1/(8 theta)`` and the top
    two magnitudes of ``b`` have ratio at most 1/2. Uniqueness is decided
    exactly by :func:`is_unique_minimizer`; above its enumeration budget the
    simplex tie probe decides. Witness: ``(j1, j2, reason)``.
    """
    x = as_matrix(x)
    if not 0 < b.size <= sparsity_cap(theta):
        raise RegimeError(f"|J| = {b.size} outside (0, 1/(8 theta)]")
    if not b.ratio <= RATIO_MAX:
        raise RegimeError(f"top-two ratio {b.ratio:.4g} exceeds 1/2")
    rows = list(b.support)
    xj = x[rows]
    bj = b.b[rows]
    sol = solve_l1(xj, bj, detect_ties=True)
    z = sol.w
    supp = np.flatnonzero(np.abs(z) > tol * np.max(np.abs(z)))
    top = rows.index(b.argmax)
    if supp.size != 1 or supp[0] != top:
        return Verdict(False, (b.j1, b.j2, "optimum not 1-sparse on the largest entry"), sol.status.value)
    unique = is_unique_minimizer(xj, bj, z, max_subsets=max_subsets)
    if unique is None:
        unique = sol.status is LpStatus.OPTIMAL
    if not unique:
        return Verdict(False, (b.j1, b.j2, "optimum not unique"), sol.status.value)
    return Verdict(True, None, sol.status.value)


# ---------------------------------------------------------------- sufficient inequalities

def all_pair_sums(x, mode=None, tol=SUPPORT_TOL):
    x = as_matrix(x)
    mode = mode or PairingMode.all_pairs()
    integral = is_integral(x)
    return [pair_sum(x, j1, j2, tol, integral) for j1, j2 in mode.pairs(x.shape[1])]


def check_sufficient_ineqs(x, theta, mu, eps=SUFFICIENT_EPS, alpha=SUFFICIENT_ALPHA,
                           beta=SUFFICIENT_BETA, pairs=None, tol=SUPPORT_TOL):
    """Row-norm inequalities sufficient for P2'.

    Returns three verdicts:

    1. ``max_i ||X_i||_1 <= (1 + eps) mu theta p``;
    2. for every ``j``, rows other than ``j`` restricted to the columns where
       row ``j`` is nonzero have l1 norm ``<= alpha mu theta p``;
    3. for every pair-sum support ``J`` and ``j`` in ``J``,
       ``||X_{j, Omega}||_1 >= beta mu theta p`` with ``Omega`` the columns
       where row ``j`` is nonzero and the other rows of ``J`` vanish.

    ``pairs`` defaults to all pair sums of ``x``.
    """
    x = as_matrix(x)
    n, p = x.shape
    integral = is_integral(x)
    nz = support_mask(x, integral, tol)
    ax = np.abs(np.where(nz, x, 0.0))
    scale = mu * theta * p

    rows = ax.sum(axis=1)
    i = int(np.argmax(rows)) if n else 0
    first = Verdict(True) if not n or rows[i] <= (1.0 + eps) * scale else Verdict(False, ("row", i, float(rows[i])))

    second = Verdict(True)
    for j in range(n):
        sub = ax[:, nz[j]].sum(axis=1)
        sub[j] = 0.0
        k = int(np.argmax(sub))
        if sub[k] > alpha * scale:
            second = Verdict(False, ("row", j, k, float(sub[k])))
            break

    if pairs is None:
        pairs = all_pair_sums(x, tol=tol)
    third = Verdict(True)
    seen = set()
    for b in pairs:
        key = b.support
        if not key or key in seen:
            continue
        seen.add(key)
        jset = list(key)
        for j in jset:
            others = [k for k in jset if k != j]
            omega = nz[j] & ~np.any(nz[others], axis=0) if others else nz[j]
            val = float(ax[j, omega].sum())
            if val < beta * scale:
                third = Verdict(False, ("support", key, j, val))
                break
        if not third.ok:
            break
    return first, second, third


# ---------------------------------------------------------------- P3

def scan_pair_sums(x, pairs, tol=SUPPORT_TOL, chunk=8192):
    """Vectorized support size, top-two ratio and argmax for many pair sums."""
    x = as_matrix(x)
    integral = is_integral(x)
    k = len(pairs)
    size = np.empty(k, dtype=np.int64)
    ratio = np.empty(k)
    top = np.empty(k, dtype=np.int64)
    for s in range(0, k, chunk):
        pr = pairs[s:s + chunk]
        b = (x[:, pr[:, 0]] + x[:, pr[:, 1]]).T
        mask = support_mask(b, integral, tol)
        mag = np.where(mask, np.abs(b), 0.0)
        size[s:s + chunk] = mask.sum(axis=1)
        if mag.shape[1] >= 2:
            two = -np.partition(-mag, 1, axis=1)[:, :2]
        else:
            two = np.column_stack([mag[:, 0], np.zeros(len(mag))])
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio[s:s + chunk] = np.where(two[:, 0] > 0, two[:, 1] / np.where(two[:, 0] > 0, two[:, 0], 1.0), np.nan)
        top[s:s + chunk] = np.argmax(mag, axis=1)
    return size, ratio, top


def check_p3(x, theta, mode=None, cap=None, tol=SUPPORT_TOL):
    """Every row index must be the unique largest entry of an admissible pair sum.

    A pair sum of ``mode`` is admissible when ``0 < |J| <= cap`` (default
    ``1/(8 theta)``) and its top-two ratio is at most 1/2. Witness: tuple of
    unserved indices. ``note`` records the first serving pair per index.
    """
    x = as_matrix(x)
    n, p = x.shape
    mode = mode or PairingMode.all_pairs()
    cap = sparsity_cap(theta) if cap is None else cap
    pairs = mode.pairs(p) if p >= 2 else np.zeros((0, 2), dtype=np.int64)
    size, ratio, top = scan_pair_sums(x, pairs, tol)
    ok = (size > 0) & (size <= cap) & (ratio <= RATIO_MAX)
    served = {}
    for k in np.flatnonzero(ok):
        served.setdefault(int(top[k]), (int(pairs[k, 0]), int(pairs[k, 1])))
    missing = tuple(i for i in range(n) if i not in served)
    note = ";".join(f"{i}:{served[i][0]}-{served[i][1]}" for i in sorted(served))
    if missing:
        return Verdict(False, missing, note)
    return Verdict(True, None, note)


def p3_witness_violates(x, theta, mode, witness, cap=None, tol=SUPPORT_TOL):
    """True iff no admissible pair sum of ``mode`` has its argmax at any witness index."""
    res = check_p3(x, theta, mode, cap, tol)
    return all(i in (res.witness or ()) for i in witness)


# ---------------------------------------------------------------- report

@dataclass
class ConditionReport:
    p0: Verdict
    p1_behavioral: Verdict
    p2_prime: Verdict
    p3: Verdict
    p1_prime_margin: float
    sufficient_ineq: tuple
    regime_pairs: int = 0
    mode: str = "AllPairs"

    @property
    def all_hold(self):
        return bool(self.p0 and self.p1_behavioral and self.p2_prime and self.p3)

    def to_text(self):
        lines = [f"mode = {self.mode}", f"regime_pairs = {self.regime_pairs}"]
        for name in ("p0", "p1_behavioral", "p2_prime", "p3"):
            v = getattr(self, name)
            lines.append(f"{name} = {v.ok}")
            lines.append(f"{name}.witness = {v.witness!r}")
            lines.append(f"{name}.note = {v.note!r}")
        lines.append(f"p1_prime_margin = {self.p1_prime_margin!r}")
        for k, v in enumerate(self.sufficient_ineq, start=1):
            lines.append(f"sufficient_{k} = {v.ok}")
            lines.append(f"sufficient_{k}.witness = {v.witness!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kv = {}
        for line in text.splitlines():
            if line.strip() and not line.lstrip().startswith("#"):
                key, _, val = line.partition(" = ")
                kv[key.strip()] = val

        def verdict(name):
            note = ast.literal_eval(kv.get(f"{name}.note", "''"))
            return Verdict(kv[name] == "True", ast.literal_eval(kv[f"{name}.witness"]), note)

        margin = float(kv["p1_prime_margin"])
        suff = tuple(verdict(f"sufficient_{k}") for k in (1, 2, 3))
        return cls(verdict("p0"), verdict("p1_behavioral"), verdict("p2_prime"), verdict("p3"),
                   float(margin), suff, int(kv["regime_pairs"]), kv["mode"])


def certify(x, theta, mu, mode=None, p0_subsets=2000, p0_draws=2000, margin_pairs=20,
            margin_samples=200, c_const=P1_PRIME_C, seed=0, tol=SUPPORT_TOL):
    """Evaluate every condition on ``x``.

    P1 and P2' are checked on every pair sum of ``mode`` inside their regime
    (no such pair sum makes them hold vacuously); the P1' margin is the
    minimum over the first ``margin_pairs`` of those.
    """
    x = as_matrix(x)
    mode = mode or PairingMode.all_pairs()
    integral = is_integral(x)
    cap = sparsity_cap(theta)
    p = x.shape[1]
    pairs = mode.pairs(p) if p >= 2 else np.zeros((0, 2), dtype=np.int64)
    size, ratio, _ = scan_pair_sums(x, pairs, tol)
    regime = np.flatnonzero((size > 0) & (size <= cap))

    p1 = Verdict(True)
    p2 = Verdict(True)
    margin = math.inf
    for count, k in enumerate(regime):
        b = pair_sum(x, pairs[k, 0], pairs[k, 1], tol, integral)
        if p1.ok:
            p1 = check_p1_behavioral(x, b, theta, tol)
        if p2.ok and ratio[k] <= RATIO_MAX:
            p2 = check_p2_prime(x, b, theta, tol)
        if count < margin_pairs:
            m, _ = p1_prime_margin(x, b, theta, c_const=c_const, samples=margin_samples, seed=seed + count)
            margin = min(margin, m)
    suff = check_sufficient_ineqs(x, theta, mu, tol=tol)
    return ConditionReport(
        p0=check_p0(x, theta, p0_subsets, p0_draws, seed, tol),
        p1_behavioral=p1,
        p2_prime=p2,
        p3=check_p3(x, theta, mode, tol=tol),
        p1_prime_margin=float(margin),
        sufficient_ineq=suff,
        regime_pairs=int(regime.size),
        mode=str(mode),
    )
