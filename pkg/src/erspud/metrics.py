"""Recovery verification up to row permutation and scaling."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import DimensionError, as_matrix

DEFAULT_TOL = 1e-6


@dataclass
class MatchResult:
    """``x_cand[i] ~= scales[i] * x_ref[permutation[i]]`` for every row ``i``.

    ``permutation[i]`` is -1 for a candidate row without a usable match.
    """

    matched: bool
    permutation: np.ndarray
    scales: np.ndarray
    max_rel_error: float
    unmatched_rows: list = field(default_factory=list)


def _cosines(x_ref, x_cand):
    nr = np.linalg.norm(x_ref, axis=1)
    nc = np.linalg.norm(x_cand, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = (x_cand @ x_ref.T) / np.outer(nc, nr)
    return np.nan_to_num(c, nan=0.0, posinf=0.0, neginf=0.0)


def match_rows_up_to_scale(x_ref, x_cand, tol=DEFAULT_TOL):
    """Greedy ``|cosine|`` matching of candidate rows to reference rows.

    Each candidate row claims the reference row of largest ``|cosine|``;
    two claims on one reference row leave both candidates unmatched. The
    scale maps the reference entry at the candidate's largest-magnitude
    position onto that entry exactly, and the error of row ``i`` is
    ``||c_i - scale_i * ref||_inf / ||c_i||_inf``.
    """
    x_ref = as_matrix(x_ref)
    x_cand = as_matrix(x_cand)
    if x_ref.shape != x_cand.shape:
        raise DimensionError(f"shape mismatch: {x_ref.shape} vs {x_cand.shape}")
    k = x_cand.shape[0]
    perm = np.full(k, -1, dtype=np.int64)
    scales = np.zeros(k)
    errors = np.full(k, np.inf)
    if k == 0:
        return MatchResult(True, perm, scales, 0.0, [])

    cos = np.abs(_cosines(x_ref, x_cand))
    claim = np.argmax(cos, axis=1)
    unmatched = []
    for i in range(k):
        c = x_cand[i]
        top = np.max(np.abs(c))
        if top == 0.0 or cos[i, claim[i]] == 0.0:
            unmatched.append(i)
            continue
        m = int(np.argmax(np.abs(c)))
        ref = x_ref[claim[i]]
        if ref[m] == 0.0:
            unmatched.append(i)
            continue
        scales[i] = c[m] / ref[m]
        errors[i] = np.max(np.abs(c - scales[i] * ref)) / top
        perm[i] = claim[i]

    owners = {}
    for i in range(k):
        if perm[i] >= 0:
            owners.setdefault(int(perm[i]), []).append(i)
    for rows in owners.values():
        if len(rows) > 1:
            unmatched.extend(rows)
            perm[rows] = -1
    unmatched = sorted(set(unmatched))

    ok = [i for i in range(k) if perm[i] >= 0]
    max_err = float(np.max(errors)) if not unmatched else np.inf
    matched = not unmatched and bool(np.all(errors[ok] <= tol))
    return MatchResult(matched, perm, scales, max_err, unmatched)


def dictionary_error(a_ref, a_cand, permutation, scales):
    """Largest relative column error after undoing the alignment.

    With ``X' = Pi D X`` the recovered dictionary satisfies
    ``a_cand[:, i] * scales[i] = a_ref[:, permutation[i]]``. Returns ``inf``
    for an unusable alignment instead of raising.
    """
    a_ref = as_matrix(a_ref)
    a_cand = as_matrix(a_cand)
    perm = np.asarray(permutation, dtype=np.int64)
    scales = np.asarray(scales, dtype=np.float64)
    n = a_ref.shape[1]
    if a_ref.shape != a_cand.shape or perm.shape != (n,) or scales.shape != (n,):
        return np.inf
    if np.any(perm < 0) or np.any(perm >= n):
        return np.inf
    worst = 0.0
    for i in range(n):
        ref = a_ref[:, perm[i]]
        denom = np.max(np.abs(ref))
        diff = np.max(np.abs(a_cand[:, i] * scales[i] - ref))
        worst = max(worst, diff / denom if denom > 0 else (np.inf if diff > 0 else 0.0))
    return float(worst)


def contains_row_up_to_scale(rows, target, tol=DEFAULT_TOL):
    """Whether some row of ``rows`` equals a nonzero multiple of ``target``.

    Uses the same anchored scale and relative l-inf error as
    :func:`match_rows_up_to_scale`.
    """
    target = np.asarray(target, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.float64).reshape(-1, target.size)
    for c in rows:
        top = np.max(np.abs(c), initial=0.0)
        if top == 0.0:
            continue
        m = int(np.argmax(np.abs(c)))
        if target[m] == 0.0:
            continue
        s = c[m] / target[m]
        if np.max(np.abs(c - s * target)) <= tol * top:
            return True
    return False
