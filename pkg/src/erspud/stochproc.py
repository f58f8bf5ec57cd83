"""Deviation of ``||Pi v||_1`` from its mean for Bernoulli-Rademacher ``Pi``.

For ``Pi`` with i.i.d. rows ``pi`` (entries 0 with probability ``1 - theta``
and +-1 with probability ``theta / 2`` each), ``E ||Pi v||_1 = m E|<pi, v>|``
and the lower bound ``mu_min = m sqrt(theta / n)`` holds over the unit l1
sphere.
"""

import math
from dataclasses import dataclass

import numpy as np

from .certify import random_unit_l1
from .linalg import as_matrix

MAX_EXACT_DIM = 14


@dataclass
class DeviationStat:
    """Sampled lower bound on ``sup_v | ||Pi v||_1 - E ||Pi v||_1 |`` over ``B_1``.

    ``min_expected`` is the smallest ``E ||Pi v||_1`` among the test vectors
    and ``expectation_error`` the standard error of the expectations (0 when
    they are exact).
    """

    sup_estimate: float
    mu_min: float
    ratio: float
    samples_used: int
    vertex_max: float
    min_expected: float = math.nan
    expectation_error: float = 0.0


def mu_min(m, n, theta):
    """``m sqrt(theta / n)``."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    return m * math.sqrt(theta / n)


def _half_distribution(v, theta):
    """Support and probabilities of ``<pi, v>`` over the coordinates of ``v``."""
    vals = np.zeros(1)
    probs = np.ones(1)
    for c in v:
        vals = np.concatenate([vals, vals + c, vals - c])
        probs = np.concatenate([probs * (1.0 - theta), probs * (theta / 2.0), probs * (theta / 2.0)])
    return vals, probs


def exact_expected_abs_inner(v, theta, dist="rademacher"):
    """Exact ``E |<pi, v>|`` for a Bernoulli-Rademacher vector ``pi``.

    Sums over all ``3^n`` sign/zero patterns. The two halves of ``v`` are
    enumerated separately and combined with sorting and prefix sums, which
    gives the same sum in ``O(3^(n/2) log)`` time.
    """
    if dist != "rademacher":
        raise ValueError(f"exact enumeration supports only rademacher, got {dist!r}")
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size > MAX_EXACT_DIM:
        raise ValueError(f"exact enumeration limited to length {MAX_EXACT_DIM}, got {v.size}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    h = v.size // 2
    a_val, a_p = _half_distribution(v[:h], theta)
    b_val, b_p = _half_distribution(v[h:], theta)
    order = np.argsort(b_val)
    b_val, b_p = b_val[order], b_p[order]
    cum_p = np.concatenate([[0.0], np.cumsum(b_p)])
    cum_pv = np.concatenate([[0.0], np.cumsum(b_p * b_val)])
    tot_p, tot_pv = cum_p[-1], cum_pv[-1]
    # |a + b| = (a + b) for b >= -a and -(a + b) below
    k = np.searchsorted(b_val, -a_val, side="left")
    lo_p, lo_pv = cum_p[k], cum_pv[k]
    hi_p, hi_pv = tot_p - lo_p, tot_pv - lo_pv
    per_a = a_val * (hi_p - lo_p) + (hi_pv - lo_pv)
    return float(np.dot(a_p, per_a))


def rademacher_matrix(m, n, theta, rng):
    mask = rng.random((m, n)) < theta
    signs = np.where(rng.random((m, n)) < 0.5, 1.0, -1.0)
    return np.where(mask, signs, 0.0)


def test_vectors(n, n_samples, seed):
    """Coordinate vertices ``+-e_i`` followed by ``n_samples`` random unit-l1 vectors.

    The random part depends only on ``(seed, n)``, so sample sets for a
    larger ``n_samples`` extend smaller ones.
    """
    mag_rng, sign_rng = (np.random.Generator(np.random.Philox(s))
                         for s in np.random.SeedSequence([int(seed) & (2**64 - 1), 0x5E7, n]).spawn(2))
    eye = np.eye(n)
    rand = random_unit_l1(mag_rng, n_samples, n, sign_rng) if n_samples else np.zeros((0, n))
    return np.vstack([eye, -eye, rand])


def expected_norms(vectors, m, theta, mc_draws=0, seed=0):
    """``E ||Pi v||_1`` per row of ``vectors`` and its standard error.

    Exact (``m E|<pi, v>|``) for dimension up to 14; otherwise Monte Carlo
    over ``mc_draws`` fresh rows ``pi``.
    """
    n = vectors.shape[1]
    if n <= MAX_EXACT_DIM and mc_draws == 0:
        e = np.array([m * exact_expected_abs_inner(v, theta) for v in vectors])
        return e, 0.0
    draws = mc_draws or 100_000
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), 0x3C])))
    rows = rademacher_matrix(draws, n, theta, rng)
    vals = np.abs(rows @ vectors.T)
    se = float(np.max(vals.std(axis=0, ddof=1)) / math.sqrt(draws)) * m
    return m * vals.mean(axis=0), se


def estimate_sup_deviation(pi, theta, n_samples, seed=0, mc_draws=0):
    """Lower-bound estimate of the sup deviation over the l1 ball.

    The test set is ``{+-e_i}`` plus ``n_samples`` random unit-l1 vectors;
    each ``|  ||Pi v||_1 - E ||Pi v||_1 |`` is evaluated and the maximum is
    reported. For a fixed seed the test sets are nested in ``n_samples``.
    """
    pi = as_matrix(pi)
    m, n = pi.shape
    vecs = test_vectors(n, n_samples, seed)
    if theta == 0.0:
        exp, se = np.zeros(len(vecs)), 0.0
    else:
        exp, se = expected_norms(vecs, m, theta, mc_draws, seed)
    dev = np.abs(np.abs(pi @ vecs.T).sum(axis=0) - exp)
    vmax = float(np.max(dev[: 2 * n]))
    sup = float(np.max(dev))
    mmin = mu_min(m, n, theta) if theta > 0 else 0.0
    ratio = sup / mmin if mmin > 0 else (0.0 if sup == 0 else math.inf)
    return DeviationStat(sup, mmin, ratio, len(vecs), vmax, float(np.min(exp)), se)
