"""Why random pairing (DC) fails where all pairs (DCv2) succeed.

For Bernoulli-Rademacher ``X`` with ``theta = c' ln(n) / n`` and ``p`` well
below ``n^2``, five events jointly force DC to miss the row ``j*`` of largest
support:

E1  ``X`` has full rank;
E2  consecutive columns share fewer than two support indices;
E3  no consecutive columns share index ``j*``;
E4  every column has at least ``K ln n`` nonzeros;
E5  fewer than ``K ln n`` rows attain the largest row support.

DC pairs consecutive columns after a random shuffle, so the events are
checked on the shuffled matrix.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .certify import Verdict, check_p3
from .linalg import numerical_rank
from .metrics import contains_row_up_to_scale
from .models import DictionarySpec, bernoulli_rademacher, derive_seed, gen_dictionary, is_ternary, observe
from .recovery import PairingMode, greedy_reconstruct, run_erspud

DEFAULT_K = 0.25
CSV_COLUMNS = ("trial", "n", "p", "theta", "mode", "p3_ok", "jstar_recovered", "e1", "e2", "e3", "e4", "e5")


@dataclass
class EventReport:
    e1: Verdict
    e2: Verdict
    e3: Verdict
    e4: Verdict
    e5: Verdict
    j_star: int
    k_const: float

    @property
    def all_hold(self):
        return all(bool(v) for v in (self.e1, self.e2, self.e3, self.e4, self.e5))

    def flags(self):
        return tuple(bool(v) for v in (self.e1, self.e2, self.e3, self.e4, self.e5))


def j_star(x):
    """Row of largest support; the smallest such index on ties."""
    return int(np.argmax(np.count_nonzero(x, axis=1)))


def check_events(x, theta, k_const=DEFAULT_K, rank_tol=1e-9):
    """Evaluate E1-E5 on ``x`` (columns in the order DC pairs them).

    E2 and E3 are checked for every consecutive column pair ``(i, i+1)``.
    Witnesses: E1 the rank, E2/E3 the offending column ``i``, E4 the column
    and its support, E5 the rows attaining the maximum support.
    """
    x = np.asarray(x, dtype=np.float64)
    if not is_ternary(x):
        raise ValueError("events are defined for matrices with entries in {-1, 0, 1}")
    n, p = x.shape
    thresh = k_const * math.log(n) if n > 1 else 0.0
    nz = x != 0.0
    js = j_star(x)

    rank = numerical_rank(x, rank_tol) if x.size else 0
    e1 = Verdict(rank == n, None if rank == n else rank)

    common = np.count_nonzero(nz[:, :-1] & nz[:, 1:], axis=0) if p > 1 else np.zeros(0, dtype=int)
    bad = np.flatnonzero(common >= 2)
    e2 = Verdict(True) if not bad.size else Verdict(False, int(bad[0]))

    shared = nz[js, :-1] & nz[js, 1:] if p > 1 else np.zeros(0, dtype=bool)
    bad = np.flatnonzero(shared)
    e3 = Verdict(True) if not bad.size else Verdict(False, int(bad[0]))

    col = np.count_nonzero(nz, axis=0)
    bad = np.flatnonzero(col < thresh)
    e4 = Verdict(True) if not bad.size else Verdict(False, (int(bad[0]), int(col[bad[0]])))

    rows = np.count_nonzero(nz, axis=1)
    top = np.flatnonzero(rows == rows.max()) if n else np.zeros(0, dtype=int)
    e5 = Verdict(True) if top.size < thresh else Verdict(False, tuple(int(i) for i in top))
    return EventReport(e1, e2, e3, e4, e5, js, float(k_const))


def rank_bound(n, p, theta):
    """``1 - n (1 - theta)^(p - n)``: full-rank probability lower bound."""
    return 1.0 - n * (1.0 - theta) ** (p - n)


@dataclass
class RankExperiment:
    rate: float
    bound: float
    sigma: float
    trials: int

    @property
    def ok(self):
        return self.rate >= self.bound - 3.0 * self.sigma


def rank_probability_experiment(n, p, theta, trials, seed, tol=1e-9):
    """Empirical full-rank rate of Bernoulli-Rademacher ``X`` vs the closed-form bound.

    ``sigma`` is the binomial standard deviation of the rate at the bound
    (clipped to ``[0, 1]``); ``ok`` tests ``rate >= bound - 3 sigma``.
    """
    if p <= n:
        raise ValueError("need p > n")
    full = 0
    for t in range(trials):
        x = bernoulli_rademacher(n, p, theta, derive_seed(seed, t))
        full += numerical_rank(x, tol) == n
    bound = rank_bound(n, p, theta)
    q = min(max(bound, 0.0), 1.0)
    return RankExperiment(full / trials, bound, math.sqrt(q * (1.0 - q) / trials), trials)


@dataclass
class TrialRecord:
    trial: int
    n: int
    p: int
    theta: float
    mode: str
    p3_ok: bool
    jstar_recovered: bool
    events: tuple
    jstar_in_pool: bool = False
    p3_uncapped: bool = False
    status: str = ""

    def row(self):
        return (self.trial, self.n, self.p, self.theta, self.mode, self.p3_ok, self.jstar_recovered, *self.events)


@dataclass
class DemoSummary:
    records: list = field(default_factory=list)

    def by_mode(self, mode):
        return [r for r in self.records if r.mode == mode]

    def rate(self, mode, attr):
        rs = self.by_mode(mode)
        return sum(bool(getattr(r, attr)) for r in rs) / len(rs) if rs else math.nan

    def misses(self, mode):
        return sum(not r.jstar_recovered for r in self.by_mode(mode))


def dc_trial(n, p, theta, trial, seed, k_const=DEFAULT_K, workers=1, max_pairs=None):
    """One paired trial: the same ``(A, X)`` under DC and DCv2."""
    tseed = derive_seed(seed, trial)
    x = bernoulli_rademacher(n, p, theta, tseed)
    a = gen_dictionary(DictionarySpec(n, "random_gaussian_invertible", tseed))
    y = observe(a, x)
    dc = PairingMode.random_pairing(tseed)
    ev = check_events(x[:, dc.order(p)], theta, k_const)
    js = ev.j_star
    out = []
    for mode in (dc, PairingMode.all_pairs()):
        cands = run_erspud(y, mode, workers=workers, max_pairs=None if mode is dc else max_pairs)
        res = greedy_reconstruct(cands, y)
        pool = np.array([c.s for c in cands if not c.degenerate]).reshape(-1, p)
        # candidates s = z^T X live in the row space of X
        recovered = contains_row_up_to_scale(res.x_rec, x[js]) if len(res.x_rec) else False
        out.append(TrialRecord(
            trial=trial, n=n, p=p, theta=theta, mode=mode.mode,
            p3_ok=bool(check_p3(x, theta, mode)),
            jstar_recovered=bool(recovered),
            events=ev.flags(),
            jstar_in_pool=bool(contains_row_up_to_scale(pool, x[js])),
            p3_uncapped=bool(check_p3(x, theta, mode, cap=math.inf)),
            status=res.status,
        ))
    return out


def dc_failure_demo(n, p, c_prime, trials, seed, k_const=DEFAULT_K, workers=1, max_pairs=None):
    """Paired DC / DCv2 trials at ``theta = c_prime ln(n) / n``.

    Each trial draws Bernoulli-Rademacher ``X`` and a Gaussian ``A``, runs
    both variants with Greedy and records whether row ``j*`` was recovered,
    the P3 verdict of each pairing and the events E1-E5.
    """
    if p < 2 * n:
        raise ValueError(f"need p >= 2n, got n={n}, p={p}")
    theta = c_prime * math.log(n) / n
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta = {theta} outside (0, 1]")

    def one(t):
        return dc_trial(n, p, theta, t, seed, k_const, 1, max_pairs)

    if workers <= 1:
        parts = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(trials)))
    return DemoSummary([r for part in parts for r in part])
