"""ER-SpUD candidate generation (DC and DCv2) and the Greedy reconstruction.

Every column pair ``(j1, j2)`` yields one linear program

    minimize ||w^T Y||_1  subject to  (Y e_j1 + Y e_j2)^T w = 1,

whose optimal row ``s = w^T Y`` is a candidate for a scaled row of ``X``.
DCv2 solves all ``C(p, 2)`` pairs, DC a single random perfect matching.
Greedy then keeps the sparsest candidates that increase the rank.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .l1lp import LpStatus, solve_l1
from .linalg import SingularMatrixError, as_matrix, numerical_rank, solve_linear

SUPPORT_TOL = 1e-6
DEDUP_GRID = 1e-8
RANK_TOL = 1e-9

ALL_PAIRS = "AllPairs"
RANDOM_PAIRING = "RandomPairing"

_PAIRING_STREAM = 0x9A1E
_BUDGET_STREAM = 0xB0D6


class RecoveryStatus:
    SUCCESS = "Success"
    RANK_DEFICIT = "RankDeficit"
    DEGENERATE = "Degenerate"


def _rng(seed, stream):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), stream])))


@dataclass(frozen=True)
class PairingMode:
    """Which column pairs are turned into linear programs.

    ``AllPairs`` (DCv2) enumerates every pair ``j1 < j2`` in lexicographic
    order. ``RandomPairing`` (DC) shuffles the columns with ``seed`` and pairs
    consecutive entries of the shuffle; an odd leftover column is unused.
    """

    mode: str = ALL_PAIRS
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (ALL_PAIRS, RANDOM_PAIRING):
            raise ValueError(f"unknown pairing mode {self.mode!r}")

    @classmethod
    def all_pairs(cls):
        return cls(ALL_PAIRS)

    @classmethod
    def random_pairing(cls, seed):
        return cls(RANDOM_PAIRING, int(seed))

    @property
    def is_all(self):
        return self.mode == ALL_PAIRS

    def order(self, p):
        """Column order whose consecutive entries form the random pairing."""
        return _rng(self.seed, _PAIRING_STREAM).permutation(p)

    def pairs(self, p):
        """``(k, 2)`` integer array of pairs with ``j1 < j2`` in each row."""
        if p < 2:
            raise ValueError(f"need at least two columns, got p={p}")
        if self.is_all:
            j1, j2 = np.triu_indices(p, k=1)
            return np.column_stack([j1, j2]).astype(np.int64)
        perm = self.order(p)[: 2 * (p // 2)].reshape(-1, 2)
        return np.sort(perm, axis=1).astype(np.int64)

    def __str__(self):
        return self.mode if self.is_all else f"{self.mode}({self.seed})"


@dataclass
class CandidateRow:
    s: np.ndarray
    pair: tuple
    objective: float
    index: int
    status: str = LpStatus.OPTIMAL.value

    @property
    def degenerate(self):
        return self.status == RecoveryStatus.DEGENERATE

    def support_size(self, tol=SUPPORT_TOL):
        return support_size(self.s, tol)


@dataclass
class RecoveryResult:
    x_rec: np.ndarray
    a_rec: np.ndarray
    provenance: list
    status: str
    support_sizes: list = field(default_factory=list)
    n_candidates: int = 0
    n_distinct: int = 0

    @property
    def success(self):
        return self.status == RecoveryStatus.SUCCESS


def support_size(s, tol=SUPPORT_TOL):
    """Entries with ``|s_k| > tol * ||s||_inf``."""
    s = np.asarray(s)
    top = np.max(np.abs(s), initial=0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(np.abs(s) > tol * top))


def select_pairs(pairs, max_pairs=None, seed=0):
    """Uniform subsample of ``max_pairs`` rows of ``pairs`` (original order kept)."""
    if max_pairs is None or len(pairs) <= max_pairs:
        return pairs
    keep = np.sort(_rng(seed, _BUDGET_STREAM).choice(len(pairs), size=int(max_pairs), replace=False))
    return pairs[keep]


def _solve_pair(y, k, j1, j2, detect_ties):
    r = y[:, j1] + y[:, j2]
    sol = solve_l1(y, r, detect_ties=detect_ties)
    if sol.status is LpStatus.INFEASIBLE:
        return CandidateRow(np.zeros(y.shape[1]), (j1, j2), math.inf, k, RecoveryStatus.DEGENERATE)
    return CandidateRow(y.T @ sol.w, (j1, j2), sol.objective, k, sol.status.value)


def run_erspud(y, mode=PairingMode(), workers=1, max_pairs=None, budget_seed=0, detect_ties=False):
    """Solve one linear program per column pair of ``mode``.

    Parameters
    ----------
    y : (n, p) array
    mode : PairingMode
    workers : int
        Threads used for the pair programs. The output does not depend on it.
    max_pairs : int, optional
        Solve only a uniform subsample of this many pairs (a runtime cap;
        with it the pair set is no longer the full one of the mode).
    detect_ties : bool
        Run the tie probe on every program; off by default because Greedy
        does not use it.

    Returns
    -------
    list of CandidateRow
        Ordered by pair index. Pairs whose constraint vector vanishes are
        kept with ``Degenerate`` status.
    """
    y = as_matrix(y)
    n, p = y.shape
    if p < 2:
        raise ValueError(f"need at least two columns, got p={p}")
    pairs = select_pairs(mode.pairs(p), max_pairs, budget_seed)

    def work(chunk):
        return [_solve_pair(y, int(k), int(pairs[k, 0]), int(pairs[k, 1]), detect_ties) for k in chunk]

    idx = np.arange(len(pairs))
    if workers <= 1 or len(pairs) < 2 * workers:
        return work(idx)
    chunks = np.array_split(idx, 4 * workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(work, chunks))
    return [c for part in parts for c in part]


def _normalized_key(s):
    top = int(np.argmax(np.abs(s)))
    v = s / s[top]
    return np.round(v / DEDUP_GRID).astype(np.int64).tobytes()


def deduplicate(candidates):
    """Drop scaled copies, keeping the lowest pair index of each class."""
    seen = set()
    out = []
    for c in sorted(candidates, key=lambda c: c.index):
        if c.degenerate or not np.any(c.s):
            continue
        key = _normalized_key(c.s)
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return out


def greedy_reconstruct(candidates, y, tol=RANK_TOL, support_tol=SUPPORT_TOL):
    """Assemble ``(A', X')`` from candidate rows.

    Candidates are visited by increasing support size (ties by pair index);
    one is accepted when it raises the numerical rank of the accepted rows.
    Then ``A' = Y X'^T (X' X'^T)^{-1}``.
    """
    y = as_matrix(y)
    n = y.shape[0]
    if not candidates:
        raise ValueError("no candidates")
    pool = deduplicate(candidates)
    pool.sort(key=lambda c: (c.support_size(support_tol), c.index))

    rows, prov, sizes = [], [], []
    unit = []
    for c in pool:
        if len(rows) == n:
            break
        trial = np.vstack(unit + [c.s / np.max(np.abs(c.s))])
        if numerical_rank(trial, tol) > len(rows):
            rows.append(c.s)
            unit.append(c.s / np.max(np.abs(c.s)))
            prov.append(c.pair)
            sizes.append(c.support_size(support_tol))

    x_rec = np.array(rows).reshape(len(rows), y.shape[1])
    base = dict(provenance=prov, support_sizes=sizes, n_candidates=len(candidates), n_distinct=len(pool))
    if len(rows) < n:
        return RecoveryResult(x_rec, None, status=RecoveryStatus.RANK_DEFICIT, **base)
    try:
        a_rec = solve_linear(x_rec @ x_rec.T, x_rec @ y.T).T
    except SingularMatrixError:
        return RecoveryResult(x_rec, None, status=RecoveryStatus.DEGENERATE, **base)
    return RecoveryResult(x_rec, a_rec, status=RecoveryStatus.SUCCESS, **base)


def dictionary_from_pseudocode(y, x_rec):
    """The alternative dictionary formula ``Y Y^T (X' Y^T)^{-1}``."""
    y = as_matrix(y)
    x_rec = as_matrix(x_rec)
    return solve_linear((x_rec @ y.T).T, (y @ y.T).T).T


def recover(y, mode=PairingMode(), workers=1, max_pairs=None, budget_seed=0, tol=RANK_TOL):
    """``run_erspud`` followed by ``greedy_reconstruct``."""
    cands = run_erspud(y, mode, workers=workers, max_pairs=max_pairs, budget_seed=budget_seed)
    return greedy_reconstruct(cands, y, tol=tol)
