"""Trial runners shared by the CLI, the scripts and the acceptance suite."""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certify import check_p0, check_p3
from .config import ExperimentConfig
from .metrics import match_rows_up_to_scale
from .models import DictionarySpec, ModelSpec, derive_seed, gen_coefficients, gen_dictionary, observe
from .recovery import PairingMode, recover
from .stochproc import estimate_sup_deviation, rademacher_matrix

SWEEP_COLUMNS = ("n", "p", "theta", "mode", "trials", "success_rate", "p0_rate", "p3_rate", "mean_runtime")
STOCHPROC_COLUMNS = ("n", "m", "theta", "seed", "sup_estimate", "mu_min", "ratio", "min_expected",
                     "vertex_max", "samples_used")


@dataclass
class TrialOutcome:
    success: bool
    p0: bool
    p3: bool
    runtime: float
    status: str


def pairing_mode(cfg, seed):
    return PairingMode.all_pairs() if cfg.mode == "AllPairs" else PairingMode.random_pairing(seed)


def make_instance(cfg, n, p, theta, seed):
    x = gen_coefficients(ModelSpec(n, p, theta, cfg.dist, seed))
    a = gen_dictionary(DictionarySpec(n, cfg.dictionary, seed, cfg.kappa))
    return a, x, observe(a, x)


def recovery_trial(cfg, n, p, theta, seed, conditions=True):
    """Generate one instance, recover it and (optionally) check P0 / P3."""
    a, x, y = make_instance(cfg, n, p, theta, seed)
    mode = pairing_mode(cfg, seed)
    t0 = time.perf_counter()
    res = recover(y, mode, max_pairs=cfg.max_pairs or None, budget_seed=seed, tol=cfg.rank_tol)
    runtime = time.perf_counter() - t0
    ok = res.success and match_rows_up_to_scale(x, res.x_rec, cfg.match_tol).matched
    p0 = p3 = False
    if conditions:
        p0 = bool(check_p0(x, theta, n_subsets=cfg.p0_subsets, seed=seed))
        p3 = bool(check_p3(x, theta, mode))
    return TrialOutcome(bool(ok), p0, p3, runtime, res.status)


def _run(jobs, fn, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def sweep_cells(cfg):
    """Grid cells ``(n, p, theta)`` in output order."""
    cells = []
    for n in cfg.ns():
        theta = cfg.theta_for(n)
        for p in cfg.ps(n):
            cells.append((n, p, theta))
    return cells


def sweep(cfg, workers=None):
    """Per-cell success, P0 and P3 rates; rows follow ``SWEEP_COLUMNS``.

    Trials across all cells are dispatched to a thread pool; rows come back
    in (cell, trial) order so the CSV does not depend on scheduling.
    ``mean_runtime`` is ``nan`` unless ``cfg.timing == "wall"``.
    """
    workers = workers or cfg.workers
    cells = sweep_cells(cfg)
    jobs = [(c, t) for c in range(len(cells)) for t in range(cfg.trials)]

    def one(job):
        c, t = job
        n, p, theta = cells[c]
        return recovery_trial(cfg, n, p, theta, derive_seed(cfg.seed, c, t))

    outcomes = _run(jobs, one, workers)
    rows = []
    for c, (n, p, theta) in enumerate(cells):
        outs = outcomes[c * cfg.trials:(c + 1) * cfg.trials]
        k = len(outs)
        runtime = float(np.mean([o.runtime for o in outs])) if cfg.timing == "wall" else math.nan
        rows.append((n, p, theta, cfg.mode, k,
                     sum(o.success for o in outs) / k,
                     sum(o.p0 for o in outs) / k,
                     sum(o.p3 for o in outs) / k,
                     runtime))
    return rows


def stochproc_rows(cfg):
    """Deviation statistics for each ``m`` in ``cfg.m_grid`` and each trial seed."""
    n = cfg.n
    theta = cfg.theta_for(n)
    rows = []
    for m in cfg.m_grid:
        for t in range(cfg.trials):
            seed = derive_seed(cfg.seed, int(m), t)
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
            pi = rademacher_matrix(int(m), n, theta, rng)
            st = estimate_sup_deviation(pi, theta, cfg.n_samples, seed=cfg.seed)
            rows.append((n, int(m), theta, t, st.sup_estimate, st.mu_min, st.ratio, st.min_expected,
                         st.vertex_max, st.samples_used))
    return rows


def default_config(**changes):
    return ExperimentConfig().replace(**changes)
