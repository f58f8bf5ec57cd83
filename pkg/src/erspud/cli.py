"""Command line entry point: ``erspud <command> --config FILE``.

Exit codes: 0 success, 2 usage or config error, 3 numerical failure,
4 I/O error. ``ERSPUD_WORKERS`` overrides the configured worker count.
"""

import argparse
import datetime
import os
import sys
import time

import numpy as np

from . import __version__
from .certify import certify
from .config import ConfigError, ExperimentConfig
from .experiments import STOCHPROC_COLUMNS, SWEEP_COLUMNS, make_instance, pairing_mode, stochproc_rows, sweep
from .l1lp import LpError
from .lowerbound import CSV_COLUMNS, dc_failure_demo
from .metrics import match_rows_up_to_scale
from .models import mean_abs
from .recovery import recover
from .textio import kv_to_text, read_matrix, write_csv, write_matrix

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
RECOVER_COLUMNS = ("n", "p", "status", "matched", "provenance")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def _workers(cfg):
    env = os.environ.get("ERSPUD_WORKERS")
    if env is None:
        return cfg.workers
    try:
        w = int(env)
    except ValueError:
        raise UsageError(f"ERSPUD_WORKERS must be an integer, got {env!r}") from None
    if w < 1:
        raise UsageError("ERSPUD_WORKERS must be positive")
    return w


def _load_config(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        changes[key.strip()] = val.strip()
    if changes:
        text = cfg.to_text() + "".join(f"{k} = {v}\n" for k, v in changes.items())
        cfg = ExperimentConfig.from_text(text)
    return cfg


def _outdir(args, cfg):
    out = args.out or cfg.output
    os.makedirs(out, exist_ok=True)
    return out


def _manifest(out, cfg, command, started, **extra):
    items = {"command": command, "seed": cfg.seed}
    items.update(extra)
    items["wall_seconds"] = time.perf_counter() - started
    items["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    with open(os.path.join(out, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write(kv_to_text(items))
        fh.write("# config\n")
        fh.write(cfg.to_text())


def cmd_gen(args, cfg):
    t0 = time.perf_counter()
    n = cfg.n
    p = cfg.ps(n)[0]
    theta = cfg.theta_for(n)
    a, x, y = make_instance(cfg, n, p, theta, cfg.seed)
    out = _outdir(args, cfg)
    write_matrix(os.path.join(out, "A.txt"), a)
    write_matrix(os.path.join(out, "X.txt"), x)
    write_matrix(os.path.join(out, "Y.txt"), y)
    _manifest(out, cfg, "gen", t0, n=n, p=p, theta=theta)
    return EXIT_OK


def cmd_recover(args, cfg):
    t0 = time.perf_counter()
    y = read_matrix(args.y)
    n, p = y.shape
    if p < 2:
        raise UsageError(f"recover needs at least two columns, got p={p}")
    mode = pairing_mode(cfg, cfg.seed)
    res = recover(y, mode, workers=_workers(cfg), max_pairs=cfg.max_pairs or None,
                  budget_seed=cfg.seed, tol=cfg.rank_tol)
    matched, err = "", np.nan
    if args.x:
        x = read_matrix(args.x)
        if x.shape != y.shape:
            raise UsageError(f"ground truth X has shape {x.shape}, Y has {y.shape}")
        if res.success:
            m = match_rows_up_to_scale(x, res.x_rec, cfg.match_tol)
            matched, err = m.matched, m.max_rel_error
        else:
            matched = False
    prov = ";".join(f"{j1}-{j2}" for j1, j2 in res.provenance)
    out = _outdir(args, cfg)
    write_csv(os.path.join(out, "recover.csv"), RECOVER_COLUMNS, [(n, p, res.status, matched, prov)])
    if res.success:
        write_matrix(os.path.join(out, "A_rec.txt"), res.a_rec)
        write_matrix(os.path.join(out, "X_rec.txt"), res.x_rec)
    _manifest(out, cfg, "recover", t0, mode=str(mode), status=res.status, max_rel_error=err,
              n_candidates=res.n_candidates, n_distinct=res.n_distinct)
    if not res.success:
        raise NumericalFailure(f"recovery ended with status {res.status} "
                               f"({len(res.provenance)} of {n} rows accepted)")
    return EXIT_OK


def cmd_certify(args, cfg):
    t0 = time.perf_counter()
    x = read_matrix(args.x)
    n = x.shape[0]
    theta = cfg.theta_for(n)
    rep = certify(x, theta, mean_abs(cfg.dist), pairing_mode(cfg, cfg.seed),
                  p0_subsets=cfg.p0_subsets, c_const=cfg.c_const, seed=cfg.seed)
    text = rep.to_text()
    out = _outdir(args, cfg)
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    _manifest(out, cfg, "certify", t0, theta=theta)
    return EXIT_OK


def cmd_sweep(args, cfg):
    t0 = time.perf_counter()
    rows = sweep(cfg, workers=_workers(cfg))
    out = _outdir(args, cfg)
    write_csv(os.path.join(out, "sweep.csv"), SWEEP_COLUMNS, rows)
    _manifest(out, cfg, "sweep", t0, cells=len(rows))
    return EXIT_OK


def cmd_lbdemo(args, cfg):
    t0 = time.perf_counter()
    n = cfg.n
    p = cfg.ps(n)[0]
    summary = dc_failure_demo(n, p, cfg.c_prime, cfg.trials, cfg.seed, cfg.k_const,
                              workers=_workers(cfg), max_pairs=cfg.max_pairs or None)
    out = _outdir(args, cfg)
    write_csv(os.path.join(out, "lbdemo.csv"), CSV_COLUMNS, [r.row() for r in summary.records])
    _manifest(out, cfg, "lbdemo", t0, n=n, p=p,
              dc_misses=summary.misses("RandomPairing"), dcv2_misses=summary.misses("AllPairs"))
    return EXIT_OK


def cmd_stochproc(args, cfg):
    t0 = time.perf_counter()
    rows = stochproc_rows(cfg)
    out = _outdir(args, cfg)
    write_csv(os.path.join(out, "stochproc.csv"), STOCHPROC_COLUMNS, rows)
    _manifest(out, cfg, "stochproc", t0)
    return EXIT_OK


COMMANDS = {
    "gen": (cmd_gen, "generate A, X and Y = AX"),
    "recover": (cmd_recover, "recover (A, X) from Y"),
    "certify": (cmd_certify, "check the recovery conditions on X"),
    "sweep": (cmd_sweep, "success rates over a (n, p) grid"),
    "lbdemo": (cmd_lbdemo, "random pairing versus all pairs"),
    "stochproc": (cmd_stochproc, "deviation of ||Pi v||_1 from its mean"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="erspud", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="key = value config file (defaults apply when omitted)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
        sp.add_argument("--out", help="output directory (default: config 'output')")
        if name == "recover":
            sp.add_argument("--y", required=True, help="observation matrix file")
            sp.add_argument("--x", help="ground-truth X for the match verdict")
        if name == "certify":
            sp.add_argument("--x", required=True, help="coefficient matrix file")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _load_config(args)
        return COMMANDS[args.command][0](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"erspud: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, LpError, np.linalg.LinAlgError) as exc:
        print(f"erspud: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"erspud: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
