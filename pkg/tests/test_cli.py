import numpy as np
import pytest

from conftest import identity_pair
from erspud.cli import main
from erspud.experiments import SWEEP_COLUMNS
from erspud.lowerbound import CSV_COLUMNS
from erspud.models import DictionarySpec, ModelSpec, gen_coefficients, gen_dictionary
from erspud.certify import ConditionReport
from erspud.textio import read_matrix, write_matrix


def run(tmp_path, *argv):
    return main([*argv])


def read(path):
    return path.read_text(encoding="utf-8")


def gen_args(out):
    return ["gen", "--set", "n=4", "--set", "p=8", "--set", "theta=1", "--set", "dist=rademacher",
            "--set", "seed=5", "--out", str(out)]


def test_gen_writes_sign_combinations(tmp_path):
    assert main(gen_args(tmp_path / "g")) == 0
    a, x, y = (read_matrix(tmp_path / "g" / f) for f in ("A.txt", "X.txt", "Y.txt"))
    assert y.shape == (4, 8)
    assert np.array_equal(x, gen_coefficients(ModelSpec(4, 8, 1.0, "rademacher", 5)))
    assert np.array_equal(a, gen_dictionary(DictionarySpec(4, "random_gaussian_invertible", 5)))
    coeffs = np.linalg.solve(a, y)
    assert np.max(np.abs(coeffs - np.round(coeffs))) <= 1e-10
    assert set(np.round(coeffs).ravel()) <= {-1.0, 1.0}
    assert "timestamp" in read(tmp_path / "g" / "manifest.txt")


def test_gen_is_deterministic(tmp_path):
    main(gen_args(tmp_path / "a"))
    main(gen_args(tmp_path / "b"))
    for f in ("A.txt", "X.txt", "Y.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def _identity_pair_files(tmp_path, n=5):
    x = identity_pair(n)
    y = gen_dictionary(DictionarySpec(n, "random_gaussian_invertible", 1)) @ x
    write_matrix(tmp_path / "X.txt", x)
    write_matrix(tmp_path / "Y.txt", y)
    return tmp_path / "X.txt", tmp_path / "Y.txt"


def test_recover_identity_pair(tmp_path):
    xp, yp = _identity_pair_files(tmp_path)
    rc = main(["recover", "--y", str(yp), "--x", str(xp), "--out", str(tmp_path / "r")])
    assert rc == 0
    lines = read(tmp_path / "r" / "recover.csv").splitlines()
    assert lines[0] == "n,p,status,matched,provenance"
    assert lines[1].startswith("5,10,Success,true,")
    assert read_matrix(tmp_path / "r" / "X_rec.txt").shape == (5, 10)


def test_recover_needs_two_columns(tmp_path):
    write_matrix(tmp_path / "Y.txt", np.ones((3, 1)))
    assert main(["recover", "--y", str(tmp_path / "Y.txt"), "--out", str(tmp_path / "r")]) == 2


def test_recover_rank_deficit_exit_code(tmp_path):
    write_matrix(tmp_path / "Y.txt", np.ones((3, 6)))
    assert main(["recover", "--y", str(tmp_path / "Y.txt"), "--out", str(tmp_path / "r")]) == 3
    assert "RankDeficit" in read(tmp_path / "r" / "recover.csv")


def test_recover_io_error(tmp_path):
    assert main(["recover", "--y", str(tmp_path / "missing.txt")]) == 4
    (tmp_path / "bad.txt").write_text("2 2\n1,x\n3,4\n")
    assert main(["recover", "--y", str(tmp_path / "bad.txt"), "--out", str(tmp_path / "r")]) == 4


def test_pairing_flag_changes_only_provenance(tmp_path):
    # four copies of I: every pair LP returns a row, so both modes succeed
    x = np.hstack([np.eye(3)] * 4)
    write_matrix(tmp_path / "X.txt", x)
    write_matrix(tmp_path / "Y.txt", gen_dictionary(DictionarySpec(3, "random_gaussian_invertible", 2)) @ x)
    rows = {}
    for mode in ("AllPairs", "RandomPairing"):
        out = tmp_path / mode
        rc = main(["recover", "--y", str(tmp_path / "Y.txt"), "--x", str(tmp_path / "X.txt"),
                   "--set", f"mode={mode}", "--set", "seed=3", "--out", str(out)])
        assert rc == 0
        rows[mode] = read(out / "recover.csv").splitlines()[1].split(",")
    a, r = rows["AllPairs"], rows["RandomPairing"]
    assert a[:-1] == r[:-1]
    assert a[-1] != r[-1]


def test_certify_reports(tmp_path, capsys):
    write_matrix(tmp_path / "X.txt", identity_pair(8))
    assert main(["certify", "--x", str(tmp_path / "X.txt"), "--set", "theta=1/n", "--set", "p0_subsets=20",
                 "--out", str(tmp_path / "c")]) == 0
    rep = ConditionReport.from_text(read(tmp_path / "c" / "report.txt"))
    assert rep.p3 and rep.mode == "AllPairs"
    assert capsys.readouterr().out == read(tmp_path / "c" / "report.txt")

    x = identity_pair(8)
    x[3] = 0.0
    write_matrix(tmp_path / "Z.txt", x)
    main(["certify", "--x", str(tmp_path / "Z.txt"), "--set", "theta=1/n", "--set", "p0_subsets=20",
          "--out", str(tmp_path / "z")])
    rep = ConditionReport.from_text(read(tmp_path / "z" / "report.txt"))
    assert not rep.p0 and rep.p0.witness == ("row", 3, 0)


SWEEP = ["--set", "n=6", "--set", "p_grid=n + 2, 5*n", "--set", "theta=1.5/n", "--set", "trials=3",
         "--set", "p0_subsets=20"]


def test_sweep_header_and_determinism(tmp_path, monkeypatch):
    assert main(["sweep", *SWEEP, "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("ERSPUD_WORKERS", "3")
    assert main(["sweep", *SWEEP, "--out", str(tmp_path / "b")]) == 0
    text = read(tmp_path / "a" / "sweep.csv")
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert text.splitlines()[0] == "n,p,theta,mode,trials,success_rate,p0_rate,p3_rate,mean_runtime"
    assert len(text.splitlines()) == 3
    assert text == read(tmp_path / "b" / "sweep.csv")
    assert text.splitlines()[1].endswith(",nan")


def test_single_cell_sweep_matches_recover(tmp_path):
    args = ["--set", "n=4", "--set", "p=10", "--set", "theta=0.25", "--set", "trials=1", "--set", "seed=9"]
    main(["sweep", *args, "--out", str(tmp_path / "s")])
    row = read(tmp_path / "s" / "sweep.csv").splitlines()[1].split(",")
    from erspud.config import ExperimentConfig
    from erspud.experiments import make_instance
    from erspud.models import derive_seed
    cfg = ExperimentConfig(n=4, p="10", theta="0.25", trials=1, seed=9)
    a, x, y = make_instance(cfg, 4, 10, 0.25, derive_seed(9, 0, 0))
    write_matrix(tmp_path / "X.txt", x)
    write_matrix(tmp_path / "Y.txt", y)
    rc = main(["recover", "--y", str(tmp_path / "Y.txt"), "--x", str(tmp_path / "X.txt"), *args,
               "--out", str(tmp_path / "r")])
    rec = read(tmp_path / "r" / "recover.csv").splitlines()[1].split(",")
    assert (rec[3] == "true") == (row[5] == "1")
    assert rc == (0 if rec[2] == "Success" else 3)


def test_lbdemo_rows(tmp_path):
    args = ["lbdemo", "--set", "n=8", "--set", "p=2*n", "--set", "trials=1", "--set", "c_prime=1.5"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    lines = read(tmp_path / "a" / "lbdemo.csv").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    main([*args, "--out", str(tmp_path / "b")])
    assert read(tmp_path / "b" / "lbdemo.csv") == read(tmp_path / "a" / "lbdemo.csv")


def test_stochproc_deterministic(tmp_path):
    args = ["stochproc", "--set", "n=6", "--set", "theta=0.3", "--set", "m_grid=20, 40", "--set", "trials=2",
            "--set", "n_samples=30"]
    main([*args, "--out", str(tmp_path / "a")])
    main([*args, "--out", str(tmp_path / "b")])
    text = read(tmp_path / "a" / "stochproc.csv")
    assert len(text.splitlines()) == 5
    assert text == read(tmp_path / "b" / "stochproc.csv")


def test_usage_errors(tmp_path, monkeypatch):
    assert main(["sweep", "--set", "bogus=1"]) == 2
    assert main(["sweep", "--set", "nokey"]) == 2
    assert main([]) == 2
    (tmp_path / "cfg.txt").write_text("n = 4\nmode = Never\n")
    assert main(["gen", "--config", str(tmp_path / "cfg.txt")]) == 2
    monkeypatch.setenv("ERSPUD_WORKERS", "zero")
    assert main(["sweep", "--out", str(tmp_path / "s")]) == 2


def test_config_file(tmp_path):
    (tmp_path / "cfg.txt").write_text("# tiny\nn = 4\np = 6\ntheta = 0.5\n")
    assert main(["gen", "--config", str(tmp_path / "cfg.txt"), "--out", str(tmp_path / "g")]) == 0
    assert read_matrix(tmp_path / "g" / "X.txt").shape == (4, 6)
