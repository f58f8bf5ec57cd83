import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from erspud.config import ConfigError, ExperimentConfig, evaluate
from erspud.textio import csv_text, fmt, kv_from_text, kv_to_text, matrix_from_text, matrix_to_text


@given(arrays(np.float64, st.tuples(st.integers(0, 5), st.integers(0, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_text_round_trip_is_exact(m):
    back = matrix_from_text(matrix_to_text(m))
    assert back.shape == m.shape
    assert np.array_equal(back, m)
    assert matrix_to_text(back) == matrix_to_text(m)


def test_matrix_format():
    assert matrix_to_text(np.array([[1.0, 0.1]])) == "1 2\n1,0.10000000000000001\n"
    with pytest.raises(ValueError):
        matrix_from_text("2 2\n1,2\n")
    with pytest.raises(ValueError):
        matrix_from_text("1 2\n1,2,3\n")


def test_fmt_and_csv():
    assert fmt(True) == "true" and fmt(3) == "3" and fmt(math.nan) == "nan"
    assert fmt(1 / 3) == "0.33333333333333331"
    assert csv_text(("a", "b"), [(1, 0.5)]) == "a,b\n1,0.5\n"


def test_kv_round_trip():
    items = {"seed": 4, "theta": 0.25, "mode": "AllPairs"}
    back = kv_from_text("# comment\n\n" + kv_to_text(items))
    assert back == {"seed": "4", "theta": "0.25", "mode": "AllPairs"}
    with pytest.raises(ValueError):
        kv_from_text("no equals sign\n")


def test_rules():
    assert evaluate("2/n", n=10) == 0.2
    assert evaluate("1/sqrt(n)", n=16) == 0.25
    assert evaluate("3*log(n)/n", n=30) == pytest.approx(3 * math.log(30) / 30)
    assert evaluate("ceil(8*n*log(n))", n=10) == 185
    assert evaluate("n + 2", n=10) == 12
    for bad in ("__import__('os')", "n.real", "m/2", "lambda: 1", "[1][0]"):
        with pytest.raises(ConfigError):
            evaluate(bad, n=3)


def test_config_canonical_round_trip():
    cfg = ExperimentConfig(n=12, p_grid=("n + 2", "ceil(8*n*log(n))"), theta="1/sqrt(n)", trials=3,
                           m_grid=(50, 200), kappa=1e6)
    text = cfg.to_text()
    back = ExperimentConfig.from_text(text)
    assert back == cfg
    assert back.to_text() == text
    assert back.ps(10) == [12, 185]
    assert back.theta_for(16) == 0.25


@given(st.integers(1, 500), st.integers(1, 50), st.integers(0, 2**63), st.sampled_from(["AllPairs", "RandomPairing"]),
       st.floats(1e-12, 1e-3), st.sampled_from(["2/n", "1/sqrt(n)", "0.5*log(n)/n"]))
def test_config_round_trip_property(n, trials, seed, mode, tol, theta):
    cfg = ExperimentConfig(n=n, trials=trials, seed=seed, mode=mode, match_tol=tol, theta=theta)
    assert ExperimentConfig.from_text(cfg.to_text()).to_text() == cfg.to_text()


def test_config_comments_and_errors():
    cfg = ExperimentConfig.from_text("# sweep\nn = 8\n\ntheta = 2/n  \n")
    assert cfg.n == 8 and cfg.theta == "2/n"
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("n = eight\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("mode = Sometimes\n")
    with pytest.raises(ConfigError):
        ExperimentConfig(theta="3/n").theta_for(2)
