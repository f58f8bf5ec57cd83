import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erspud.models import (DictionarySpec, ModelSpec, bernoulli_rademacher, derive_seed, gen_coefficients,
                           gen_dictionary, instance, mean_abs, observe)


def test_theta_one_rademacher_is_all_signs():
    x = gen_coefficients(ModelSpec(5, 9, 1.0, "rademacher", 3))
    assert set(np.unique(x)) <= {-1.0, 1.0}


def test_tiny_theta_is_zero():
    assert not np.any(gen_coefficients(ModelSpec(4, 4, 1e-12, "gaussian", 1)))


def test_nonzero_fraction_binomial():
    x = gen_coefficients(ModelSpec(100, 1000, 0.05, "gaussian", 7))
    frac = np.count_nonzero(x) / x.size
    assert abs(frac - 0.05) <= 0.01


@pytest.mark.parametrize("bad", [dict(n=0, p=3, theta=0.1), dict(n=3, p=0, theta=0.1),
                                 dict(n=3, p=3, theta=0.0), dict(n=3, p=3, theta=1.5),
                                 dict(n=3, p=3, theta=0.5, dist="cauchy")])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        ModelSpec(**bad)


@given(st.integers(0, 2**63), st.integers(1, 8), st.integers(1, 30), st.integers(1, 30),
       st.sampled_from(["rademacher", "gaussian", "uniform_pm"]))
def test_columns_stable_when_p_changes(seed, n, p1, p2, dist):
    a = gen_coefficients(ModelSpec(n, p1, 0.4, dist, seed))
    b = gen_coefficients(ModelSpec(n, p2, 0.4, dist, seed))
    k = min(p1, p2)
    assert np.array_equal(a[:, :k], b[:, :k])


@given(st.integers(0, 2**63), st.floats(0.01, 1.0))
def test_rademacher_entries_and_determinism(seed, theta):
    x = bernoulli_rademacher(6, 20, theta, seed)
    assert set(np.abs(x[x != 0])) <= {1.0}
    assert np.array_equal(x, bernoulli_rademacher(6, 20, theta, seed))


def test_uniform_pm_range():
    x = gen_coefficients(ModelSpec(20, 200, 1.0, "uniform_pm", 0))
    assert np.all(np.abs(x) <= 1.0) and np.abs(x).mean() == pytest.approx(0.5, abs=0.03)


def test_gaussian_mean_abs():
    x = gen_coefficients(ModelSpec(50, 400, 1.0, "gaussian", 2))
    assert np.abs(x).mean() == pytest.approx(mean_abs("gaussian"), abs=0.02)
    assert mean_abs("gaussian") == pytest.approx(math.sqrt(2 / math.pi))


def test_dictionaries():
    assert np.array_equal(gen_dictionary(DictionarySpec(4, "identity")), np.eye(4))
    q = gen_dictionary(DictionarySpec(6, "random_orthonormal", 5))
    assert np.max(np.abs(q.T @ q - np.eye(6))) <= 1e-10
    a = gen_dictionary(DictionarySpec(6, "ill_conditioned", 5, kappa=1e4))
    s = np.linalg.svd(a, compute_uv=False)
    assert s[0] / s[-1] == pytest.approx(1e4, rel=1e-8)
    g = gen_dictionary(DictionarySpec(6, "random_gaussian_invertible", 5))
    assert np.array_equal(g, gen_dictionary(DictionarySpec(6, "random_gaussian_invertible", 5)))


def test_observe(rng):
    x = rng.standard_normal((3, 5))
    assert np.array_equal(observe(np.eye(3), x), x)
    assert not np.any(observe(rng.standard_normal((3, 3)), np.zeros((3, 5))))
    a = rng.standard_normal((3, 3))
    ref = np.array([[sum(a[i, k] * x[k, j] for k in range(3)) for j in range(5)] for i in range(3)])
    assert np.max(np.abs(observe(a, x) - ref)) <= 1e-12


def test_instance_and_seed_derivation():
    a, x, y = instance(ModelSpec(4, 10, 0.5, "rademacher", 9))
    assert np.array_equal(y, a @ x)
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)
