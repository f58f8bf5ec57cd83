import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erspud.l1lp import LpStatus, is_unique_minimizer, oracle_vertex_enum, solve_l1


def random_instance(g, n, p, theta):
    y = g.standard_normal((n, p)) * (g.random((n, p)) < theta)
    y[:, 0] += g.standard_normal(n) * 1e-3  # keep the first column nonzero
    return y, g.standard_normal(n)


def test_identity_two_by_two():
    sol = solve_l1(np.eye(2), [2.0, 1.0])
    assert sol.status is LpStatus.OPTIMAL
    assert np.allclose(sol.w, [0.5, 0.0], atol=1e-12)
    assert sol.objective == pytest.approx(0.5, abs=1e-12)
    assert oracle_vertex_enum(np.eye(2), [2.0, 1.0]).objective == pytest.approx(0.5, abs=1e-12)


def test_zero_constraint_is_infeasible():
    assert solve_l1(np.eye(3), np.zeros(3)).status is LpStatus.INFEASIBLE
    assert solve_l1(np.eye(3), np.full(3, 1e-13)).status is LpStatus.INFEASIBLE


def test_single_column_zeroed_on_hyperplane():
    y = np.array([[1.0], [2.0]])
    r = np.array([1.0, -1.0])
    assert oracle_vertex_enum(y, r).objective == pytest.approx(0.0, abs=1e-12)
    assert solve_l1(y, r).objective == pytest.approx(0.0, abs=1e-12)


def test_tie_is_reported():
    sol = solve_l1(np.eye(2), [1.0, 1.0])
    assert sol.status is LpStatus.TIE_DEGENERATE
    assert sol.objective == pytest.approx(1.0)
    assert not is_unique_minimizer(np.eye(2), [1.0, 1.0], sol.w)


def test_unique_minimizer_detected():
    sol = solve_l1(np.eye(2), [2.0, 1.0])
    assert is_unique_minimizer(np.eye(2), [2.0, 1.0], sol.w)


def test_hundred_random_instances_match_oracle():
    g = np.random.default_rng(11)
    for _ in range(100):
        n, p = int(g.integers(1, 5)), int(g.integers(1, 9))
        y, r = random_instance(g, n, p, g.choice([0.3, 0.6, 1.0]))
        ours, ref = solve_l1(y, r), oracle_vertex_enum(y, r)
        assert ours.status.value != "Infeasible"
        assert abs(ours.objective - ref.objective) <= 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 12))
def test_solution_invariants(seed, n, p):
    g = np.random.default_rng(seed)
    y, r = random_instance(g, n, p, 0.7)
    sol = solve_l1(y, r)
    assert sol.solved
    assert abs(r @ sol.w - 1.0) <= 1e-9
    obj = np.abs(sol.w @ y).sum()
    assert abs(obj - sol.objective) <= 1e-9 * max(1.0, obj)

    # scaling r by c scales w by 1/c
    c = float(g.choice([-3.0, 0.5, 7.0]))
    scaled = solve_l1(y, c * r)
    assert scaled.objective == pytest.approx(sol.objective / abs(c), rel=1e-9, abs=1e-12)

    # a column permutation leaves the optimum unchanged
    perm = g.permutation(p)
    assert solve_l1(y[:, perm], r).objective == pytest.approx(sol.objective, rel=1e-9, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_feasible_perturbations_never_improve(seed):
    g = np.random.default_rng(seed)
    y, r = random_instance(g, 4, 10, 0.6)
    sol = solve_l1(y, r)
    d = g.standard_normal((1000, 4)) * g.choice([1e-4, 1e-2, 1.0], size=(1000, 1))
    d -= np.outer(d @ r, r) / (r @ r)
    vals = np.abs((sol.w + d) @ y).sum(axis=1)
    assert vals.min() >= sol.objective - 1e-9 * (1 + sol.objective)


def test_oracle_cross_check_n3_p6():
    g = np.random.default_rng(5)
    for _ in range(20):
        y, r = g.standard_normal((3, 6)), g.standard_normal(3)
        assert solve_l1(y, r).objective == pytest.approx(oracle_vertex_enum(y, r).objective, abs=1e-9)


def test_oracle_size_guard():
    with pytest.raises(ValueError):
        oracle_vertex_enum(np.ones((7, 3)), np.ones(7))


def test_medium_instance_against_scipy():
    from scipy.optimize import linprog

    g = np.random.default_rng(2)
    n, p = 10, 120
    y = g.standard_normal((n, p)) * (g.random((n, p)) < 0.3)
    r = y[:, 3] + y[:, 40]
    sol = solve_l1(y, r)
    c = np.r_[np.zeros(n), np.ones(p)]
    a_ub = np.block([[y.T, -np.eye(p)], [-y.T, -np.eye(p)]])
    ref = linprog(c, A_ub=a_ub, b_ub=np.zeros(2 * p), A_eq=np.r_[r, np.zeros(p)][None], b_eq=[1.0],
                  bounds=[(None, None)] * n + [(0, None)] * p, method="highs")
    assert sol.objective == pytest.approx(ref.fun, rel=1e-9)
