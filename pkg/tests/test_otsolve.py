import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from matchdiff.errors import InvalidInputError, SizeLimitError
from matchdiff.geometry import PointCloud
from matchdiff.otsolve import (
    TransportProblem,
    entropic_ot,
    exact_assignment,
    ot_objective,
    theorem2_iterate,
    uniform_transport,
    verify_theorem1,
)
from matchdiff.synth import make_features, make_rigid_pair


def test_transport_problem_validation():
    c = np.ones((2, 3))
    TransportProblem(c, np.array([0.5, 0.5]), np.full(3, 1 / 3), 0.1)
    with pytest.raises(InvalidInputError):
        TransportProblem(c, np.array([0.5, 0.6]), np.full(3, 1 / 3), 0.1)
    with pytest.raises(InvalidInputError):
        TransportProblem(c, np.array([0.5, 0.5]), np.full(3, 1 / 3), 0.0)
    with pytest.raises(InvalidInputError):
        TransportProblem(c, np.array([1.5, -0.5]), np.full(3, 1 / 3), 0.1)
    with pytest.raises(InvalidInputError):
        TransportProblem(np.full((2, 3), np.inf), np.array([0.5, 0.5]), np.full(3, 1 / 3), 0.1)


def test_uniform_transport_marginals():
    prob = uniform_transport(np.zeros((4, 6)), 0.5)
    assert np.allclose(prob.row_marginals, 0.25)
    assert np.allclose(prob.col_marginals, 1 / 6)


def test_entropic_ot_satisfies_marginals():
    rng = np.random.default_rng(20)
    for _ in range(10):
        n, m = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        cost = rng.uniform(0, 2, (n, m))
        p = rng.random(n) + 0.1
        p /= p.sum()
        q = rng.random(m) + 0.1
        q /= q.sum()
        plan = entropic_ot(TransportProblem(cost, p, q, 0.1))
        assert plan.info["converged"]
        assert np.abs(plan.entries.sum(axis=1) - p).max() < 1e-6
        assert np.abs(plan.entries.sum(axis=0) - q).max() < 1e-6


def test_entropic_ot_zero_marginal_rows_carry_no_mass():
    cost = np.zeros((3, 3))
    p = np.array([0.5, 0.5, 0.0])
    q = np.full(3, 1 / 3)
    plan = entropic_ot(TransportProblem(cost, p, q, 0.5))
    assert np.all(plan.entries[2] == 0.0)
    assert np.abs(plan.entries.sum(axis=0) - q).max() < 1e-6


def test_entropic_ot_large_epsilon_matches_product_measure():
    # as eps -> inf the entropy term dominates and the plan factorizes
    rng = np.random.default_rng(21)
    for _ in range(10):
        cost = rng.uniform(0, 1, (5, 7))
        prob = uniform_transport(cost, 100.0)
        plan = entropic_ot(prob)
        product = np.outer(prob.row_marginals, prob.col_marginals)
        assert np.abs(plan.entries - product).max() < 1e-3


def test_entropic_ot_small_epsilon_approaches_assignment():
    rng = np.random.default_rng(22)
    for _ in range(5):
        cost = rng.uniform(0, 1, (6, 6))
        plan = entropic_ot(uniform_transport(cost, 1e-3), iters=20000)
        assert plan.info["marginal_violation"] < 1e-6
        perm, value = exact_assignment(cost)
        transport_cost = float((cost * plan.entries).sum())
        # optimal assignment cost scaled to marginals 1/n
        assert abs(transport_cost - value / 6.0) <= 0.01 * (value / 6.0)


def test_ot_objective_hand_value():
    prob = TransportProblem(
        np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.1
    )
    plan = np.array([[0.5, 0.0], [0.0, 0.5]])
    assert abs(ot_objective(prob, plan) - 2.3306852819440054) < 1e-14


def test_ot_objective_prefers_solver_plan():
    # the solver's plan should beat feasible competitors on the objective
    rng = np.random.default_rng(23)
    cost = rng.uniform(0, 1, (4, 4))
    prob = uniform_transport(cost, 0.2)
    plan = entropic_ot(prob).entries
    obj = ot_objective(prob, plan)
    uniform = np.full((4, 4), 1.0 / 16.0)
    assert obj <= ot_objective(prob, uniform) + 1e-9
    rows, cols = linear_sum_assignment(cost)
    pplan = np.zeros((4, 4))
    pplan[rows, cols] = 0.25
    assert obj <= ot_objective(prob, pplan) + 1e-9


def test_exact_assignment_matches_scipy():
    rng = np.random.default_rng(24)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        cost = rng.uniform(0, 1, (n, n))
        perm, value = exact_assignment(cost)
        rows, cols = linear_sum_assignment(cost)
        assert abs(value - cost[rows, cols].sum()) < 1e-12
        assert cost[np.arange(n), list(perm)].sum() == pytest.approx(value)


def test_exact_assignment_lexicographic_ties():
    cost = np.zeros((3, 3))
    perm, value = exact_assignment(cost)
    assert perm == (0, 1, 2)
    assert value == 0.0


def test_exact_assignment_size_limit():
    with pytest.raises(SizeLimitError):
        exact_assignment(np.zeros((9, 9)))
    with pytest.raises(InvalidInputError):
        exact_assignment(np.zeros((3, 4)))


def test_verify_theorem1_holds_on_random_instances():
    rng = np.random.default_rng(25)
    for i in range(12):
        n = (4, 5, 6)[i % 3]
        p = PointCloud(rng.uniform(-1, 1, (n, 3)))
        q = PointCloud(rng.uniform(-1, 1, (n, 3)))
        out = verify_theorem1(p, q, n_warp_samples=16, seed=i)
        assert out["holds"]
        assert out["lhs"] <= out["rhs_upper"] + 1e-9


def test_verify_theorem1_size_limit_and_validation():
    p = PointCloud(np.random.default_rng(0).uniform(-1, 1, (7, 3)))
    with pytest.raises(SizeLimitError):
        verify_theorem1(p, p)
    q = PointCloud(np.random.default_rng(1).uniform(-1, 1, (4, 3)))
    with pytest.raises(InvalidInputError):
        verify_theorem1(PointCloud(np.random.default_rng(2).uniform(-1, 1, (5, 3))), q)


def test_theorem2_converges_to_ground_truth():
    # calibrated operating point: well separated clouds, correlated features
    hits = 0
    for seed in range(10):
        pair = make_rigid_pair(16, noise_sigma=0.0, overlap=1.0, seed=seed, min_separation=0.25)
        pair = make_features(pair, rho=0.9, seed=seed)
        seq, converged = theorem2_iterate(
            pair.source, pair.target, n_outer=10, epsilon=0.01, lambda_geo=50.0
        )
        final = seq[-1].entries
        gt = pair.gt_matrix.entries
        if converged and np.all(final.argmax(axis=1) == gt.argmax(axis=1)):
            hits += 1
    assert hits >= 9


def test_theorem2_sequence_shape_and_validation():
    pair = make_rigid_pair(8, noise_sigma=0.0, overlap=1.0, seed=3, min_separation=0.2)
    pair = make_features(pair, rho=0.9, seed=3)
    seq, _ = theorem2_iterate(pair.source, pair.target, n_outer=4)
    assert 1 <= len(seq) <= 5
    for plan in seq:
        assert plan.entries.shape == (8, 8)
        assert np.abs(plan.entries.sum() - 1.0) < 1e-5
    bare = PointCloud(pair.source.points)
    with pytest.raises(InvalidInputError):
        theorem2_iterate(bare, pair.target)
