import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dictapprox.core.exceptions import ContractViolationError, UnsupportedDimensionError
from dictapprox.models import TCInstance
from dictapprox.services.tc_service import (
    BicriteriaTCSolver,
    best_candidate_witness,
    evaluate,
    oracle_grid,
    oracle_sample,
    solve_bicriteria,
    top_singular_direction,
)
from tests.conftest import random_tc_instance, random_unit


@pytest.fixture
def small_instance():
    vectors = np.array([[1.0, 0.6], [0.0, 0.8]])
    return TCInstance(vectors=vectors, weights=np.array([1.0, 2.0]), tau=0.3)


def test_evaluate_counts_only_cleared_terms(small_instance):
    value, hits = evaluate(small_instance, np.array([1.0, 0.0]), 0.3)
    assert value == pytest.approx(1.0 + 2.0 * 0.36)
    np.testing.assert_array_equal(hits, [0, 1])

    value, hits = evaluate(small_instance, np.array([1.0, 0.0]), 0.5)
    assert value == pytest.approx(1.0)
    np.testing.assert_array_equal(hits, [0])


def test_evaluate_rejects_bad_inputs(small_instance):
    with pytest.raises(ContractViolationError):
        evaluate(small_instance, np.array([1.0, 1.0]), 0.3)
    with pytest.raises(ContractViolationError):
        evaluate(small_instance, np.array([1.0, 0.0]), 1.5)
    with pytest.raises(ContractViolationError):
        evaluate(small_instance, np.array([1.0, 0.0, 0.0]), 0.3)


def test_instance_rejects_vectors_outside_unit_ball():
    with pytest.raises(ContractViolationError):
        TCInstance(vectors=np.array([[2.0]]), weights=np.array([1.0]), tau=0.5)
    with pytest.raises(ContractViolationError):
        TCInstance(vectors=np.array([[0.5]]), weights=np.array([-1.0]), tau=0.5)


def test_solution_reports_effective_threshold(small_instance):
    solution = solve_bicriteria(small_instance)
    tau = small_instance.tau
    assert solution.effective_threshold == pytest.approx(tau ** 2 / 4)
    assert solution.alpha == pytest.approx(tau / 4)
    assert solution.beta == pytest.approx(tau ** 2 / 32)
    assert abs(np.linalg.norm(solution.x) - 1.0) < 1e-12
    value, hits = evaluate(small_instance, solution.x, solution.effective_threshold)
    assert solution.objective_at == value
    np.testing.assert_array_equal(solution.hit_set, hits)


@pytest.mark.parametrize("vectors, weights", [
    (np.zeros((3, 4)), np.ones(4)),
    (np.eye(3), np.zeros(3)),
])
def test_degenerate_instances_return_first_basis_vector(vectors, weights):
    solution = solve_bicriteria(TCInstance(vectors=vectors, weights=weights, tau=0.5))
    assert solution.degenerate
    assert solution.objective_at == 0.0
    np.testing.assert_array_equal(solution.x, [1.0, 0.0, 0.0])


def test_ties_resolve_to_lowest_candidate():
    vectors = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    solution = solve_bicriteria(TCInstance(vectors=vectors, weights=np.ones(3), tau=0.5))
    assert solution.candidate_index == 0


def test_bicriteria_guarantee_against_grid_oracle():
    violations = 0
    taus = (0.1, 0.3, 0.6, 0.9)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        tau = taus[seed % len(taus)]
        instance = random_tc_instance(rng, 2, int(rng.integers(1, 13)), tau)
        solution = solve_bicriteria(instance)
        oracle_value, _ = oracle_grid(instance, 1e-3)
        if solution.objective_at < (tau ** 2 / 32) * oracle_value - 1e-9:
            violations += 1
    assert violations == 0


def test_planted_witness_candidate_scan():
    violations = 0
    for seed in range(200):
        rng = np.random.default_rng(1000 + seed)
        d = int(rng.integers(2, 6))
        n = int(rng.integers(1, 15))
        tau = float(rng.uniform(0.05, 0.95))
        x = random_unit(rng, d)
        vectors = np.empty((d, n))
        for i in range(n):
            length = rng.uniform(np.sqrt(tau), 1.0)
            along = rng.uniform(np.sqrt(tau), length) * rng.choice([-1.0, 1.0])
            w = rng.standard_normal(d)
            w -= (w @ x) * x
            w /= np.linalg.norm(w)
            vectors[:, i] = along * x + np.sqrt(max(length ** 2 - along ** 2, 0.0)) * w
        weights = rng.uniform(0.0, 1.0, size=n)
        instance = TCInstance(vectors=vectors, weights=weights, tau=tau)
        planted_value = float(weights @ (x @ vectors) ** 2)
        _, best = best_candidate_witness(instance, tau ** 2 / 4)
        if best < (tau ** 2 / 32) * planted_value - 1e-12:
            violations += 1
    assert violations == 0


def test_scores_independent_of_thread_count():
    rng = np.random.default_rng(7)
    instance = random_tc_instance(rng, 6, 1000, 0.4)
    single = BicriteriaTCSolver(n_jobs=1).solve(instance)
    threaded = BicriteriaTCSolver(n_jobs=4).solve(instance)
    assert single.candidate_index == threaded.candidate_index
    assert single.objective_at == threaded.objective_at
    np.testing.assert_array_equal(single.x, threaded.x)


def test_oracle_grid_one_dimension():
    instance = TCInstance(vectors=np.array([[0.5, -0.9]]), weights=np.ones(2), tau=0.2)
    value, x = oracle_grid(instance)
    assert value == pytest.approx(0.25 + 0.81)
    np.testing.assert_array_equal(x, [1.0])


def test_oracle_grid_rejects_high_dimension(rng):
    instance = random_tc_instance(rng, 4, 5, 0.3)
    with pytest.raises(UnsupportedDimensionError):
        oracle_grid(instance)


def test_oracle_grid_dominates_scan_in_three_dimensions():
    rng = np.random.default_rng(3)
    instance = random_tc_instance(rng, 3, 8, 0.3)
    grid_value, x = oracle_grid(instance, 1e-2)
    assert abs(np.linalg.norm(x) - 1.0) < 1e-12
    assert grid_value == pytest.approx(evaluate(instance, x, instance.tau)[0])


def test_oracle_sample_is_seeded_and_covers_inputs(rng):
    instance = random_tc_instance(rng, 5, 10, 0.3)
    first = oracle_sample(instance, 500, seed=11)
    second = oracle_sample(instance, 500, seed=11)
    assert first[0] == second[0]
    np.testing.assert_array_equal(first[1], second[1])

    inputs_only, _ = oracle_sample(instance, 0, seed=0)
    _, scan_best = best_candidate_witness(instance, instance.tau)
    assert inputs_only == pytest.approx(scan_best)
    assert first[0] >= inputs_only
    with pytest.raises(ContractViolationError):
        oracle_sample(instance, -1, seed=0)


def test_top_singular_direction_is_exact_at_zero_threshold(rng):
    instance = random_tc_instance(rng, 4, 9, 0.0)
    u, value = top_singular_direction(instance)
    assert evaluate(instance, u, 0.0)[0] == pytest.approx(value, rel=1e-10)
    for _ in range(50):
        assert evaluate(instance, random_unit(rng, 4), 0.0)[0] <= value + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.floats(min_value=0.01, max_value=100.0))
def test_objective_scales_with_weights(seed, scale):
    rng = np.random.default_rng(seed)
    instance = random_tc_instance(rng, 3, 6, 0.2)
    x = random_unit(rng, 3)
    base, hits = evaluate(instance, x, 0.2)
    scaled, scaled_hits = evaluate(instance.with_weights(instance.weights * scale), x, 0.2)
    assert scaled == pytest.approx(scale * base, rel=1e-12, abs=1e-300)
    np.testing.assert_array_equal(hits, scaled_hits)


def test_evaluate_single_weighted_vector():
    instance = TCInstance(vectors=np.array([[0.8], [0.6]]), weights=np.array([2.0]), tau=0.5)
    assert evaluate(instance, np.array([1.0, 0.0]), 0.5)[0] == pytest.approx(1.28)
    assert evaluate(instance, np.array([1.0, 0.0]), 0.7)[0] == 0.0


def test_oracle_grid_two_basis_vectors():
    instance = TCInstance(vectors=np.eye(2), weights=np.ones(2), tau=0.6)
    value, _ = oracle_grid(instance)
    assert value == pytest.approx(1.0)


def test_oracle_grid_matches_plain_loop_in_two_dimensions(rng):
    instance = random_tc_instance(rng, 2, 7, 0.25)
    resolution = 0.05
    count = int(np.ceil(np.pi / resolution))
    expected = -1.0
    for j in range(count):
        theta = j * (np.pi / count)
        x = np.array([np.cos(theta), np.sin(theta)])
        total = 0.0
        for i in range(instance.n):
            ip = float(x @ instance.vectors[:, i])
            if ip * ip >= instance.tau:
                total += instance.weights[i] * ip * ip
        expected = max(expected, total)
    value, _ = oracle_grid(instance, resolution)
    assert value == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_oracle_sample_repeated_basis_vector():
    vectors = np.zeros((5, 4))
    vectors[0, :] = 1.0
    instance = TCInstance(vectors=vectors, weights=np.ones(4), tau=0.9)
    value, x = oracle_sample(instance, 0, seed=0)
    assert value == pytest.approx(4.0)
    np.testing.assert_array_equal(x, [1.0, 0.0, 0.0, 0.0, 0.0])


def test_identical_vectors_are_all_hit(rng):
    u = random_unit(rng, 4)
    instance = TCInstance(vectors=np.tile(u[:, None], (1, 6)), weights=np.ones(6), tau=0.7)
    solution = solve_bicriteria(instance)
    assert solution.objective_at == pytest.approx(6.0)
    assert len(solution.hit_set) == 6


def test_small_threshold_beats_every_single_term(rng):
    instance = random_tc_instance(rng, 4, 12, 1e-6)
    solution = solve_bicriteria(instance)
    single = instance.weights * instance.norms ** 2
    assert solution.objective_at >= float(np.max(single)) - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.floats(min_value=0.01, max_value=100.0))
def test_candidate_choice_invariant_under_weight_scaling(seed, scale):
    rng = np.random.default_rng(seed)
    instance = random_tc_instance(rng, 3, 8, 0.3)
    base = solve_bicriteria(instance)
    scaled = solve_bicriteria(instance.with_weights(instance.weights * scale))
    assert base.candidate_index == scaled.candidate_index
    assert scaled.objective_at == pytest.approx(scale * base.objective_at, rel=1e-12, abs=1e-300)
