import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dictapprox.models import DictModel, OutlierConfig, ResidualState, SignalMatrix
from dictapprox.models.learning import LearnConfig
from dictapprox.services.outlier_service import (
    declare_outliers,
    outlier_count,
    outlier_dict_approx,
    outlier_error,
    psi_hat,
)
from dictapprox.services.pursuit_service import dict_approx
from dictapprox.services.synth_service import generate


def test_psi_hat_drops_largest():
    assert psi_hat(np.array([1.0, 4.0, 9.0]), 0.4) == 5.0


def test_psi_hat_without_outliers_is_phi(rng):
    X = SignalMatrix(rng.standard_normal((3, 7)))
    state = ResidualState.from_signals(X)
    assert psi_hat(state, 0.0) == pytest.approx(state.phi, rel=1e-14)


def test_psi_hat_matches_exhaustive_subset_minimum():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 13))
        rho = float(rng.uniform(0.0, 0.6))
        values = rng.uniform(0.0, 10.0, size=n)
        keep = n - min(n - 1, math.floor(Fraction(repr(rho)) * n))
        brute = min(sum(values[list(c)]) for c in itertools.combinations(range(n), keep))
        assert psi_hat(values, rho) == pytest.approx(brute, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(min_value=0, max_value=1e3, allow_nan=False), min_size=2, max_size=30),
    st.floats(min_value=0.0, max_value=0.49),
    st.randoms(use_true_random=False),
)
def test_psi_hat_is_below_any_kept_subset(values, rho, random):
    values = np.array(values)
    keep = values.size - min(values.size - 1, math.floor(Fraction(repr(rho)) * values.size))
    subset = random.sample(range(values.size), keep)
    assert psi_hat(values, rho) <= float(values[subset].sum()) * (1 + 1e-12) + 1e-12


def test_declare_outliers_breaks_ties_by_index():
    np.testing.assert_array_equal(declare_outliers(np.array([1.0, 5.0, 5.0, 2.0]), 0.25), [1])
    np.testing.assert_array_equal(declare_outliers(np.array([1.0, 5.0, 5.0, 2.0]), 0.5), [1, 2])
    assert declare_outliers(np.array([3.0]), 0.4).size == 0


def _junk_matrix():
    u = np.array([1.0, 0.0, 0.0])
    g = np.array([0.0, 10.0, 0.0])
    return SignalMatrix(np.column_stack([u] * 9 + [g]))


def test_early_return_declares_junk_column():
    X = _junk_matrix()
    config = OutlierConfig.create(k=1, m=1, lam=1.0, epsilon=0.25, rho=0.1)
    result = outlier_dict_approx(X, config)
    assert result.termination_reason == "early_return"
    assert result.model.atom_count == 0
    assert result.outlier_indices == [9]
    assert result.psi_hat_final == pytest.approx(9.0)
    assert outlier_error(X, result.model, result.outlier_indices) == pytest.approx(9.0)


def test_iterating_run_fits_both_directions():
    X = _junk_matrix()
    config = OutlierConfig.create(k=1, m=1, lam=1.0, epsilon=0.05, rho=0.1)
    result = outlier_dict_approx(X, config)
    assert result.termination_reason != "early_return"
    assert result.model.atom_count == 2
    assert len(result.outlier_indices) == 1
    assert result.psi_hat_final == pytest.approx(0.0, abs=1e-12)


def test_zero_rho_follows_dict_approx_atoms():
    instance = generate(d=8, n=60, m=4, k=2, noise_ratio=0.05, seed=12)
    plain, _ = dict_approx(instance.X, LearnConfig.create(k=2, m=4, lam=1.0, epsilon=0.25))
    result = outlier_dict_approx(instance.X, OutlierConfig.create(k=2, m=4, lam=1.0, epsilon=0.25, rho=0.0))
    assert result.outlier_indices == []
    assert 0 < result.model.atom_count <= plain.atom_count
    for ours, theirs in zip(result.model.atoms, plain.atoms):
        np.testing.assert_array_equal(ours, theirs)


def test_planted_outlier_run_guarantees():
    instance = generate(d=16, n=200, m=6, k=2, rho=0.1, seed=21)
    X = instance.X
    config = OutlierConfig.create(k=2, m=6, lam=max(1.0, instance.lambda_actual), epsilon=0.05, rho=0.1)
    result = outlier_dict_approx(X, config)

    assert result.termination_reason != "early_return"
    assert len(result.outlier_indices) == 20
    assert result.psi_hat_final <= config.epsilon * X.frob_sq_of(instance.inlier_indices)
    assert result.iterations <= config.derived_max_iters
    assert result.model.max_code_length <= config.sparsity_cap
    error = outlier_error(X, result.model, result.outlier_indices)
    assert error == pytest.approx(result.psi_hat_final, rel=1e-8, abs=1e-14 * X.frob_sq)

    history = [r.psi_hat for r in result.trace]
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(history, history[1:]))
    assert all(r.phi_drop >= 0 for r in result.trace)


def test_psi_hat_below_planted_inlier_mass():
    instance = generate(d=16, n=100, m=6, k=2, noise_ratio=0.05, rho=0.1, seed=4)
    state = ResidualState.from_signals(instance.X)
    inlier_mass = float(state.col_sq[instance.inlier_indices].sum())
    assert psi_hat(state, 0.1) <= inlier_mass * (1 + 1e-12)


def test_outlier_error_on_empty_model():
    X = SignalMatrix(np.array([[1.0, 2.0, 3.0]]))
    assert outlier_error(X, DictModel.empty(1, 3), [2]) == pytest.approx(5.0)


@pytest.mark.parametrize("n, rho, expected", [
    (10, 0.2999999999, 2),
    (10, 0.3, 3),
    (3, 1 / 3, 0),
    (7, 0.99, 6),
    (200, 0.1, 20),
])
def test_outlier_count_never_exceeds_floor(n, rho, expected):
    assert outlier_count(n, rho) == expected
    assert OutlierConfig.create(k=1, m=1, lam=1.0, epsilon=0.5, rho=rho).outlier_count(n) == expected


def test_generator_respects_outlier_floor():
    instance = generate(d=4, n=10, m=2, k=1, rho=0.2999999999, seed=1)
    assert len(instance.outlier_indices) == 2
    assert declare_outliers(np.arange(10.0), 0.2999999999).size == 2
