import numpy as np
import pytest

from dictapprox.core.exceptions import ContractViolationError, DecompositionError, DimensionMismatchError
from dictapprox.models import DictModel, LearnConfig, SignalMatrix
from dictapprox.services.pursuit_service import (
    ColumnErrorProfile,
    bound_ratios,
    compute_gamma_star,
    dict_approx,
    progress_ratios,
    verify_analysis_inequalities,
    verify_convexity_inequality,
)
from dictapprox.services.synth_service import generate
from tests.conftest import random_unit


def _config_for(instance, epsilon=0.25):
    p = instance.params
    return LearnConfig.create(k=p["k"], m=p["m"], lam=max(1.0, instance.lambda_actual), epsilon=epsilon)


def _assert_run_invariants(X, model, trace, config, gamma_star):
    model.validate()
    psi = trace.psi_history
    assert trace.records[0].t == 0 and psi[0] == pytest.approx(1.0)
    assert all(b <= a + 1e-12 for a, b in zip(psi, psi[1:]))
    residual = X.data - model.reconstruct()
    recon = float(np.sum(residual * residual)) / X.frob_sq
    assert recon == pytest.approx(trace.final.psi, rel=1e-8, abs=1e-14)
    assert model.max_code_length <= config.sparsity_cap
    assert model.atom_count <= config.max_iters
    assert all(r <= 1.0 + 1e-9 for r in bound_ratios(trace, config, gamma_star))


def test_zero_matrix_returns_empty_model():
    model, trace = dict_approx(SignalMatrix(np.zeros((3, 4))), LearnConfig.create(k=1, m=1, lam=1.0, epsilon=0.5))
    assert model.atom_count == 0
    assert trace.termination_reason == "psi_floor"
    assert trace.final.psi == 0.0
    assert len(trace.records) == 1


def test_single_column_is_explained_by_one_atom():
    X = SignalMatrix(np.array([[3.0], [4.0]]))
    model, trace = dict_approx(X, LearnConfig.create(k=1, m=1, lam=1.0, epsilon=0.5))
    assert model.atom_count == 1
    np.testing.assert_allclose(model.atoms[0], [0.6, 0.8], atol=1e-15)
    assert model.codes[0][0][0] == 0
    assert model.codes[0][0][1] == pytest.approx(5.0)
    assert trace.final.psi == pytest.approx(0.0, abs=1e-15)
    assert trace.termination_reason in ("psi_floor", "degenerate_tc")


def test_zero_columns_get_empty_codes():
    X = SignalMatrix(np.array([[1.0, 0.0, 2.0], [1.0, 0.0, -1.0]]))
    model, trace = dict_approx(X, LearnConfig.create(k=1, m=2, lam=1.0, epsilon=0.5))
    assert model.codes[1] == []
    assert trace.final.psi == pytest.approx(0.0, abs=1e-14)


def test_max_iters_override_caps_iterations(rng):
    X = SignalMatrix(rng.standard_normal((6, 40)))
    config = LearnConfig.create(k=2, m=3, lam=1.0, epsilon=0.5, max_iters_override=2)
    model, trace = dict_approx(X, config)
    assert model.atom_count == 2
    assert trace.termination_reason == "max_iters"


def test_accepted_columns_clear_the_acceptance_rule():
    instance = generate(d=8, n=60, m=4, k=2, noise_ratio=0.05, seed=5)
    config = _config_for(instance)
    model, _ = dict_approx(instance.X, config)
    X = instance.X
    # 每个码系数 c 都满足 c^2 >= alpha tau ||x_i||^2
    for i, code in enumerate(model.codes):
        for _, c in code:
            assert c ** 2 >= config.accept_threshold * X.col_sq_norms[i] * (1 - 1e-12)


def test_small_planted_run_invariants():
    for seed, noise in ((1, 0.0), (2, 0.05)):
        instance = generate(d=8, n=60, m=4, k=2, noise_ratio=noise, seed=seed)
        config = _config_for(instance)
        model, trace = dict_approx(instance.X, config)
        _assert_run_invariants(instance.X, model, trace, config, instance.gamma_star_actual)
        assert trace.final.psi <= noise + config.epsilon


def test_output_independent_of_thread_count():
    instance = generate(d=8, n=600, m=4, k=2, noise_ratio=0.05, seed=9)
    config = _config_for(instance)
    model_a, trace_a = dict_approx(instance.X, config, n_jobs=1)
    model_b, trace_b = dict_approx(instance.X, config, n_jobs=3)
    assert model_a.to_json() == model_b.to_json()
    assert [r.as_row() for r in trace_a.records] == [r.as_row() for r in trace_b.records]


@pytest.mark.slow
def test_planted_convergence_and_sparsity_suite():
    for seed in range(20):
        noise = 0.0 if seed % 2 == 0 else 0.05
        instance = generate(d=32, n=500, m=8, k=3, noise_ratio=noise, seed=seed)
        config = _config_for(instance)
        model, trace = dict_approx(instance.X, config)
        _assert_run_invariants(instance.X, model, trace, config, instance.gamma_star_actual)
        assert trace.final.psi <= noise + 0.25
        if noise == 0.0:
            assert trace.final.psi <= 0.25
            assert model.atom_count <= config.derived_max_iters


def _random_decomposition(rng):
    d = int(rng.integers(2, 11))
    k = int(rng.integers(1, 6))
    atoms = [random_unit(rng, d) for _ in range(k)]
    coeffs = rng.standard_normal(k)
    z = rng.standard_normal(d) * rng.choice([1e-3, 0.1, 1.0])
    w = sum(c * s for c, s in zip(coeffs, atoms)) + z
    scale = np.linalg.norm(w)
    u = w / scale
    r = int(rng.integers(0, d))
    T = np.linalg.qr(rng.standard_normal((d, r)))[0] if r else np.zeros((d, 0))
    return u, atoms, coeffs / scale, z / scale, T


def test_analysis_inequalities_hold_on_random_decompositions():
    violations = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        u, atoms, coeffs, z, T = _random_decomposition(rng)
        n = int(rng.integers(1, 20))
        profile = ColumnErrorProfile(
            thetas=rng.uniform(0, 1, n), gammas=rng.uniform(0, 1, n), col_sq=rng.uniform(0.1, 5, n)
        )
        report = verify_analysis_inequalities(u, atoms, coeffs, z, T, column_data=profile, slack=1e-10)
        if not report.passed:
            violations += 1
    assert violations == 0


def test_analysis_inequality_is_tight_for_single_atom():
    u = np.array([1.0, 0.0])
    report = verify_analysis_inequalities(u, [u], [1.0], np.zeros(2), np.zeros((2, 0)))
    assert report.theta == pytest.approx(1.0)
    assert report.increment.lhs == pytest.approx(1.0)
    assert report.increment.rhs == pytest.approx(0.25)


def test_analysis_rejects_broken_decomposition():
    u = np.array([1.0, 0.0])
    with pytest.raises(DecompositionError):
        verify_analysis_inequalities(u, [u], [0.5], np.zeros(2), np.zeros((2, 0)))
    with pytest.raises(ContractViolationError):
        verify_analysis_inequalities(u, [u], [1.0], np.zeros(2), np.array([[2.0], [0.0]]))


def test_convexity_inequality_zero_mass():
    check = verify_convexity_inequality(ColumnErrorProfile(np.zeros(3), np.zeros(3), np.zeros(3)))
    assert check.passed and check.lhs == 0.0


def test_gamma_star_of_exact_truth_is_zero():
    instance = generate(d=6, n=30, m=3, k=2, seed=4)
    gamma = compute_gamma_star(instance.X, instance.truth_model())
    assert gamma.value == pytest.approx(0.0, abs=1e-28)
    empty = compute_gamma_star(instance.X, DictModel.empty(6, 30))
    assert empty.value == pytest.approx(1.0)
    with pytest.raises(DimensionMismatchError):
        compute_gamma_star(instance.X, DictModel.empty(6, 29))


def test_gamma_star_matches_generator_over_inliers():
    instance = generate(d=10, n=80, m=4, k=2, noise_ratio=0.05, rho=0.1, seed=8)
    gamma = compute_gamma_star(instance.X, instance.truth_model(), instance.inlier_indices)
    assert gamma.value == pytest.approx(instance.gamma_star_actual, rel=1e-10)


def test_progress_ratios_align_with_trace():
    instance = generate(d=8, n=60, m=4, k=2, noise_ratio=0.05, seed=3)
    config = _config_for(instance)
    _, trace = dict_approx(instance.X, config)
    ratios = progress_ratios(trace, config, instance.gamma_star_actual)
    assert len(ratios) == len(trace.records) - 1
    assert all(r is None or r >= 0 for r in ratios)


def test_repeated_column_needs_one_atom(rng):
    u = random_unit(rng, 5)
    X = SignalMatrix(np.tile(2.0 * u[:, None], (1, 10)))
    model, trace = dict_approx(X, LearnConfig.create(k=1, m=1, lam=1.0, epsilon=0.5))
    assert model.atom_count == 1
    assert all(len(code) == 1 for code in model.codes)
    assert trace.final.psi == pytest.approx(0.0, abs=1e-14)


def test_codes_telescope_column_energy():
    instance = generate(d=8, n=60, m=4, k=2, noise_ratio=0.05, seed=4)
    config = _config_for(instance)
    model, trace = dict_approx(instance.X, config)
    X = instance.X.data
    residual = X - model.reconstruct()
    for i, code in enumerate(model.codes):
        explained = sum(c * c for _, c in code)
        expected = float(X[:, i] @ X[:, i]) - explained
        assert float(residual[:, i] @ residual[:, i]) == pytest.approx(expected, rel=1e-8, abs=1e-10)
        assert float(residual[:, i] @ residual[:, i]) <= float(X[:, i] @ X[:, i]) + 1e-12
    assert [r.atoms for r in trace.records] == list(range(len(trace.records)))
