import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsp_sampling import (
    BayesianPrior,
    FrequencySupport,
    NoiseModel,
    RandomizedGreedyConfig,
    RngStream,
    SamplingSet,
    apply_update,
    candidate_count,
    frequency_submatrix,
    init_posterior,
    lmmse_estimate,
    marginal_gain,
    objective_direct,
    posterior_cov_direct,
    random_prior,
    reconstruct_gls,
    select_greedy,
    select_randomized_greedy,
)
from gsp_sampling.bayes import _partial_fisher_yates, eta_sequence, greedy_trace, randomized_greedy_trace
from gsp_sampling.fileio import read_rows, write_trajectory

from conftest import er_basis


def _instance(n, k, seed, diag=True):
    _, b = er_basis(n, 0.4, seed)
    U = frequency_submatrix(b, FrequencySupport.first(k))
    gen = RngStream(seed, 1).generator()
    prior = random_prior(k, gen)
    noise = NoiseModel.diagonal(gen.uniform(0.5, 1.5, n)) if diag else NoiseModel.white(0.3)
    return U, prior, noise


def _direct_sigma(U, P, var, S):
    # textbook form: inverse of the posterior information matrix, by explicit inversion
    info = np.linalg.inv(P) + sum(np.outer(U[j], U[j]) / var[j] for j in S)
    return np.linalg.inv(info)


def test_prior_validation():
    with pytest.raises(ValueError, match="eigenvalue"):
        BayesianPrior(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        BayesianPrior(np.array([[1.0, 0.1], [0.0, 1.0]]))
    p = BayesianPrior(np.diag([2.0, 1.0]))
    assert (p.lambda_min, p.lambda_max, p.trace, p.k) == (1.0, 2.0, 3.0, 2)


def test_init_posterior():
    st0 = init_posterior(BayesianPrior.isotropic(2))
    np.testing.assert_array_equal(st0.sigma_bar, np.eye(2))
    assert st0.f_value == 0 and len(st0.selected) == 0
    st1 = init_posterior(BayesianPrior(np.diag([2.0, 1.0])))
    assert st1.f_value == 0 and st1.trace == 3.0
    P = random_prior(6, 3)
    st2 = init_posterior(P)
    assert np.all(np.linalg.eigvalsh(st2.sigma_bar) > 0)
    assert np.abs(st2.sigma_bar - st2.sigma_bar.T).max() <= 1e-12


def test_gain_and_update_examples():
    st0 = init_posterior(BayesianPrior.isotropic(2))
    u = np.array([1.0, 0.0])
    assert marginal_gain(st0, u, 1.0) == 0.5
    st1 = apply_update(st0, 0, u, 1.0)
    np.testing.assert_allclose(st1.sigma_bar, np.diag([0.5, 1.0]))
    assert st1.f_value == 0.5 and st1.selected.order == (0,)
    assert marginal_gain(st0, np.zeros(2), 1.0) == 0.0
    st2 = apply_update(st0, 1, np.zeros(2), 1.0)
    np.testing.assert_array_equal(st2.sigma_bar, st0.sigma_bar)
    assert st2.f_value == 0.0
    with pytest.raises(ValueError):
        apply_update(st1, 0, u, 1.0)


def test_objective_examples():
    U = np.array([[1.0, 0.0], [0.0, 1.0]])
    prior = BayesianPrior.isotropic(2)
    noise = NoiseModel.white(1.0)
    assert objective_direct(U, prior, noise, ()) == 0.0
    assert objective_direct(U, prior, noise, (0,)) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 8), steps=st.integers(1, 20), seed=st.integers(0, 10**6))
def test_recursion_matches_direct_inverse(k, steps, seed):
    gen = np.random.default_rng(seed)
    n = steps + 3
    U = gen.standard_normal((n, k))
    prior = random_prior(k, gen)
    var = gen.uniform(0.2, 2.0, n)
    state = init_posterior(prior)
    for j in range(steps):
        direct_before = _direct_sigma(U, prior.prior_cov, var, range(j))
        direct_after = _direct_sigma(U, prior.prior_cov, var, range(j + 1))
        g = marginal_gain(state, U[j], var[j])
        assert g > 0
        assert abs(g - (np.trace(direct_before) - np.trace(direct_after))) <= 1e-10 * max(1, g)
        state = apply_update(state, j, U[j], var[j])
        diff = np.linalg.norm(state.sigma_bar - direct_after) / np.linalg.norm(direct_after)
        assert diff <= 1e-8
        assert abs(state.f_value - (prior.trace - np.trace(state.sigma_bar))) <= 1e-8 * prior.trace


def test_trace_equivalence_orthonormal_u():
    U, prior, noise = _instance(20, 5, 4)
    Sigma, _ = posterior_cov_direct(U, prior, noise, (0, 3, 7))
    assert abs(np.trace(U @ Sigma @ U.T) - np.trace(Sigma)) <= 1e-8


def test_candidate_count():
    assert candidate_count(1000, 50, 0.5) == 14
    assert candidate_count(10, 4, math.exp(-4)) == 10
    assert candidate_count(10, 4, 0.99) == 1
    assert candidate_count(10, 4, 0.1, remaining=3) == 3


def test_config_validation():
    with pytest.raises(ValueError):
        RandomizedGreedyConfig(4, 0.01)
    with pytest.raises(ValueError):
        RandomizedGreedyConfig(4, 1.0)
    with pytest.raises(ValueError):
        RandomizedGreedyConfig(0, 0.5)
    assert RandomizedGreedyConfig(4, math.exp(-4)).epsilon == math.exp(-4)


def test_partial_fisher_yates_is_uniform_subset():
    gen = np.random.default_rng(0)
    pool = np.arange(6)
    counts = np.zeros(6)
    for _ in range(20000):
        c = _partial_fisher_yates(pool, 2, gen)
        assert len(set(c)) == 2 and np.all(np.diff(c) > 0)
        counts[c] += 1
    np.testing.assert_allclose(counts / 20000, 2 / 6, atol=0.01)


def test_greedy_limit_identity():
    for seed in range(20):
        U, prior, noise = _instance(15, 4, seed)
        m = 5
        g, _ = select_greedy(U, prior, noise, m)
        r, _ = select_randomized_greedy(
            U, prior, noise, RandomizedGreedyConfig(m, math.exp(-m), RngStream(seed)))
        assert g.order == r.order


def test_full_budget_selects_everything():
    U, prior, noise = _instance(8, 3, 1)
    S, _ = select_randomized_greedy(U, prior, noise, RandomizedGreedyConfig(8, 0.9, RngStream(2)))
    assert S.as_set == set(range(8))
    with pytest.raises(ValueError):
        select_greedy(U, prior, noise, 9)


def test_greedy_single_coefficient_picks_largest_row():
    u = np.array([[0.1], [0.7], [-0.5], [0.5]])
    S, _ = select_greedy(u, BayesianPrior.isotropic(1), NoiseModel.white(1.0), 1)
    assert S.order == (1,)


def test_greedy_deterministic_and_consistent():
    U, prior, noise = _instance(20, 5, 3)
    a, sa = select_greedy(U, prior, noise, 8)
    b, sb = select_greedy(U, prior, noise, 8)
    assert a == b and sa.sigma_bar.tobytes() == sb.sigma_bar.tobytes()
    assert abs(sa.f_value - objective_direct(U, prior, noise, a)) <= 1e-8 * prior.trace


def test_randomized_greedy_deterministic_under_stream():
    U, prior, noise = _instance(30, 5, 5)
    cfg = RandomizedGreedyConfig(6, 0.3, RngStream(17))
    assert select_randomized_greedy(U, prior, noise, cfg)[0] == \
        select_randomized_greedy(U, prior, noise, cfg)[0]


def test_white_noise_needs_positive_variance():
    U, prior, _ = _instance(10, 3, 0)
    with pytest.raises(ValueError):
        select_greedy(U, prior, NoiseModel.white(0.0), 3)


def test_trajectory_monotone_and_csv(tmp_path):
    U, prior, noise = _instance(25, 6, 8)
    tr = randomized_greedy_trace(U, prior, noise, RandomizedGreedyConfig(10, 0.2, RngStream(1)))
    assert all(g > 0 for g in tr.gains)
    assert all(np.diff(tr.f_values) > 0)
    assert all(0 < g <= b for g, b in zip(tr.gains, tr.best_gains))
    write_trajectory(tmp_path / "t.csv", tr)
    header, rows = read_rows(tmp_path / "t.csv")
    assert header == ["iteration", "selected_node", "gain", "f_value", "wall_clock_ns"]
    assert [int(r[1]) for r in rows] == list(tr.selected.order)
    assert all(int(r[4]) > 0 for r in rows)


def test_eta_sequence_greedy_limit_is_one():
    U, prior, noise = _instance(12, 4, 2)
    etas = eta_sequence(U, prior, noise, 4, math.exp(-4), RngStream(3))
    assert etas == [1.0] * 4
    etas = eta_sequence(U, prior, noise, 4, 0.5, RngStream(3))
    assert all(0 < e <= 1 for e in etas)
    with pytest.raises(TypeError):
        eta_sequence(U, prior, noise, 4, 0.5, 3)


def test_greedy_trace_matches_select():
    U, prior, noise = _instance(14, 4, 6)
    assert greedy_trace(U, prior, noise, 5).selected == select_greedy(U, prior, noise, 5)[0]


def test_lmmse_limits():
    U, prior, noise = _instance(20, 4, 9)
    S = SamplingSet((0, 1, 2, 3, 4))
    np.testing.assert_array_equal(lmmse_estimate(U, prior, noise, S, np.zeros(5)).x_hat, 0.0)
    gen = np.random.default_rng(0)
    coeff = np.linalg.cholesky(prior.prior_cov) @ gen.standard_normal(4)
    y = (U @ coeff)[S.index]
    est = lmmse_estimate(U, prior, NoiseModel.white(1e12), S, y)
    assert np.linalg.norm(est.x_hat) <= 1e-4 * np.linalg.norm(U @ coeff)


def test_lmmse_beats_gls_monte_carlo():
    U, prior, noise = _instance(20, 4, 10)
    S = SamplingSet((0, 2, 4, 6, 8, 10))
    var = noise.node_variances(20)[S.index]
    L = np.linalg.cholesky(prior.prior_cov)
    gen = np.random.default_rng(1)
    d_l, d_g = [], []
    for _ in range(10000):
        x = U @ (L @ gen.standard_normal(4))
        y = x[S.index] + np.sqrt(var) * gen.standard_normal(6)
        d_l.append(np.sum((lmmse_estimate(U, prior, noise, S, y).x_hat - x) ** 2))
        d_g.append(np.sum((reconstruct_gls(U, S, y, var).x_hat - x) ** 2))
    diff = np.array(d_g) - np.array(d_l)
    # paired comparison: the mean improvement must not be significantly negative
    assert diff.mean() >= -3 * diff.std() / np.sqrt(diff.size)
    # and the empirical MSE should match the posterior trace
    Sigma, _ = posterior_cov_direct(U, prior, noise, S)
    assert abs(np.mean(d_l) / np.trace(Sigma) - 1) < 0.05
