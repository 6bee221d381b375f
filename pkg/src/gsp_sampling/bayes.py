"""Bayesian sampling: MSE objective, rank-1 posterior updates and (randomized) greedy.

The objective is ``f(S) = Tr(P) - Tr(Sigma_S)`` where ``Sigma_S`` is the
posterior error covariance of the spectral coefficients after observing the
nodes in ``S`` with independent noise of per-node variance ``sigma_j^2``.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericalError
from .omp import Reconstruction, SamplingSet
from .rng import RngStream, as_generator


@dataclass(frozen=True)
class BayesianPrior:
    """Spectral-domain prior covariance ``P`` (zero mean)."""

    prior_cov: np.ndarray

    def __post_init__(self):
        P = np.array(self.prior_cov, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("prior covariance must be square")
        if np.abs(P - P.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(P).max(initial=0.0)):
            raise ValueError("prior covariance must be symmetric")
        lam = np.linalg.eigvalsh(P)
        if lam[0] <= 0:
            raise ValueError(f"prior covariance is not positive definite (eigenvalue {lam[0]:.3e})")
        P.setflags(write=False)
        object.__setattr__(self, "prior_cov", P)
        object.__setattr__(self, "_eig", (float(lam[0]), float(lam[-1])))

    @property
    def k(self):
        return self.prior_cov.shape[0]

    @property
    def lambda_min(self):
        return self._eig[0]

    @property
    def lambda_max(self):
        return self._eig[1]

    @property
    def trace(self):
        return float(np.trace(self.prior_cov))

    @classmethod
    def isotropic(cls, k, variance=1.0):
        return cls(variance * np.eye(k))


def random_prior(k, rng=None, eig_range=(0.5, 2.0)):
    """Random rotation of a diagonal with eigenvalues uniform in ``eig_range``."""
    gen = as_generator(rng)
    Q, R = np.linalg.qr(gen.standard_normal((k, k)))
    Q *= np.sign(np.diag(R))
    lam = gen.uniform(eig_range[0], eig_range[1], size=k)
    P = (Q * lam) @ Q.T
    return BayesianPrior((P + P.T) / 2)


@dataclass(frozen=True)
class PosteriorState:
    sigma_bar: np.ndarray
    f_value: float
    selected: SamplingSet
    prior_trace: float

    @property
    def trace(self):
        return float(np.trace(self.sigma_bar))


def init_posterior(prior):
    return PosteriorState(np.array(prior.prior_cov), 0.0, SamplingSet(()), prior.trace)


def marginal_gain(state, u_j, sigma_j2):
    """f(S + j) - f(S) = u^T Sigma^2 u / (sigma_j^2 + u^T Sigma u)."""
    u = np.asarray(u_j, dtype=float)
    w = state.sigma_bar @ u
    return float(w @ w) / (sigma_j2 + float(u @ w))


def apply_update(state, j, u_j, sigma_j2):
    """Sherman-Morrison downdate of the posterior covariance after observing node j."""
    if j in state.selected.as_set:
        raise ValueError(f"node {j} is already selected")
    sigma, gain = _downdate(state.sigma_bar, np.asarray(u_j, dtype=float), sigma_j2)
    return PosteriorState(
        sigma,
        state.f_value + gain,
        SamplingSet(state.selected.order + (int(j),)),
        state.prior_trace,
    )


def _downdate(sigma, u, sigma_j2):
    w = sigma @ u
    den = sigma_j2 + float(u @ w)
    sigma = sigma - np.outer(w, w) / den
    return (sigma + sigma.T) / 2, float(w @ w) / den


def _node_variances(noise, n):
    v = noise.node_variances(n)
    if np.any(v <= 0):
        raise ValueError("Bayesian sampling needs strictly positive noise variances")
    return v


def _batch_gains(sigma, Uc, var_c):
    W = Uc @ sigma
    return np.einsum("ij,ij->i", W, W) / (var_c + np.einsum("ij,ij->i", Uc, W))


def candidate_count(n, m, epsilon, remaining=None):
    """Candidate pool size ceil((n/m) ln(1/eps)), clamped to [1, remaining]."""
    remaining = n if remaining is None else remaining
    s = math.ceil(n / m * math.log(1.0 / epsilon))
    return int(min(remaining, max(1, s)))


@dataclass(frozen=True)
class RandomizedGreedyConfig:
    m: int
    epsilon: float
    rng: RngStream = field(default_factory=lambda: RngStream(0))

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("budget m must be positive")
        lo = math.exp(-self.m)
        # small slack so that exp(-m) itself is accepted after float round trips
        if not (lo * (1 - 1e-12) <= self.epsilon < 1):
            raise ValueError(f"epsilon must lie in [exp(-m), 1) = [{lo:.3e}, 1)")


@dataclass(frozen=True)
class SelectionTrace:
    """One run of (randomized) greedy with per-step diagnostics."""

    selected: SamplingSet
    state: PosteriorState
    gains: tuple
    best_gains: tuple  # greedy gain available at the same step, when tracked
    f_values: tuple = ()
    step_ns: tuple = ()


def _partial_fisher_yates(pool, s, gen):
    pool = pool.copy()
    n = pool.shape[0]
    picks = gen.integers(np.arange(s), n)
    for i, j in enumerate(picks):
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:s])


def _run_selection(U, prior, variances, m, epsilon, gen, track_best=False):
    U = np.asarray(U, dtype=float)
    n, k = U.shape
    if prior.k != k:
        raise ValueError(f"prior is {prior.k} x {prior.k} but U has {k} columns")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={n}")
    available = np.ones(n, dtype=bool)
    sigma, f = np.array(prior.prior_cov), 0.0
    order, gains, best, fvals, step_ns = [], [], [], [], []
    for _ in range(m):
        t0 = time.perf_counter_ns()
        pool = np.flatnonzero(available)
        s = pool.size if epsilon is None else candidate_count(n, m, epsilon, pool.size)
        cand = pool if s >= pool.size else _partial_fisher_yates(pool, s, gen)
        g = _batch_gains(sigma, U[cand], variances[cand])
        # argmax takes the first maximum and cand is sorted: lowest index wins ties
        pick = int(np.argmax(g))
        j = int(cand[pick])
        if track_best:
            full = g if s >= pool.size else _batch_gains(sigma, U[pool], variances[pool])
            best.append(float(full.max()))
        # same rank-1 downdate as apply_update, without rebuilding the state each step
        sigma, _ = _downdate(sigma, U[j], variances[j])
        f += float(g[pick])
        gains.append(float(g[pick]))
        order.append(j)
        available[j] = False
        step_ns.append(max(1, time.perf_counter_ns() - t0))
        fvals.append(f)
    state = PosteriorState(sigma, f, SamplingSet(tuple(order)), prior.trace)
    return SelectionTrace(state.selected, state, tuple(gains), tuple(best), tuple(fvals),
                          tuple(step_ns))


def select_randomized_greedy(U, prior, noise, cfg):
    """Randomized greedy: each round scores a random candidate subset only.

    Candidates are drawn without replacement from the unselected nodes; the
    best marginal gain wins, ties going to the lowest node index.
    """
    U = np.asarray(U, dtype=float)
    if cfg.m > U.shape[0]:
        raise ValueError(f"budget m={cfg.m} exceeds N={U.shape[0]}")
    trace = _run_selection(
        U, prior, _node_variances(noise, U.shape[0]), cfg.m, cfg.epsilon, cfg.rng.generator()
    )
    return trace.selected, trace.state


def select_greedy(U, prior, noise, m):
    U = np.asarray(U, dtype=float)
    if m > U.shape[0]:
        raise ValueError(f"budget m={m} exceeds N={U.shape[0]}")
    trace = _run_selection(U, prior, _node_variances(noise, U.shape[0]), m, None, None)
    return trace.selected, trace.state


def randomized_greedy_trace(U, prior, noise, cfg):
    """Same draws as :func:`select_randomized_greedy`, plus the greedy gain at each step."""
    U = np.asarray(U, dtype=float)
    return _run_selection(
        U, prior, _node_variances(noise, U.shape[0]), cfg.m, cfg.epsilon,
        cfg.rng.generator(), track_best=True,
    )


def greedy_trace(U, prior, noise, m):
    U = np.asarray(U, dtype=float)
    return _run_selection(U, prior, _node_variances(noise, U.shape[0]), m, None, None)


def eta_sequence(U, prior, noise, m, epsilon, rng):
    """Ratios of the randomized gain to the best available gain, step by step.

    Both gains are evaluated at the randomized run's current set, so each
    ratio lies in (0, 1].
    """
    if not isinstance(rng, RngStream):
        raise TypeError("eta_sequence needs an RngStream so the run can be replayed")
    trace = randomized_greedy_trace(U, prior, noise, RandomizedGreedyConfig(m, epsilon, rng))
    etas = []
    for g, b in zip(trace.gains, trace.best_gains):
        if not b > 0:
            raise NumericalError("best available marginal gain is not positive")
        etas.append(g / b)
    return etas


def posterior_cov_direct(U, prior, noise, S):
    """(P^-1 + sum_j sigma_j^-2 u_j u_j^T)^-1 by Cholesky solves."""
    U = np.asarray(U, dtype=float)
    S = S if isinstance(S, SamplingSet) else SamplingSet(tuple(S))
    S.check_bounds(U.shape[0])
    var = _node_variances(noise, U.shape[0])
    k = prior.k
    try:
        Pinv = sla.cho_solve(sla.cho_factor(prior.prior_cov), np.eye(k))
        US = U[S.index]
        info = Pinv + US.T @ (US / var[S.index][:, None])
        Sigma = sla.cho_solve(sla.cho_factor(info), np.eye(k))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"posterior covariance solve failed: {exc}") from exc
    return (Sigma + Sigma.T) / 2, info


def objective_direct(U, prior, noise, S):
    Sigma, _ = posterior_cov_direct(U, prior, noise, S)
    return prior.trace - float(np.trace(Sigma))


def lmmse_estimate(U, prior, noise, S, y_S):
    """Posterior-mean estimate of the spectral coefficients from the samples."""
    U = np.asarray(U, dtype=float)
    S = S if isinstance(S, SamplingSet) else SamplingSet(tuple(S))
    if len(S) < 1:
        raise ValueError("need at least one sample")
    Sigma, info = posterior_cov_direct(U, prior, noise, S)
    var = _node_variances(noise, U.shape[0])[S.index]
    coeff = Sigma @ (U[S.index].T @ (np.asarray(y_S, dtype=float) / var))
    return Reconstruction(U @ coeff, coeff, float(np.linalg.cond(info)))
