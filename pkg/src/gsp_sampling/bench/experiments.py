"""Experiment runners.

Each runner splits its work into independent jobs (a trial, or a trial and
bandwidth pair).  A job derives all randomness from the master seed and its
own indices, so the CSV does not depend on how many workers ran the jobs.
Rows come back in job order, i.e. sorted by trial.
"""

import math
import time
from dataclasses import replace
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache, partial

import numpy as np
from threadpoolctl import threadpool_limits

from ..baselines import (
    invertibility_success,
    leverage_distribution,
    uniform_distribution,
    weighted_sample_without_replacement,
)
from ..bayes import (
    BayesianPrior,
    RandomizedGreedyConfig,
    lmmse_estimate,
    objective_direct,
    random_prior,
    select_greedy,
    select_randomized_greedy,
)
from ..errors import DegenerateSupportError, SingularMatrixError
from ..fileio import load_matrix_market, write_rows
from ..graphs import erdos_renyi, uav_network
from ..omp import iterative_select, reconstruct_gls, reconstruct_noiseless, recovery_error
from ..rng import RngStream
from ..spectral import (
    LAPLACIAN,
    ZERO_ROW_TOL,
    FrequencySupport,
    NoiseModel,
    build_spectral_basis,
    frequency_submatrix,
)
from ..support import adaptive_sample, identifiability_margin, recover_support
from ..theory import curvature_upper_bound, exhaustive_optimum, expectation_bound
from .config import EXPERIMENTS, MIN_EPSILON

KNOWN_SUPPORT_HEADER = [
    "experiment", "trial", "method", "k", "m", "recovery_error", "success", "wall_clock_ns",
]
BAYES_HEADER = [
    "experiment", "trial", "method", "epsilon", "k", "m", "trace_mse", "f_value",
    "bound_rhs", "recovery_error", "wall_clock_ns",
]
SUPPORT_HEADER = [
    "experiment", "trial", "num_signals", "noise_eps", "k", "margin", "identifiable",
    "exact_recovery", "adaptive_error", "wall_clock_ns",
]

_STREAM_BLOCK = 10**7


def _code(name):
    return EXPERIMENTS.index(name) + 1


def _stream(cfg):
    return RngStream(cfg.master_seed, _code(cfg.experiment))


def _sub_stream(cfg, trial, k_idx, m_idx, e_idx):
    # private stream handed to randomized greedy; disjoint from every (code, ...) key
    if not (trial < 10**4 and max(k_idx, m_idx, e_idx) < 10):
        raise ValueError("too many trials or sweep values for the stream layout")
    sid = trial * 1000 + k_idx * 100 + m_idx * 10 + e_idx
    return RngStream(cfg.master_seed, _code(cfg.experiment) * _STREAM_BLOCK + sid)


def _limit_threads():
    # single-threaded BLAS keeps floating-point reductions identical in every process
    threadpool_limits(1)


def _run_jobs(cfg, fn, jobs):
    job_fn = partial(fn, cfg)
    if cfg.workers == 1:
        with threadpool_limits(1):
            chunks = [job_fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_limit_threads) as ex:
            chunks = list(ex.map(job_fn, jobs, chunksize=max(1, len(jobs) // (8 * cfg.workers))))
    return [row for chunk in chunks for row in chunk]


class _Timer:
    def __init__(self, enabled):
        self.enabled = enabled
        self.ns = None

    def __enter__(self):
        self._t0 = time.perf_counter_ns()
        return self

    def __exit__(self, *exc):
        self.ns = max(1, time.perf_counter_ns() - self._t0) if self.enabled else None


def _resolve_epsilon(eps, m):
    return math.exp(-m) if eps == MIN_EPSILON else float(eps)


def _lstsq_fit(U, S, y):
    coeff = np.linalg.lstsq(U[S.index], y[S.index], rcond=None)[0]
    return U @ coeff


def _full_rank(U, S):
    if len(S) == U.shape[1]:
        return invertibility_success(U, S)
    s = np.linalg.svd(U[S.index], compute_uv=False)
    return bool(s[-1] / s[0] > 1e-10)


def _reconstruct(U, S, y, variance):
    try:
        if variance == 0 and len(S) == U.shape[1]:
            return reconstruct_noiseless(U, S, y[S.index]).x_hat
        return reconstruct_gls(U, S, y[S.index], variance if variance > 0 else 1.0).x_hat
    except SingularMatrixError:
        # baselines may pick a rank-deficient set; fall back to minimum-norm least squares
        return _lstsq_fit(U, S, y)


def _er_known_support_job(cfg, job):
    trial, k = job
    gen = _stream(cfg).generator(trial, k)
    n = cfg.n
    while True:
        basis = build_spectral_basis(erdos_renyi(n, cfg.p, gen))
        try:
            U = frequency_submatrix(basis, FrequencySupport.first(k))
            break
        except DegenerateSupportError:
            continue
    x = U @ gen.normal(0.0, cfg.amplitude_sigma, size=k)
    y = x + math.sqrt(cfg.noise_variance) * gen.standard_normal(n)
    start = int(gen.integers(n))
    rows = []
    for m in cfg.ms_for(k):
        if m < k or m > n:
            raise ValueError(f"need k <= m <= n, got k={k}, m={m}")
        picks = {}
        with _Timer(cfg.timing) as t:
            picks["omp"] = iterative_select(U, m, start)
        times = {"omp": t.ns}
        for name, dist in (("uniform", uniform_distribution(n)),
                           ("leverage", leverage_distribution(U))):
            with _Timer(cfg.timing) as t:
                picks[name] = weighted_sample_without_replacement(dist, m, gen)
            times[name] = t.ns
        for name in ("omp", "uniform", "leverage"):
            S = picks[name]
            err = recovery_error(_reconstruct(U, S, y, cfg.noise_variance), x)
            rows.append([cfg.experiment, trial, name, k, m, err, _full_rank(U, S), times[name]])
    return rows


def run_er_known_support(cfg):
    jobs = [(t, k) for t in range(cfg.trials) for k in cfg.k_values]
    return KNOWN_SUPPORT_HEADER, _run_jobs(cfg, _er_known_support_job, jobs)


def _bayes_row(cfg, trial, method, eps, k, m, U, prior, noise, S, ns, signals, bound=None):
    """One CSV row; the recovery error is averaged over the (x, y) signal pairs."""
    f = objective_direct(U, prior, noise, S)
    errs = [recovery_error(lmmse_estimate(U, prior, noise, S, y[S.index]).x_hat, x)
            for x, y in signals]
    return [cfg.experiment, trial, method, eps, k, m, prior.trace - f, f, bound,
            float(np.mean(errs)), ns]


def _prior_signal(U, prior, noise, gen):
    coeff = np.linalg.cholesky(prior.prior_cov) @ gen.standard_normal(prior.k)
    x = U @ coeff
    return x, x + np.sqrt(noise.node_variances(U.shape[0])) * gen.standard_normal(U.shape[0])


def _compare_selectors(cfg, trial, key, k, m, U, prior, noise, signals, bound_fn=None):
    """Greedy row plus one randomized-greedy row per epsilon."""
    rows = []
    with _Timer(cfg.timing) as t:
        S, _ = select_greedy(U, prior, noise, m)
    rows.append(_bayes_row(cfg, trial, "greedy", None, k, m, U, prior, noise, S, t.ns, signals))
    for e_idx, eps in enumerate(cfg.epsilons):
        e = _resolve_epsilon(eps, m)
        # below exp(-m) the candidate pool is already every remaining node
        rg = RandomizedGreedyConfig(m, max(e, math.exp(-m)), _sub_stream(cfg, trial, *key, e_idx))
        with _Timer(cfg.timing) as t:
            S, _ = select_randomized_greedy(U, prior, noise, rg)
        bound = bound_fn(e) if bound_fn else None
        rows.append(_bayes_row(cfg, trial, "rgreedy", e, k, m, U, prior, noise, S, t.ns,
                               signals, bound))
    return rows


def _er_small_hist_job(cfg, trial):
    gen = _stream(cfg).generator(trial)
    n, k = cfg.n, cfg.k_values[0]
    m = cfg.ms_for(k)[0]
    while True:
        basis = build_spectral_basis(erdos_renyi(n, cfg.p, gen))
        try:
            U = frequency_submatrix(basis, FrequencySupport.first(k))
            break
        except DegenerateSupportError:
            continue
    prior = random_prior(k, gen)
    noise = NoiseModel.diagonal(gen.uniform(0.5, 1.5, size=n))
    x, y = _prior_signal(U, prior, noise, gen)
    c = curvature_upper_bound(prior, noise)
    with _Timer(cfg.timing) as t:
        O, f_opt = exhaustive_optimum(U, prior, noise, m)
    opt_trace = prior.trace - f_opt
    signals = [(x, y)]
    rows = [_bayes_row(cfg, trial, "optimum", None, k, m, U, prior, noise, O, t.ns, signals)]
    rows += _compare_selectors(
        cfg, trial, (0, 0), k, m, U, prior, noise, signals,
        bound_fn=lambda e: expectation_bound(prior, n, m, e, c, opt_trace).expectation_rhs,
    )
    return rows


def run_er_small_hist(cfg):
    return BAYES_HEADER, _run_jobs(cfg, _er_small_hist_job, list(range(cfg.trials)))


def _prune(U):
    keep = np.linalg.norm(U, axis=1) > ZERO_ROW_TOL
    return U[keep], np.flatnonzero(keep)


def _uav_job(cfg, trial):
    gen = _stream(cfg).generator(trial)
    graph, pts = uav_network(cfg.n, cfg.side, cfg.radius, gen)
    basis = build_spectral_basis(graph.laplacian())
    noise = NoiseModel.white(cfg.noise_variance)
    rows = []
    for k_idx, k in enumerate(cfg.k_values):
        # nodes whose spectral rows vanish on the low band carry no information; drop them
        U, nodes = _prune(basis.V[:, :k])
        coeffs = basis.V[:, :k].T @ pts  # k x 2, one column per coordinate signal
        power = np.mean(coeffs**2, axis=1)
        prior = BayesianPrior(np.diag(np.maximum(power, 1e-6 * max(power.max(), 1.0))))
        signals = []
        for d in range(2):
            x = U @ coeffs[:, d]
            signals.append((x, x + math.sqrt(cfg.noise_variance) * gen.standard_normal(x.size)))
        for m_idx, m in enumerate(cfg.ms_for(k)):
            if m > nodes.size:
                raise ValueError(f"m={m} exceeds the {nodes.size} informative nodes")
            rows += _compare_selectors(cfg, trial, (k_idx, m_idx), k, m, U, prior, noise, signals)
    return rows


def run_uav(cfg):
    return BAYES_HEADER, _run_jobs(cfg, _uav_job, list(range(cfg.trials)))


@lru_cache(maxsize=4)
def _laplacian_basis(path):
    return build_spectral_basis(load_matrix_market(path).laplacian())


def _roadnet_job(cfg, trial):
    gen = _stream(cfg).generator(trial)
    basis = _laplacian_basis(cfg.graph_path)
    noise = NoiseModel.white(cfg.noise_variance)
    rows = []
    for k_idx, k in enumerate(cfg.k_values):
        U, _ = _prune(basis.V[:, :k])
        prior = random_prior(k, gen)
        signals = [_prior_signal(U, prior, noise, gen)]
        for m_idx, m in enumerate(cfg.ms_for(k)):
            rows += _compare_selectors(cfg, trial, (k_idx, m_idx), k, m, U, prior, noise, signals)
    return rows


def run_roadnet(cfg, graph_path=None):
    graph_path = graph_path or cfg.graph_path
    if not graph_path:
        raise ValueError("roadnet needs a Matrix Market graph path")
    cfg = replace(cfg, graph_path=str(graph_path))
    return BAYES_HEADER, _run_jobs(cfg, _roadnet_job, list(range(cfg.trials)))


def _unit_columns(n, p, gen):
    d = gen.standard_normal((n, p))
    return d / np.linalg.norm(d, axis=0)


def _support_recovery_job(cfg, trial):
    gen = _stream(cfg).generator(trial)
    n, k = cfg.n, cfg.k_values[0]
    while True:
        graph = erdos_renyi(n, cfg.p, gen)
        if np.all(graph.entries.sum(axis=1) > 0):
            break
    basis = build_spectral_basis(graph)
    true = FrequencySupport.from_any(gen.choice(n, size=k, replace=False))
    rows = []
    for P in cfg.num_signals:
        for eps in cfg.noise_levels:
            Xbar = np.zeros((n, P))
            Xbar[list(true.indices)] = gen.standard_normal((k, P))
            Y = basis.V @ Xbar + eps * _unit_columns(n, P, gen)
            with _Timer(cfg.timing) as t:
                est = recover_support(basis.V.T @ Y, k)
            margin = identifiability_margin(Xbar, eps)
            x = basis.V[:, list(true.indices)] @ gen.standard_normal(k)
            try:
                est2, S = adaptive_sample(Y, basis, k, "omp", m=k)
                Uh = frequency_submatrix(basis, est2.support)
                err = recovery_error(reconstruct_noiseless(Uh, S, x[S.index]).x_hat, x)
            except (DegenerateSupportError, SingularMatrixError, ValueError):
                err = None
            rows.append([cfg.experiment, trial, P, eps, k, margin, margin > 0,
                         est.support == true, err, t.ns])
    return rows


def run_support_recovery(cfg):
    return SUPPORT_HEADER, _run_jobs(cfg, _support_recovery_job, list(range(cfg.trials)))


RUNNERS = {
    "er_known_support": run_er_known_support,
    "er_small_hist": run_er_small_hist,
    "uav": run_uav,
    "roadnet": run_roadnet,
    "support_recovery": run_support_recovery,
}


def run_experiment(cfg):
    """Run the configured experiment and write its CSV when ``cfg.out`` is set."""
    header, rows = RUNNERS[cfg.experiment](cfg)
    if cfg.out:
        write_rows(cfg.out, header, rows)
    return header, rows
