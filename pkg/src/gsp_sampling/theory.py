"""Checkable forms of the approximation guarantees for the MSE objective.

Everything here is evaluated with the direct (non-recursive) objective so it
can serve as an oracle for the fast selection code in :mod:`bayes`.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bayes import _node_variances, candidate_count, objective_direct
from .errors import GuardExceededError
from .omp import SamplingSet
from .rng import as_generator

EXHAUSTIVE_GUARD = 10**6


def curvature_upper_bound(prior, noise, n=None):
    """max_j (lmax/lmin)^2 (1 + lmax/sigma_j^2)^3 over the node noise variances."""
    if noise.variant == "white":
        var = np.array([noise.variance])
    else:
        var = noise.node_variances(n if n is not None else noise.variances.shape[0])
    if np.any(var <= 0):
        raise ValueError("curvature bound needs positive noise variances")
    lmax, lmin = prior.lambda_max, prior.lambda_min
    return float(np.max((lmax / lmin) ** 2 * (1.0 + lmax / var) ** 3))


def gain_direct(U, prior, noise, S, j):
    """f(S + j) - f(S) from two direct posterior solves."""
    S = tuple(S)
    return objective_direct(U, prior, noise, S + (j,)) - objective_direct(U, prior, noise, S)


def _random_nested(n, gen):
    # T has 1..n-1 nodes, S is a strict subset of T, j lies outside T
    perm = gen.permutation(n)
    t = int(gen.integers(1, n))
    s = int(gen.integers(0, t))
    T = tuple(sorted(perm[:t].tolist()))
    S = tuple(sorted(gen.choice(T, size=s, replace=False).tolist())) if s else ()
    j = int(perm[t + int(gen.integers(0, n - t))])
    return S, T, j


def empirical_curvature(U, prior, noise, trials, rng=None):
    """Largest sampled ratio f_j(T) / f_j(S) over random S strictly inside T, j outside T.

    A lower estimate of the maximum element-wise curvature.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    gen = as_generator(rng)
    best = 0.0
    for _ in range(trials):
        S, T, j = _random_nested(n, gen)
        best = max(best, gain_direct(U, prior, noise, T, j) / gain_direct(U, prior, noise, S, j))
    return best


def curvature_lemma_sides(U, prior, noise, S, T, c):
    """Both sides of f(T) - f(S) <= ((1 + (r-1)c)/r) sum_{j in T\\S} f_j(S)."""
    S, T = tuple(S), tuple(T)
    extra = [j for j in T if j not in set(S)]
    r = len(extra)
    if r == 0 or not set(S) < set(T):
        raise ValueError("S must be a strict subset of T")
    lhs = objective_direct(U, prior, noise, T) - objective_direct(U, prior, noise, S)
    rhs = (1 + (r - 1) * c) / r * sum(gain_direct(U, prior, noise, S, j) for j in extra)
    return lhs, rhs


@dataclass(frozen=True)
class TheoryReport:
    c: float
    curvature_bound: float
    alpha: float
    beta: float
    s: int
    expectation_rhs: Optional[float] = None


def expectation_bound(prior, n, m, epsilon, c, optimum_trace=None):
    """Constants of the in-expectation guarantee for randomized greedy.

    ``c`` is any upper bound on the curvature (at least 1).  An ``epsilon``
    below exp(-m) is accepted: the candidate pool is then already every
    remaining node, and the smaller value only tightens alpha.  With
    ``optimum_trace`` the right-hand side alpha Tr(Sigma_O) + (1-alpha) Tr(P)
    is filled in.
    """
    if c < 1:
        raise ValueError("curvature constant must be >= 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    cc = max(1.0, float(c))
    s = candidate_count(n, m, epsilon)
    beta = 1.0 if s >= n else 1.0 + max(0.0, s / (2 * n) - 1 / (2 * (n - s)))
    alpha = 1 - math.exp(-1 / cc) - epsilon**beta / cc
    rhs = None
    if optimum_trace is not None:
        rhs = alpha * optimum_trace + (1 - alpha) * prior.trace
    return TheoryReport(cc, float(c), alpha, beta, s, rhs)


def eta_guarantee(etas, m, c):
    """Fraction 1 - exp(-sum(eta)/(m c)) of f(O) that the run must reach."""
    return 1 - math.exp(-sum(etas) / (m * max(1.0, c)))


def exhaustive_optimum(U, prior, noise, m, guard=EXHAUSTIVE_GUARD):
    """Best size-m set by full enumeration (lexicographically first on ties)."""
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= N, got m={m}, N={n}")
    size = math.comb(n, m)
    if size > guard:
        raise GuardExceededError(f"C({n}, {m}) = {size} subsets exceeds guard {guard}", size)
    _node_variances(noise, n)
    best_set, best_f = None, -np.inf
    for combo in itertools.combinations(range(n), m):
        f = objective_direct(U, prior, noise, combo)
        if f > best_f:
            best_set, best_f = combo, f
    return SamplingSet(best_set), float(best_f)


def gwss_check(spectral_cov, tol=1e-8):
    """True when the spectral covariance is diagonal up to ``tol`` x its largest diagonal."""
    C = np.asarray(spectral_cov, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("covariance must be square")
    off = C - np.diag(np.diag(C))
    return bool(np.abs(off).max(initial=0.0) <= tol * np.abs(np.diag(C)).max(initial=0.0))
