"""Frequency-support recovery from historical signals.

The support is found by keeping the ``k`` rows of the spectral batch with
the largest Euclidean norms, which solves the row-sparse least-squares fit
exactly.  :func:`adaptive_sample` chains this with any of the samplers.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bayes import RandomizedGreedyConfig, select_greedy, select_randomized_greedy
from .errors import GuardExceededError
from .omp import iterative_select
from .spectral import FrequencySupport, frequency_submatrix


def gft_batch(basis, Y):
    """Spectral coefficients V^T Y of every column of ``Y``."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != basis.n:
        raise ValueError(f"batch has {Y.shape[0]} rows, basis has {basis.n} nodes")
    return basis.V.T @ Y


class SignalBatch:
    """Historical vertex-domain signals (one per column) tied to a basis."""

    def __init__(self, vertex_signals, basis):
        Y = np.asarray(vertex_signals, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != basis.n:
            raise ValueError(f"batch has {Y.shape[0]} rows, basis has {basis.n} nodes")
        self.vertex_signals = Y
        self.basis = basis

    @property
    def num_signals(self):
        return self.vertex_signals.shape[1]

    @cached_property
    def spectral_signals(self):
        return gft_batch(self.basis, self.vertex_signals)


@dataclass(frozen=True)
class SupportEstimate:
    support: FrequencySupport
    zeta: float
    row_norms: np.ndarray


def recover_support(Ybar, k):
    """Keep the k rows of largest l2 norm; ties at the threshold go to lower indices.

    O(N P) for the norms plus one O(N log N) sort.
    """
    Ybar = np.asarray(Ybar, dtype=float)
    if Ybar.ndim == 1:
        Ybar = Ybar[:, None]
    n = Ybar.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    norms = np.sqrt(np.einsum("ij,ij->i", Ybar, Ybar))
    order = np.lexsort((np.arange(n), -norms))
    keep = order[:k]
    return SupportEstimate(FrequencySupport.from_any(keep), float(norms[keep[-1]]), norms)


def exhaustive_support_oracle(Ybar, k, guard=10**6):
    """Brute-force best k-row-sparse Frobenius fit (lexicographically first on ties)."""
    Ybar = np.asarray(Ybar, dtype=float)
    if Ybar.ndim == 1:
        Ybar = Ybar[:, None]
    n = Ybar.shape[0]
    size = math.comb(n, k)
    if size > guard:
        raise GuardExceededError(f"C({n}, {k}) = {size} supports exceeds guard {guard}", size)
    best, best_obj = None, np.inf
    for combo in itertools.combinations(range(n), k):
        X = np.zeros_like(Ybar)
        X[list(combo)] = Ybar[list(combo)]
        obj = np.linalg.norm(X - Ybar, "fro") ** 2
        if obj < best_obj:
            best, best_obj = combo, obj
    return FrequencySupport(best), float(best_obj)


def check_identifiability(true_Xbar, epsilon_n, num_signals=None):
    """Sufficient margin for exact recovery: min support-row norm > 2 eps sqrt(P)."""
    X = np.asarray(true_Xbar, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    p = X.shape[1] if num_signals is None else num_signals
    norms = np.linalg.norm(X, axis=1)
    rows = norms[norms > 0]
    if rows.size == 0:
        raise ValueError("true spectral batch has an empty support")
    return bool(rows.min() > 2 * epsilon_n * math.sqrt(p))


def identifiability_margin(true_Xbar, epsilon_n):
    X = np.atleast_2d(np.asarray(true_Xbar, dtype=float).T).T
    norms = np.linalg.norm(X, axis=1)
    return float(norms[norms > 0].min() - 2 * epsilon_n * math.sqrt(X.shape[1]))


def adversarial_noise(basis, true_Xbar, epsilon_n, mode="split"):
    """Per-signal noise of norm exactly ``epsilon_n`` aimed at breaking the threshold.

    ``shrink`` pushes all energy against the weakest support row; ``split``
    divides it between shrinking that row and inflating an off-support row.
    """
    X = np.atleast_2d(np.asarray(true_Xbar, dtype=float).T).T
    norms = np.linalg.norm(X, axis=1)
    on = np.flatnonzero(norms > 0)
    off = np.flatnonzero(norms == 0)
    weak = on[np.argmin(norms[on])]
    if mode == "shrink" or off.size == 0:
        a, b = epsilon_n, 0.0
    elif mode == "split":
        a = b = epsilon_n / math.sqrt(2)
    else:
        raise ValueError(f"unknown adversary mode {mode!r}")
    Nbar = np.zeros_like(X)
    Nbar[weak] = -a * np.where(X[weak] < 0, -1.0, 1.0)
    if b:
        Nbar[off[0]] = b
    return basis.V @ Nbar


def adaptive_sample(Y_hist, basis, k, sampler="omp", **sampler_args):
    """Recover the support from history, then pick sampling nodes on it.

    ``sampler_args``: ``m`` and ``start_node`` for ``omp``; ``prior``,
    ``noise`` and ``m`` for ``greedy``; additionally ``epsilon`` and ``rng``
    (an RngStream) for ``rgreedy``.
    """
    batch = Y_hist if isinstance(Y_hist, SignalBatch) else SignalBatch(Y_hist, basis)
    est = recover_support(batch.spectral_signals, k)
    U = frequency_submatrix(basis, est.support)
    m = sampler_args.get("m", k)
    if sampler == "omp":
        S = iterative_select(U, m, sampler_args.get("start_node", 0))
    elif sampler == "greedy":
        S, _ = select_greedy(U, sampler_args["prior"], sampler_args["noise"], m)
    elif sampler == "rgreedy":
        cfg = RandomizedGreedyConfig(m, sampler_args["epsilon"], sampler_args["rng"])
        S, _ = select_randomized_greedy(U, sampler_args["prior"], sampler_args["noise"], cfg)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    return est, S
