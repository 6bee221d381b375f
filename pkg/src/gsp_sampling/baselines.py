"""Random selection-sampling baselines and the invertibility success metric."""

from dataclasses import dataclass

import numpy as np

from .omp import SamplingSet
from .rng import as_generator

SUCCESS_RCOND = 1e-10


@dataclass(frozen=True)
class SamplingDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be a non-negative finite vector")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self):
        return self.probs.shape[0]


def uniform_distribution(n):
    if n < 1:
        raise ValueError("need at least one node")
    return SamplingDistribution(np.full(n, 1.0 / n))


def leverage_distribution(U):
    """p_i = |u_i|^2 / k for a matrix with orthonormal columns."""
    U = np.asarray(U, dtype=float)
    lev = np.einsum("ij,ij->i", U, U)
    k = U.shape[1]
    if abs(lev.sum() - k) > 1e-6:
        raise ValueError(f"U columns are not orthonormal (sum of leverages {lev.sum():.6g} != {k})")
    # dividing by the realized total keeps the simplex invariant exact up to rounding
    return SamplingDistribution(lev / lev.sum())


def weighted_sample_without_replacement(dist, m, rng=None):
    """Sequential draws, renormalizing over the remaining nodes after each pick."""
    p = np.array(dist.probs)
    if m > np.count_nonzero(p) or m < 0:
        raise ValueError(f"cannot draw {m} distinct nodes from {np.count_nonzero(p)} with mass")
    gen = as_generator(rng)
    order = []
    for _ in range(m):
        c = np.cumsum(p)
        j = int(np.searchsorted(c, gen.random() * c[-1], side="right"))
        j = min(j, p.size - 1)
        while p[j] == 0:  # guard against landing on a zero-mass slot at the boundary
            j -= 1
        order.append(j)
        p[j] = 0.0
    return SamplingSet(tuple(order))


def invertibility_success(U, S, rcond=SUCCESS_RCOND):
    """Whether the sampled square submatrix has reciprocal condition number above ``rcond``."""
    US = np.asarray(U, dtype=float)[S.index]
    if US.shape[0] != US.shape[1]:
        raise ValueError(f"need |S| = k, got |S|={US.shape[0]}, k={US.shape[1]}")
    s = np.linalg.svd(US, compute_uv=False)
    return bool(s[0] > 0 and s[-1] / s[0] > rcond)
