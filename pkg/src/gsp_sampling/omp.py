"""Iterative selection sampling and least-squares reconstruction.

The sampler picks nodes whose spectral rows best correlate with a residual
vector kept orthogonal to the rows already chosen, so every pick adds a new
direction and ``k`` picks give an invertible ``k x k`` sampled submatrix.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import SingularMatrixError
from .rng import as_generator

RCOND_MIN = 1e-12
RESIDUAL_TOL = 1e-10
DEPENDENT_TOL = 1e-12


@dataclass(frozen=True)
class SamplingSet:
    """Selected node indices in selection order."""

    order: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if len(set(order)) != len(order):
            raise ValueError("sampling set contains duplicate nodes")
        if any(i < 0 for i in order):
            raise ValueError("node indices must be non-negative")
        object.__setattr__(self, "order", order)

    @property
    def as_set(self):
        return frozenset(self.order)

    @property
    def index(self):
        return np.array(self.order, dtype=int)

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def check_bounds(self, n):
        if self.order and max(self.order) >= n:
            raise ValueError(f"node index {max(self.order)} out of range for n={n}")


@dataclass(frozen=True)
class ResidualState:
    residual: np.ndarray
    ortho_rows: np.ndarray  # shape (r, k), orthonormal rows

    @classmethod
    def start(cls, u):
        u = np.asarray(u, dtype=float)
        return cls(u.copy(), np.empty((0, u.shape[0])))


def _project_out(v, Q):
    # two passes of Gram-Schmidt against the rows of Q
    for _ in range(2):
        if Q.shape[0]:
            v = v - Q.T @ (Q @ v)
    return v


def update_residual(state, u_new):
    """Orthonormalize ``u_new`` against the kept rows and re-project the residual.

    A row whose orthogonal part is negligible relative to its norm is not
    appended.  Cost is O(k * |S|).
    """
    u_new = np.asarray(u_new, dtype=float)
    Q = state.ortho_rows
    q = _project_out(u_new, Q)
    nq = np.linalg.norm(q)
    if nq >= DEPENDENT_TOL * max(np.linalg.norm(u_new), np.finfo(float).tiny):
        Q = np.vstack([Q, q / nq])
    return ResidualState(_project_out(state.residual, Q), Q)


def _argmax_lowest(values):
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(values))


def _check_design(U, m):
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ValueError("U must be a 2-D array")
    n, k = U.shape
    if not k <= m <= n:
        raise ValueError(f"need k <= m <= n, got k={k}, m={m}, n={n}")
    norms = np.linalg.norm(U, axis=1)
    if np.any(norms <= DEPENDENT_TOL):
        raise ValueError(f"U has all-zero rows: {np.flatnonzero(norms <= DEPENDENT_TOL)[:5]}")
    s = np.linalg.svd(U, compute_uv=False)
    if s[-1] <= RCOND_MIN * s[0]:
        raise ValueError(f"U is column rank deficient (rcond {s[-1] / s[0]:.2e})")
    return U


def iterative_select(U, m, start_node=0, rng=None):
    """Select ``m`` nodes by residual correlation.

    Each round picks the unselected node maximizing ``(r^T u_j)^2 / |u_j|^2``
    (lowest index on ties).  If the residual vanishes before ``k`` rows are
    chosen, it is re-seeded from the unselected node with the largest
    component orthogonal to the chosen rows.  Once ``k`` rows are chosen the
    remaining ``m - k`` picks take the largest row norms.  ``start_node=None``
    draws the residual node from ``rng``.
    """
    U = _check_design(U, m)
    n, k = U.shape
    if start_node is None:
        start_node = int(as_generator(rng).integers(n)) if rng is not None else 0
    if not 0 <= start_node < n:
        raise ValueError(f"start node {start_node} out of range for n={n}")

    norms2 = np.einsum("ij,ij->i", U, U)
    anchor = np.sqrt(norms2[start_node])
    available = np.ones(n, dtype=bool)
    proj = U.copy()  # rows projected onto the complement of the chosen span
    state = ResidualState.start(U[start_node])
    order = []
    while len(order) < m:
        if len(order) >= k:
            j = _argmax_lowest(np.where(available, norms2, -np.inf))
        else:
            if np.linalg.norm(state.residual) < RESIDUAL_TOL * anchor:
                pn = np.where(available, np.einsum("ij,ij->i", proj, proj), -np.inf)
                seed = _project_out(proj[_argmax_lowest(pn)], state.ortho_rows)
                state = ResidualState(seed, state.ortho_rows)
            scores = (U @ state.residual) ** 2 / norms2
            j = _argmax_lowest(np.where(available, scores, -np.inf))
            before = state.ortho_rows.shape[0]
            state = update_residual(state, U[j])
            if state.ortho_rows.shape[0] > before:
                q = state.ortho_rows[-1]
                proj -= np.outer(proj @ q, q)
        order.append(j)
        available[j] = False
    return SamplingSet(tuple(order))


@dataclass(frozen=True)
class Reconstruction:
    x_hat: np.ndarray
    coeff_hat: np.ndarray
    condition_number: float
    error_bound: Optional[float] = None


def _rows(U, S):
    U = np.asarray(U, dtype=float)
    S.check_bounds(U.shape[0])
    return U, U[S.index]


def reconstruct_noiseless(U, S, samples):
    """Invert the sampled square submatrix: x_hat = U (U_S)^-1 samples."""
    U, US = _rows(U, S)
    if US.shape[0] != US.shape[1]:
        raise ValueError(f"need |S| = k, got |S|={US.shape[0]}, k={US.shape[1]}")
    s = np.linalg.svd(US, compute_uv=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if not 1.0 / cond > RCOND_MIN:
        raise SingularMatrixError("sampled submatrix is singular", cond)
    coeff = np.linalg.solve(US, np.asarray(samples, dtype=float))
    return Reconstruction(U @ coeff, coeff, float(cond))


def _cov_factor(Q_S, m):
    Q = np.asarray(Q_S, dtype=float)
    if Q.ndim == 0:
        Q = np.full(m, float(Q))
    if Q.ndim == 1:
        if Q.shape[0] != m or np.any(Q <= 0):
            raise ValueError("noise variances must be positive and match |S|")
        return np.diag(np.sqrt(Q))
    if Q.shape != (m, m):
        raise ValueError(f"noise covariance must be {m} x {m}")
    if np.abs(Q - Q.T).max() > 1e-12 * max(1.0, np.abs(Q).max()):
        raise ValueError("noise covariance must be symmetric")
    try:
        return sla.cholesky(Q, lower=True)
    except np.linalg.LinAlgError:
        raise ValueError("noise covariance must be positive definite") from None


def _whitened_svd(U, S, Q_S):
    U, US = _rows(U, S)
    m, k = US.shape
    if m < k:
        raise ValueError(f"need |S| >= k, got |S|={m}, k={k}")
    L = _cov_factor(Q_S, m)
    A = sla.solve_triangular(L, US, lower=True)
    W, s, Vt = np.linalg.svd(A, full_matrices=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if not 1.0 / cond > RCOND_MIN:
        raise SingularMatrixError("weighted normal matrix is singular", cond)
    return U, L, W, s, Vt, float(cond)


def reconstruct_gls(U, S, noisy_samples, Q_S):
    """Generalized least squares fit of the spectral coefficients.

    Solves the weighted normal equations through an SVD of the whitened
    design ``L^-1 U_S`` (``Q_S = L L^T``) rather than forming them.
    """
    U, L, W, s, Vt, cond = _whitened_svd(U, S, Q_S)
    b = sla.solve_triangular(L, np.asarray(noisy_samples, dtype=float), lower=True)
    coeff = Vt.T @ ((W.T @ b) / s)
    return Reconstruction(U @ coeff, coeff, cond)


def error_bound(U, S, Q_S, eps_n):
    """Worst-case ||x_hat - x|| over noise with ||n|| <= eps_n."""
    if eps_n < 0:
        raise ValueError("eps_n must be non-negative")
    _, L, W, s, Vt, _ = _whitened_svd(U, S, Q_S)
    G = Vt.T @ ((W.T / s[:, None]) @ sla.solve_triangular(L, np.eye(L.shape[0]), lower=True))
    return float(np.linalg.norm(G, 2)) * float(eps_n)


def recovery_error(x_hat, x):
    """Error energy relative to the true signal energy."""
    x = np.asarray(x, dtype=float)
    e = float(x @ x)
    if e == 0:
        raise ValueError("true signal has zero energy")
    d = np.asarray(x_hat, dtype=float) - x
    return float(d @ d) / e
