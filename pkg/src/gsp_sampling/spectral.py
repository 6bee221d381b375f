"""Graph matrices, spectral bases and bandlimited signal synthesis."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSupportError, NumericalError, SymmetryError
from .rng import as_generator

ADJACENCY = "adjacency"
LAPLACIAN = "laplacian"
DESCENDING = "descending_value"
ASCENDING = "ascending_value"

SIGN_TOL = 1e-10
ZERO_ROW_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphMatrix:
    """Dense symmetric matrix describing an undirected graph."""

    entries: np.ndarray
    kind: str = ADJACENCY

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"graph matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("graph matrix has non-finite entries")
        if self.kind not in (ADJACENCY, LAPLACIAN):
            raise ValueError(f"unknown graph matrix kind {self.kind!r}")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        asym = float(np.abs(m - m.T).max(initial=0.0))
        if asym > 1e-12 * scale:
            raise SymmetryError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def n(self):
        return self.entries.shape[0]

    def laplacian(self):
        """Combinatorial Laplacian D - A of an adjacency matrix."""
        if self.kind == LAPLACIAN:
            return self
        a = self.entries
        return GraphMatrix(np.diag(a.sum(axis=1)) - a, kind=LAPLACIAN)

    def edge_count(self):
        off = self.entries[np.triu_indices(self.n, 1)]
        return int(np.count_nonzero(off))


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal eigenvectors (columns of ``V``) with their eigenvalues."""

    V: np.ndarray
    eigenvalues: np.ndarray
    ordering: str = DESCENDING

    def __post_init__(self):
        object.__setattr__(self, "V", _frozen(self.V))
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))

    @property
    def n(self):
        return self.V.shape[0]

    def orthogonality_error(self):
        return float(np.abs(self.V.T @ self.V - np.eye(self.n)).max(initial=0.0))

    def residual(self, graph):
        """max |M V - V diag(lambda)|, relative to max(1, max |lambda|)."""
        r = graph.entries @ self.V - self.V * self.eigenvalues
        scale = max(1.0, float(np.abs(self.eigenvalues).max(initial=0.0)))
        return float(np.abs(r).max(initial=0.0)) / scale


def default_ordering(kind):
    # low-pass means large eigenvalues for an adjacency, small ones for a Laplacian
    return DESCENDING if kind == ADJACENCY else ASCENDING


def build_spectral_basis(graph, ordering=None):
    """Eigendecomposition of a symmetric graph matrix.

    Eigenpairs are sorted by value (descending for adjacency matrices,
    ascending for Laplacians unless ``ordering`` overrides), ties keep the
    solver's original order, and each eigenvector is signed so that its
    first entry with magnitude above ``SIGN_TOL`` is non-negative.
    """
    ordering = ordering or default_ordering(graph.kind)
    if ordering not in (DESCENDING, ASCENDING):
        raise ValueError(f"unknown ordering {ordering!r}")
    try:
        w, V = np.linalg.eigh(graph.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise NumericalError("eigendecomposition returned non-finite values")
    order = np.argsort(-w if ordering == DESCENDING else w, kind="stable")
    w = w[order]
    V = V[:, order]
    lead = np.argmax(np.abs(V) > SIGN_TOL, axis=0)
    signs = np.where(V[lead, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    return SpectralBasis(V * signs, w, ordering)


@dataclass(frozen=True)
class FrequencySupport:
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("frequency support must be non-empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        if idx[0] < 0:
            raise ValueError("support indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def first(cls, k):
        return cls(tuple(range(k)))

    @classmethod
    def from_any(cls, indices):
        return cls(tuple(sorted(int(i) for i in indices)))

    @property
    def k(self):
        return len(self.indices)

    def __len__(self):
        return len(self.indices)


def zero_rows(U, tol=ZERO_ROW_TOL):
    return np.flatnonzero(np.linalg.norm(U, axis=1) <= tol)


def frequency_submatrix(basis, support):
    """Columns of the basis on the support; rejects all-zero rows."""
    if support.indices[-1] >= basis.n:
        raise ValueError(f"support index {support.indices[-1]} out of range for n={basis.n}")
    U = np.array(basis.V[:, list(support.indices)])
    bad = zero_rows(U)
    if bad.size:
        raise DegenerateSupportError(
            f"{bad.size} node(s) have all-zero spectral rows (first: {bad[0]})", bad
        )
    return U


@dataclass(frozen=True)
class BandlimitedSignal:
    support: FrequencySupport
    coeffs: np.ndarray
    vertex_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))
        object.__setattr__(self, "vertex_values", _frozen(self.vertex_values))
        if self.coeffs.shape != (self.support.k,):
            raise ValueError("coefficient vector length must equal the support size")


def synth_signal(basis, support, amplitude_sigma, rng=None):
    """Draw i.i.d. Gaussian spectral amplitudes and map them to the vertices."""
    if amplitude_sigma <= 0:
        raise ValueError("amplitude_sigma must be positive")
    U = frequency_submatrix(basis, support)
    coeffs = as_generator(rng).normal(0.0, amplitude_sigma, size=support.k)
    return BandlimitedSignal(support, coeffs, U @ coeffs)


WHITE = "white"
DIAGONAL = "diagonal"
NORM_BOUNDED = "norm_bounded"


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise: white, independent with per-node variances, or norm bounded.

    A white variance of zero is accepted and means noiseless observation.
    """

    variant: str
    variance: float = 0.0
    variances: Optional[np.ndarray] = field(default=None)
    epsilon: float = 0.0

    def __post_init__(self):
        if self.variant == WHITE:
            if self.variance < 0:
                raise ValueError("noise variance must be non-negative")
        elif self.variant == DIAGONAL:
            v = _frozen(self.variances)
            if v.ndim != 1 or np.any(v <= 0):
                raise ValueError("diagonal noise variances must be a positive vector")
            object.__setattr__(self, "variances", v)
        elif self.variant == NORM_BOUNDED:
            if self.epsilon < 0:
                raise ValueError("noise norm bound must be non-negative")
        else:
            raise ValueError(f"unknown noise variant {self.variant!r}")

    @classmethod
    def white(cls, variance):
        return cls(WHITE, variance=float(variance))

    @classmethod
    def diagonal(cls, variances):
        return cls(DIAGONAL, variances=np.asarray(variances, dtype=float))

    @classmethod
    def norm_bounded(cls, epsilon):
        return cls(NORM_BOUNDED, epsilon=float(epsilon))

    def node_variances(self, n):
        """Per-node variances as a length-n vector (white or diagonal only)."""
        if self.variant == WHITE:
            return np.full(n, self.variance)
        if self.variant == DIAGONAL:
            if self.variances.shape[0] != n:
                raise ValueError(f"noise model has {self.variances.shape[0]} variances, need {n}")
            return np.array(self.variances)
        raise ValueError("norm-bounded noise has no per-node variances")


def add_noise(signal_values, noise, rng=None):
    x = np.asarray(signal_values, dtype=float)
    gen = as_generator(rng)
    if noise.variant == NORM_BOUNDED:
        if noise.epsilon == 0:
            return x.copy()
        d = gen.standard_normal(x.shape[0])
        d /= np.linalg.norm(d)
        return x + gen.uniform(0.0, noise.epsilon) * d
    sd = np.sqrt(noise.node_variances(x.shape[0]))
    return x + sd * gen.standard_normal(x.shape[0])
