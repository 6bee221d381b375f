"""Random graph generators used by the experiments."""

import numpy as np

from .rng import as_generator
from .spectral import ADJACENCY, GraphMatrix


def erdos_renyi(n, p, rng=None):
    """Undirected G(n, p) adjacency: each upper-triangle edge present w.p. ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError("n must be positive")
    gen = as_generator(rng)
    iu = np.triu_indices(n, 1)
    a = np.zeros((n, n))
    a[iu] = gen.random(iu[0].size) < p
    return GraphMatrix(a + a.T, kind=ADJACENCY)


def geometric_graph(points, radius):
    """Unit-weight edges between distinct points at distance <= radius."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    a = (d2 <= radius * radius).astype(float)
    np.fill_diagonal(a, 0.0)
    return GraphMatrix(a, kind=ADJACENCY)


def uav_network(n, side, radius, rng=None):
    """Positions uniform on [0, side]^2 and their sensing-range graph."""
    if n < 2 or side <= 0 or radius < 0:
        raise ValueError("need n >= 2, side > 0 and radius >= 0")
    pts = as_generator(rng).uniform(0.0, side, size=(n, 2))
    return geometric_graph(pts, radius), pts


def grid_uav_graph(n, side, radius, rng=None):
    return uav_network(n, side, radius, rng)[0]
