from pathlib import Path

import numpy as np
import pytest

from gsp_sampling import RngStream, build_spectral_basis, erdos_renyi

DATA = Path(__file__).parent / "data"


@pytest.fixture
def minnesota_path():
    return DATA / "minnesota.mtx"


def er_basis(n, p, seed):
    """Adjacency basis of a seeded ER graph without isolated nodes."""
    gen = RngStream(seed).generator()
    while True:
        g = erdos_renyi(n, p, gen)
        if np.all(g.entries.sum(axis=1) > 0):
            return g, build_spectral_basis(g)
