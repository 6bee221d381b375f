"""Reproducible random streams.

Every stochastic routine takes an :class:`RngStream` (or a ready
``numpy.random.Generator``).  A stream is identified by a master seed and a
stream id; extra integer keys derive independent child generators, e.g. one
per (trial, bandwidth) pair, so Monte Carlo results do not depend on the
order in which trials are scheduled.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if int(self.stream_id) < 0:
            raise ValueError("stream_id must be non-negative")

    def seed_sequence(self, *subkeys):
        keys = (int(self.stream_id),) + tuple(int(k) for k in subkeys)
        return np.random.SeedSequence(int(self.master_seed), spawn_key=keys)

    def generator(self, *subkeys):
        """Fresh generator; identical arguments give identical draw sequences."""
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*subkeys)))

    def child(self, stream_id):
        return RngStream(self.master_seed, stream_id)


def as_generator(rng, *subkeys):
    """Accept an RngStream, a Generator, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng.generator(*subkeys)
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
