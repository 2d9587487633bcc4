"""Seeded random streams.

One master seed is expanded with :class:`numpy.random.SeedSequence` into three
independent children, always spawned in the same order:

0. ``init``        live-point initialization and uniform design samples
1. ``proposals``   ellipsoid proposal draws
2. ``uncertainty`` generation of the uncertainty ensemble

Consuming one stream never shifts another, so e.g. the number of model
evaluations spent on a proposal cannot change which proposals are drawn.
"""
from typing import NamedTuple

import numpy as np

__all__ = ["Streams", "spawn_streams"]


class Streams(NamedTuple):
    init: np.random.Generator
    proposals: np.random.Generator
    uncertainty: np.random.Generator


def spawn_streams(seed) -> Streams:
    if isinstance(seed, bool) or int(seed) != seed:
        raise ValueError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    children = np.random.SeedSequence(seed).spawn(3)
    return Streams(*(np.random.Generator(np.random.PCG64(c)) for c in children))
