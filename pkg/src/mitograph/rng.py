"""Deterministic random streams.

Every stochastic routine takes either a ``numpy.random.Generator`` or an
integer seed. Ensembles derive one independent stream per work block from
``(seed, purpose, block)`` through ``numpy.random.SeedSequence`` spawn keys,
so results never depend on how blocks are scheduled across workers.
"""

from __future__ import annotations

import zlib

import numpy as np


def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode())


def stream(seed: int, *key: int | str) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *key)``."""
    spawn_key = tuple(_purpose_key(k) if isinstance(k, str) else int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))


def as_generator(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)
