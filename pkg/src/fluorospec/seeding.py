"""Named, splittable random streams.

Every stochastic step draws from a PCG64 generator seeded by
``numpy.random.SeedSequence(entropy=seed, spawn_key=path)``. ``path`` is a
tuple of non-negative integers; string components are mapped through
``zlib.crc32`` of their UTF-8 bytes. A stream is therefore a pure function of
the global seed and its name, e.g. ``("synth", 0, 3)`` for sample 3 of class
0, or ``("split", 17)`` for holdout repetition 17.
"""
import zlib

import numpy as np

SEED_MAX = 2 ** 64 - 1


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    if part < 0:
        raise ValueError(f"stream path components must be >= 0, got {part}")
    return part


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def seed_sequence(seed, *path):
    return np.random.SeedSequence(check_seed(seed), spawn_key=tuple(_key(p) for p in path))


def stream(seed, *path):
    """Independent ``numpy.random.Generator`` named by ``path``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def sub_seed(seed, *path):
    """Derive a 64-bit integer seed named by ``path`` (e.g. 'synth', 'split', 'init')."""
    lo, hi = seed_sequence(seed, *path).generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
