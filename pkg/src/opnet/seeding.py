"""Seed derivation.

All randomness flows from one top-level seed. A stream is identified by
``(seed, purpose, *index)``; the purpose tag is hashed with CRC-32 so the
derivation is stable across platforms and Python versions.
"""

import zlib

import numpy as np


def purpose_tag(purpose: str) -> int:
    """Stable integer tag for a purpose string."""
    return zlib.crc32(purpose.encode("utf-8"))


def derive_seed_sequence(seed: int, purpose: str, *index: int) -> np.random.SeedSequence:
    """Seed sequence for one (purpose, index) stream under ``seed``."""
    return np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(purpose_tag(purpose), *(int(i) for i in index)),
    )


def derive_rng(seed: int, purpose: str, *index: int) -> np.random.Generator:
    """PCG64 generator for one (purpose, index) stream under ``seed``."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, purpose, *index)))
