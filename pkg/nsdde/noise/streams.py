"""Seed derivation shared by every random draw in nsdde.

The generator for (seed, path_index, stream) is

    Generator(PCG64(SeedSequence(entropy=seed, spawn_key=(path_index, stream))))

`SeedSequence` hashes the 64-bit master seed together with the spawn key
into the 128-bit PCG64 state. This function is part of the reproducibility
contract: changing it changes every published number.
"""

from __future__ import annotations

import numpy as np

from nsdde.errors import InvalidParameterError


BROWNIAN_STREAM = 0
JUMP_STREAM = 1
AUDIT_STREAM = 2
BOOTSTRAP_STREAM = 3

SEED_LIMIT = 2**64


def validate_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed < SEED_LIMIT):
        raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream_generator(seed: int, path_index: int, stream: int) -> np.random.Generator:
    if path_index < 0:
        raise InvalidParameterError(f"path index must be >= 0, got {path_index}")
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.PCG64(sequence))
