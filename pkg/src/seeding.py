"""Seed handling for reproducible fits and simulations.

Every random draw in repsample goes through a `numpy.random.Generator`
built from an explicit 64-bit seed. Nested loops (restarts, evaluation
runs) derive their own seeds from a master seed and the loop indices,
so any single fit can be reproduced in isolation.
"""

from __future__ import annotations

import numpy as np

from src.config import UINT64_MAX
from src.errors import InvalidArguments


def check_seed(seed: int) -> int:
    """Returns `seed` if it is a 64-bit unsigned integer."""
    if isinstance(seed, bool) or not isinstance(seed, int | np.integer):
        raise InvalidArguments(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= UINT64_MAX:
        raise InvalidArguments(
            f"seed must lie in [0, 2**64 - 1], got {seed!r}"
        )
    return int(seed)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(check_seed(seed))


def derive_seed(seed: int, *keys: int) -> int:
    """
    Derives a 64-bit sub-seed from `seed` and a path of integer `keys`.

    The same (seed, keys) always yields the same sub-seed, and distinct
    key paths yield independent streams.

    >>> derive_seed(0, 3, 1) == derive_seed(0, 3, 1)
    True
    """
    sequence = np.random.SeedSequence(
        check_seed(seed), spawn_key=tuple(int(key) for key in keys)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
