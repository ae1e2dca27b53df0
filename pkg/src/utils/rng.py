"""
Reproducible random streams.

All randomness comes from numpy's counter-based Philox bit generator. Child
seeds are derived with SHA-256 so any implementation can reproduce them:

    child_seed = int.from_bytes(sha256(f"{master_seed}:{key}").digest()[:8], "little")
"""

import hashlib
from typing import Union

import numpy as np

RNG_ALGORITHM = "numpy.Philox"
SEED_DERIVATION = "sha256(f'{master_seed}:{key}')[:8] little-endian"

SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, key: Union[int, str]) -> int:
    """
    Derive a 64-bit child seed from a master seed and a key

    Args:
        master_seed: Parent seed
        key: Repeat index, user index or stream name

    Returns:
        Child seed in [0, 2**64)
    """
    digest = hashlib.sha256(f"{int(master_seed) & SEED_MASK}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    """Generator over a Philox stream keyed by seed."""
    return np.random.Generator(np.random.Philox(int(seed) & SEED_MASK))
