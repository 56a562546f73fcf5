"""Deterministic seed derivation for parallel ensembles.

Every trajectory (and every sweep grid point) gets its own counter-based
Philox stream keyed by a hash of the master seed and its index, so results
are bit-identical regardless of chunking or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(*parts: int) -> int:
    """128-bit key from an ordered tuple of integers via SHA-256."""
    h = hashlib.sha256()
    for p in parts:
        h.update(int(p).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest()[:16], "little")


def trajectory_generator(master_seed: int, traj_index: int, *extra: int) -> np.random.Generator:
    """Philox generator for one trajectory of one run."""
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, traj_index, *extra)))
