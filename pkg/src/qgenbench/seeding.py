"""Deterministic seed derivation shared by all trial loops.

Per-trial generators are derived as ``default_rng(SeedSequence([master,
*indices]))``.  SeedSequence mixing is stable across platforms and numpy
releases, so every experiment is a pure function of (config, master seed).
"""

from __future__ import annotations

import numpy as np


def rng_for(master_seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for one trial (or sub-stream) of an experiment."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, indices)]))


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit child seed, for APIs that take a plain integer."""
    return int(rng_for(master_seed, *indices).integers(0, 2**63))
