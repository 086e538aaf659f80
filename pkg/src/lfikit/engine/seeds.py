"""Deterministic counter-based seed derivation.

Every random stream is keyed by (master seed, purpose tag, indices...), so
per-row and per-chain work is order-independent: parallel or serial
execution produces identical results.
"""

from __future__ import annotations

import zlib

import numpy as np

_PURPOSES = ("init", "simulate", "train", "proposal", "posterior", "mcmc",
             "smc", "standardize", "eval")


def _tag(purpose: str) -> int:
    return zlib.crc32(purpose.encode("ascii"))


def seed_sequence(master: int, purpose: str, *indices: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(master), _tag(purpose),
                                   *[int(i) for i in indices]))


def rng_for(master: int, purpose: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master, purpose, *indices))


def row_seeds(master: int, round_index: int, n: int):
    """One child seed per simulated row of a round."""
    return [seed_sequence(master, "simulate", round_index, j) for j in range(n)]
