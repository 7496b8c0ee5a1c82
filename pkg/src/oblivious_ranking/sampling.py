"""Reproducible uniform permutations keyed by (seed, sample index).

Each sample gets its own Philox counter block, so any worker can regenerate
sample ``i`` without touching samples ``0..i-1``. The shuffle is numpy's
Fisher-Yates ``Generator.permutation``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def _check(seed: int, index: int) -> None:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= index <= MASK64:
        raise ValueError(f"sample index must be an unsigned 64-bit integer, got {index}")


def _state(seed: int, index: int) -> dict:
    # the index sits in the top counter word; streams never overlap below 2^192 draws.
    # Passing counter= to the constructor would round large indices through float.
    return {
        "bit_generator": "Philox",
        "state": {
            "counter": np.array([0, 0, 0, index], dtype=np.uint64),
            "key": np.array([seed, 0], dtype=np.uint64),
        },
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }


def sample_rng(seed: int, index: int) -> np.random.Generator:
    _check(seed, index)
    bitgen = np.random.Philox()
    bitgen.state = _state(seed, index)
    return np.random.Generator(bitgen)


def sample_permutation(seed: int, index: int, n: int) -> np.ndarray:
    return sample_rng(seed, index).permutation(n).astype(np.int32)


def permutation_block(seed: int, start: int, stop: int, n: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the sample stream, one permutation per row."""
    _check(seed, start)
    if stop > start:
        _check(seed, stop - 1)
    out = np.empty((stop - start, n), dtype=np.int32)
    bitgen = np.random.Philox()
    gen = np.random.Generator(bitgen)
    for row, index in enumerate(range(start, stop)):
        bitgen.state = _state(seed, index)
        out[row] = gen.permutation(n)
    return out
