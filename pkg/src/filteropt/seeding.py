"""Deterministic seed derivation for every random stream in the package.

Each consumer of randomness gets its own generator derived from an integer
seed plus a tuple of integer context labels (solver index, run index, sample
index, ...). Results are therefore independent of evaluation order and safe
to fan out to parallel workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "rng_from"]

_MASK128 = (1 << 128) - 1


def derive_seed(*parts: int) -> int:
    """Mix integer parts into a single 128-bit seed, order-sensitive."""
    if not parts:
        raise ValueError("derive_seed needs at least one part")
    entropy = [int(p) & _MASK128 for p in parts]
    state = np.random.SeedSequence(entropy).generate_state(4)
    out = 0
    for word in state:
        out = (out << 32) | int(word)
    return out


def rng_from(*parts: int) -> np.random.Generator:
    """Generator seeded by the counter-based mix of `parts`."""
    entropy = [int(p) & _MASK128 for p in parts]
    return np.random.default_rng(np.random.SeedSequence(entropy))
