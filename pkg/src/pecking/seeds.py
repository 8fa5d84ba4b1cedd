"""Deterministic seed derivation and the trajectory RNG stream discipline.

Replicate streams are derived as

    replicate_seed = mix(master_seed, cell_key, replicate_index)

where ``mix`` folds its 64-bit words through SplitMix64 (published below)
and ``cell_key`` is the FNV-1a 64-bit hash of the canonical parameter
string of a sweep cell. Content-addressed cell keys mean adding grid
cells never perturbs the streams of existing cells.

Trajectory kernels consume three aligned uniform(0,1) blocks per chunk,
drawn in a fixed order from PCG64: edge block, role-coin block, win
block. All three advance every step. The per-step APIs draw lazily from
the caller's Generator instead; the two disciplines are separately
deterministic but do not share streams.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# block length used by the chunked trajectory kernels
CHUNK = 1 << 18


def splitmix64(z: int) -> int:
    """One output of the SplitMix64 sequence seeded at z."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def mix(*words: int) -> int:
    """Fold 64-bit words into one seed: state <- splitmix64(state ^ word)."""
    state = 0x243F6A8885A308D3
    for w in words:
        state = splitmix64(state ^ (int(w) & MASK64))
    return state


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


def canonical_params(params: dict) -> str:
    """Canonical "k=v;..." string, keys sorted, floats at 17 significant digits."""
    parts = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, float):
            parts.append(f"{k}={format(v, '.17g')}")
        else:
            parts.append(f"{k}={v}")
    return ";".join(parts)


def cell_key(params: dict) -> int:
    return fnv1a64(canonical_params(params).encode("utf-8"))


def replicate_seed(master_seed: int, cell: int, replicate_index: int) -> int:
    return mix(master_seed, cell, replicate_index)


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def uniform_blocks(rng: np.random.Generator, k: int):
    """Draw the three aligned uniform blocks for one kernel chunk."""
    return rng.random(k), rng.random(k), rng.random(k)
