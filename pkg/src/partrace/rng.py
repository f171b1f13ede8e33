"""Seeded random streams.

All randomness goes through a Philox-4x64 counter-based bit generator keyed
directly by the user seed, so a given seed reproduces the same stream on any
platform. Gaussian deviates are produced here with Box-Muller rather than
numpy's ziggurat, keeping the normal-draw algorithm pinned as well.
"""

from __future__ import annotations

import numpy as np


def generator(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def standard_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller standard normal draws (two uniforms per pair of normals)."""
    npairs = (size + 1) // 2
    u1 = 1.0 - rng.random(npairs)  # (0, 1], keeps log finite
    u2 = rng.random(npairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * npairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:size]


def complex_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """I.i.d. standard complex Gaussian array, E|z|^2 = 1."""
    n = int(np.prod(shape))
    z = standard_normal(rng, 2 * n)
    return ((z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)).reshape(shape)
