"""Seeded, splittable randomness.

Every sampling operation in the package receives an explicit 64-bit seed and
derives an independent substream from it; there is no global generator state.
Substreams are keyed so that sample ``i`` of a run is the same regardless of
how many samples the run requests in total.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    if seed < 0 or seed >= 2**64:
        raise ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for ``seed`` split along the integer ``key`` path."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def complex_gaussian(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """I.i.d. standard complex Gaussians via Box-Muller over uniform draws.

    Each entry has independent N(0,1) real and imaginary parts.
    """
    u1 = 1.0 - gen.random(shape)  # (0, 1]; keeps the log finite
    u2 = gen.random(shape)
    return np.sqrt(-2.0 * np.log(u1)) * np.exp(2j * np.pi * u2)
