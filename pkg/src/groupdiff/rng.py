"""Counter-based Gaussian stream: SplitMix64 + Box-Muller.

The value at stream position ``j`` depends only on ``(seed, j)``:

* ``u(seed, j) = ((splitmix64(seed + (j + 1) * GOLDEN) >> 11) + 1) * 2**-53``,
  a uniform in ``(0, 1]``;
* normals come in Box-Muller pairs; pair ``k`` consumes uniforms ``2k`` and
  ``2k + 1`` and yields ``r cos(2 pi u2)`` at position ``2k`` and
  ``r sin(2 pi u2)`` at ``2k + 1`` with ``r = sqrt(-2 ln u1)``.

Shard ``s`` of a seed uses the seed ``derive_seed(seed, s)``, so parallel
Monte-Carlo runs stay reproducible.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, index) -> np.ndarray:
    """SplitMix64 output for the given stream positions (vectorized)."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + (idx + np.uint64(1)) * GOLDEN
        return _mix(z)


def derive_seed(seed: int, shard: int) -> int:
    return int(splitmix64(seed ^ ((shard * 0xD1B54A32D192ED03) & _MASK), np.array([shard]))[0])


def uniforms(seed: int, count: int, start: int = 0) -> np.ndarray:
    z = splitmix64(seed, np.arange(start, start + count, dtype=np.uint64))
    return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def standard_normals(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Standard normal variates at stream positions ``start .. start+count-1``."""
    if count <= 0:
        return np.empty(0)
    first_pair = start // 2
    last_pair = (start + count - 1) // 2
    u = uniforms(seed, 2 * (last_pair - first_pair + 1), start=2 * first_pair)
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * u1.size)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    offset = start - 2 * first_pair
    return z[offset:offset + count]


def normals(seed: int, count: int, scale: float = 1.0, start: int = 0) -> np.ndarray:
    return scale * standard_normals(seed, count, start)
