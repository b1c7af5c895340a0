"""Counter-based random numbers keyed by (seed, stream, counter).

Every variate is a pure function of its key, so any execution order -
vectorized, chunked, or parallel - produces identical draws.  The mixer
is the SplitMix64 finalizer, applied twice; statistical quality is ample
for Poisson switching decisions and inverse-CDF sampling.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_GOLDEN = 0x9E3779B97F4A7C15
_MIX_B = 0xBF58476D1CE4E5B9
_MIX_C = 0x94D049BB133111EB
_MASK = 0xFFFFFFFFFFFFFFFF

# stream tags so initialization draws never collide with stepping draws
STREAM_INIT = 0x1B873593
STREAM_STEP = 0xCC9E2D51

_INV_2_53 = 2.0**-53


def _mix64_np(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # wrapping is the point
        z = (z + np.uint64(_GOLDEN)) & np.uint64(_MASK)
        z ^= z >> np.uint64(30)
        z = (z * np.uint64(_MIX_B)) & np.uint64(_MASK)
        z ^= z >> np.uint64(27)
        z = (z * np.uint64(_MIX_C)) & np.uint64(_MASK)
        z ^= z >> np.uint64(31)
    return z


def stream_key(seed: int, stream: int, counter: int) -> np.uint64:
    """Per-(stream, counter) key; device indices are hashed against it."""
    s = np.uint64(seed & _MASK)
    base = _mix64_np(s ^ np.uint64(stream & _MASK))
    return _mix64_np(base + np.uint64(counter & _MASK))


def uniforms(seed: int, stream: int, counter: int, indices: np.ndarray) -> np.ndarray:
    """Open-interval (0,1) uniforms for the given device indices."""
    key = stream_key(seed, stream, counter)
    h = _mix64_np(key ^ (indices.astype(np.uint64) * np.uint64(_GOLDEN)))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


@njit(cache=True, inline="always")
def mix64(z):
    z = z + uint64(_GOLDEN)
    z ^= z >> uint64(30)
    z = z * uint64(_MIX_B)
    z ^= z >> uint64(27)
    z = z * uint64(_MIX_C)
    z ^= z >> uint64(31)
    return z


@njit(cache=True, inline="always")
def device_uniform(key, device_index):
    """Same mapping as :func:`uniforms`, for use inside jitted kernels."""
    h = mix64(key ^ (uint64(device_index) * uint64(_GOLDEN)))
    return (h >> uint64(11)) * _INV_2_53 + 0.5 * _INV_2_53
