"""Counter-based random numbers: every draw is a pure function of (seed, stream, counter).

Draws do not depend on iteration order, so a vectorised or parallel loop
gives the same numbers as a serial one.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# stream ids; segment- or crack-specific streams add an offset below STREAM_STRIDE
STREAM_STRIDE = 1 << 20
FLIP = 1 * STREAM_STRIDE
CRACK_COUNT = 2 * STREAM_STRIDE
CRACK_WALK = 3 * STREAM_STRIDE
THICKNESS = 4 * STREAM_STRIDE
WHISKER = 5 * STREAM_STRIDE
NOISE = 6 * STREAM_STRIDE
CLASSIFY = 7 * STREAM_STRIDE


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _key(seed: int, stream: int) -> np.uint64:
    k = np.array([(seed & _MASK64) ^ ((stream * 0x9E3779B97F4A7C15) & _MASK64)], dtype=np.uint64)
    return _mix(k)[0]


def bits64(seed: int, stream: int, counters) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(_mix(c * _GOLDEN + _key(seed, stream)))


def uniform(seed: int, stream: int, counters) -> np.ndarray:
    """Floats in [0, 1) with 53 random bits."""
    return (bits64(seed, stream, counters) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def uniform1(seed: int, stream: int, counter: int) -> float:
    return float(uniform(seed, stream, [counter])[0])


def normal(seed: int, stream: int, counters) -> np.ndarray:
    """Standard normal draws (Box-Muller on counters 2c and 2c+1)."""
    c = np.asarray(counters, dtype=np.uint64)
    u1 = uniform(seed, stream, c * np.uint64(2))
    u2 = uniform(seed, stream, c * np.uint64(2) + np.uint64(1))
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2 * np.pi * u2)


def poisson(u: float, lam: float) -> int:
    """Inverse-CDF Poisson sample from one uniform ``u``."""
    if lam <= 0:
        return 0
    if lam > 500:
        # normal approximation keeps the loop bounded
        z = NormalDist().inv_cdf(min(max(u, 1e-15), 1 - 1e-15))
        return max(0, int(round(lam + math.sqrt(lam) * z)))
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf and p > 0:
        k += 1
        p *= lam / k
        cdf += p
    return k
