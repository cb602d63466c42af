"""Counter-based random streams.

Every random number is a pure function of ``(seed, tag, index, counter)``,
so samples can be drawn in any order or in parallel and still reproduce
bit for bit.  The mixer is splitmix64's finalizer.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# purpose tags; keep stable, changing them reshuffles every stream
TAG_PSEUDO = 0x51
TAG_OWEN = 0x0E
TAG_OWEN_TAIL = 0x7A
TAG_LEVELS = 0x1E
TAG_XI = 0x5C
TAG_Z = 0x2D
TAG_MLMC = 0x3C
TAG_STUDY = 0x57


def _u64(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.uint64))


def mix64(z) -> np.ndarray:
    """splitmix64 finalizer applied elementwise (wrapping uint64 arithmetic)."""
    z = _u64(z).copy()
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def hash_words(*words) -> np.ndarray:
    """Hash a tuple of uint64 words (scalars or broadcastable arrays)."""
    arrays = np.broadcast_arrays(*[_u64(w) for w in words])
    h = np.full(arrays[0].shape, 0x6A09E667F3BCC909, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for w in arrays:
            h = mix64(h ^ (w + _GOLDEN))
    return h


def derive_seed(*words: int) -> int:
    """Collapse integers into one 64-bit seed."""
    return int(hash_words(*[int(w) & _MASK64 for w in words])[0])


def uniforms(seed: int, tag: int, index, counter=0) -> np.ndarray:
    """Uniform doubles in the open interval (0, 1), 53-bit resolution."""
    h = hash_words(int(seed) & _MASK64, tag, index, counter)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, tag: int, index, counter=0) -> np.ndarray:
    """Standard normal variates by inverse CDF of :func:`uniforms`."""
    return ndtri(uniforms(seed, tag, index, counter))
