"""Counter-based Gaussian streams.

Every draw is a pure function of ``(seed, stream, index)``: the 128-bit
Philox4x64-10 key is ``(seed, stream)`` and the counter is the draw index.
Any index range can therefore be generated independently, which is what
makes chunked and multi-worker construction bitwise reproducible.
"""

import numpy as np
from scipy.special import ndtri

# stream tags, one per consumer, so that different uses of one seed never
# share random words
STREAM_TENSOR = 0
STREAM_REM = 1
STREAM_GRAM = 2
STREAM_MC = 3

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4


def _check_key(seed, stream):
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return [int(seed), int(stream)]


def raw_words(seed, stream, start, count):
    """Return ``count`` raw 64-bit words starting at word index ``start``."""
    if count < 0 or start < 0:
        raise ValueError("start and count must be non-negative")
    block, offset = divmod(int(start), _WORDS_PER_BLOCK)
    bg = np.random.Philox(counter=[block, 0, 0, 0], key=_check_key(seed, stream))
    return bg.random_raw(offset + int(count))[offset:]


def uniforms(seed, stream, start, count):
    """Open-interval uniforms on (0, 1) with 53 random bits each."""
    words = raw_words(seed, stream, start, count)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed, stream, start, count):
    """Standard normals by inverse-CDF transform of :func:`uniforms`."""
    return ndtri(uniforms(seed, stream, start, count))


def derive_seed(seed, *path):
    """Child seed for ``(seed, *path)``; distinct paths give distinct seeds."""
    ss = np.random.SeedSequence([int(seed), *[int(x) for x in path]])
    return int(ss.generate_state(1, np.uint64)[0])
