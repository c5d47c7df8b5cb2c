"""Reproducible random streams: xoshiro256** seeded through splitmix64.

The generator is fixed so graphs can be regenerated bit-for-bit from a
64-bit seed in any language. State lives in a 4-element uint64 array that
the jitted kernels mutate in place.

Conventions used by every sampler in the package:

* ``random_float``: top 53 bits of the next output, scaled by 2**-53.
* ``bernoulli(p)``: ``random_float() < p``.
* ``bounded(n)``: next output modulo ``n`` after rejecting outputs below
  ``(2**64 - n) % n`` (exactly uniform).
"""

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U0 = np.uint64(0)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U19 = np.uint64(19)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U57 = np.uint64(57)
_INV53 = 1.0 / 9007199254740992.0


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def derive_seeds(master: int, count: int) -> list[int]:
    """First ``count`` outputs of the splitmix64 stream started at ``master``."""
    state = master & MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64(state)
        out.append(z)
    return out


def seed_state(seed: int) -> np.ndarray:
    """xoshiro256** state for a 64-bit seed (four splitmix64 outputs)."""
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.array(derive_seeds(seed, 4), dtype=np.uint64)


@njit(cache=True, nogil=True)
def next_u64(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    x = s1 * _U5
    result = ((x << _U7) | (x >> _U57)) * _U9
    t = s1 << _U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << _U45) | (s3 >> _U19)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(cache=True, nogil=True)
def random_float(s):
    return np.float64(next_u64(s) >> _U11) * _INV53


@njit(cache=True, nogil=True)
def bounded(s, n):
    """Uniform integer in [0, n); ``n`` >= 1."""
    un = np.uint64(n)
    threshold = (_U0 - un) % un
    x = next_u64(s)
    while x < threshold:
        x = next_u64(s)
    return np.int64(x % un)


@njit(cache=True, nogil=True)
def _fill_u64(s, out):
    for i in range(out.shape[0]):
        out[i] = next_u64(s)


@njit(cache=True, nogil=True)
def _fill_float(s, out):
    for i in range(out.shape[0]):
        out[i] = random_float(s)


@njit(cache=True, nogil=True)
def _shuffle(s, arr):
    for i in range(arr.shape[0] - 1, 0, -1):
        j = bounded(s, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


class Rng:
    """Thin Python handle around a xoshiro256** state array."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.state = seed_state(self.seed)

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self) -> float:
        return float(random_float(self.state))

    def bounded(self, n: int) -> int:
        if n < 1:
            raise ValueError("bounded() needs n >= 1")
        return int(bounded(self.state, n))

    def u64_array(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint64)
        _fill_u64(self.state, out)
        return out

    def float_array(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        _fill_float(self.state, out)
        return out

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``arange(n)``, last index first."""
        arr = np.arange(n, dtype=np.int64)
        _shuffle(self.state, arr)
        return arr
