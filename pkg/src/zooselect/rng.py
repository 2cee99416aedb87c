"""Deterministic random streams built on SplitMix64.

The generator is a counter-based stream: draw i is ``mix64(seed + i * GAMMA)``
where ``mix64`` is the SplitMix64 finalizer (Steele, Lea, Flood 2014) and
GAMMA is the 64-bit golden ratio increment. Same seed means the same bytes on
every platform: only integer ops, plus sqrt/log/cos/sin for normals. Persisted
outputs must come from this module, never from numpy's Generator, whose
streams are not frozen across releases.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_G = np.uint64(GAMMA)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)

_TO_UNIT = float(2.0 ** -53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


def _mix64_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(*parts: int) -> int:
    """Fold integers into a stream seed; order-sensitive, collision-resistant."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = _mix64_int(((h ^ (p & MASK64)) * GAMMA) & MASK64)
    return h


class SplitMix64:
    """Sequential view over the counter-based stream for one seed."""

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & MASK64)
        self._counter = 0

    def uint64(self, n: int) -> np.ndarray:
        lo = self._counter + 1
        self._counter += n
        idx = np.arange(lo, lo + n, dtype=np.uint64)
        return _mix64(self._seed + idx * _G)

    def uniform(self, n: int) -> np.ndarray:
        """Floats in [0, 1) with 53-bit resolution."""
        return (self.uint64(n) >> _S11).astype(np.float64) * _TO_UNIT

    def uniform_open(self, n: int) -> np.ndarray:
        """Floats in (0, 1]; safe under log()."""
        return ((self.uint64(n) >> _S11) + _ONE).astype(np.float64) * _TO_UNIT

    def normal(self, n: int) -> np.ndarray:
        """Standard normals via Box-Muller, two per uniform pair."""
        m = (n + 1) // 2
        u1 = self.uniform_open(m)
        u2 = self.uniform(m)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * np.pi) * u2
        out = np.empty(2 * m, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of range(n) by stable argsort over random keys."""
        return np.argsort(self.uint64(n), kind="stable")

    def choice(self, options: int) -> int:
        """One index in [0, options) by rejection-free modulo of a fresh draw."""
        # modulo bias is < options / 2**64, irrelevant at our option counts
        return int(self.uint64(1)[0] % np.uint64(options))
