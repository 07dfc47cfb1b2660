"""Deterministic 64-bit random streams and path-keyed hashing.

Every random choice in the package flows through one of two primitives:

* :class:`Stream` -- a counter-based splitmix64 stream used for playout
  move choices, tie-breaking and match scheduling.
* path hashing -- random games (Pearl, Galton-Watson) derive each node's
  randomness from ``(seed, path)`` alone, so a realization can be replayed
  lazily from any position without storing the tree.

The compiled backend re-implements the exact same arithmetic in C; both
must stay bit-for-bit in sync (see tests/test_backend_parity.py).
"""

from __future__ import annotations

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
OUTCOME_SALT = 0xD1B54A32D192ED03
LITTER_SALT = 0x8BB84B93962EACC9
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x &= M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & M64
    x ^= x >> 31
    return x


def path_root(seed: int) -> int:
    """Hash state of a game's root node."""
    return mix64(seed & M64)


def path_child(h: int, index: int) -> int:
    """Hash state of the ``index``-th child of a node with hash state ``h``."""
    return mix64(h ^ (((index + 1) * GOLDEN) & M64))


def unit_from(h: int, salt: int) -> float:
    """Uniform [0, 1) draw derived from a node hash and a purpose salt."""
    return (mix64(h ^ salt) >> 11) * _INV_2_53


def derive_seed(seed: int, *indices: int) -> int:
    """Child seed for a sub-task (match index, seat, ...)."""
    h = mix64(seed & M64)
    for i in indices:
        h = mix64(h ^ (((i + 1) * GOLDEN) & M64))
    return h


class Stream:
    """Counter-based splitmix64 stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & M64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & M64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.next_u64() % n

    def unit(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def shuffled(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n)."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            order[i], order[j] = order[j], order[i]
        return order

    def spawn(self, *indices: int) -> "Stream":
        return Stream(derive_seed(self.state, *indices))
