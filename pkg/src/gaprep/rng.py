"""Portable deterministic random number generator (PCG32).

Pretraining-instance generation must be byte-identical across platforms and
Python versions, so instead of :mod:`random` (whose distribution helpers may
change between releases) we use the PCG XSH RR 64/32 generator with the
reference constants.  Same seed, same stream, anywhere.
"""

_MULT = 6364136223846793005
_MASK64 = (1 << 64) - 1


class Pcg32:
    """PCG XSH RR 64/32: 64-bit state, 32-bit output."""

    def __init__(self, seed: int, seq: int = 0):
        self._state = 0
        self._inc = ((seq << 1) | 1) & _MASK64
        self.next_u32()
        self._state = (self._state + seed) & _MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self._state
        self._state = (old * _MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return self.next_u32() / 4294967296.0

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow() requires n >= 1")
        limit = 4294967296 - (4294967296 % n)
        while True:
            r = self.next_u32()
            if r < limit:
                return r % n

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], both ends inclusive."""
        return a + self.randbelow(b - a + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items):
        if not items:
            raise ValueError("choice() on empty sequence")
        return items[self.randbelow(len(items))]
