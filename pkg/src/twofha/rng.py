"""Random source abstraction: reproducible seeded streams or system entropy.

Every generation operation in the package draws randomness through an
:class:`RngHandle` so that test and simulation runs are bit-reproducible
under a fixed seed while production runs use the OS CSPRNG.
"""

from __future__ import annotations

import base64
import random
from collections.abc import MutableSequence, Sequence
from typing import TypeVar

T = TypeVar("T")

_MASK64 = (1 << 64) - 1
# splitmix64 increment; used to derive independent child seeds
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RngHandle:
    """A random source that is either seeded (deterministic) or system entropy.

    Handles are not safe for concurrent sharing; each task should own its
    own handle (use :meth:`spawn` to derive independent streams).
    """

    def __init__(self, seed: int | None = None):
        self._seed = seed
        if seed is None:
            self._rng: random.Random = random.SystemRandom()
        else:
            self._rng = random.Random(seed & _MASK64)

    @classmethod
    def seeded(cls, seed: int) -> "RngHandle":
        return cls(seed=seed)

    @classmethod
    def system(cls) -> "RngHandle":
        return cls(seed=None)

    @property
    def is_seeded(self) -> bool:
        return self._seed is not None

    def spawn(self, stream: int) -> "RngHandle":
        """Derive an independent handle for a numbered stream.

        Seeded handles yield a deterministic child per stream id; system
        handles yield fresh system handles.
        """
        if self._seed is None:
            return RngHandle()
        return RngHandle(seed=_splitmix64((self._seed & _MASK64) ^ _splitmix64(stream)))

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ValueError(f"randbelow requires n >= 1, got {n}")
        return self._rng.randrange(n)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randbelow(len(seq))]

    def shuffle(self, seq: MutableSequence) -> None:
        self._rng.shuffle(seq)

    def token_bytes(self, nbytes: int) -> bytes:
        return self._rng.getrandbits(nbytes * 8).to_bytes(nbytes, "big")

    def token_urlsafe(self, nbytes: int = 16) -> str:
        return base64.urlsafe_b64encode(self.token_bytes(nbytes)).rstrip(b"=").decode("ascii")

    def __repr__(self) -> str:
        mode = f"seeded={self._seed}" if self._seed is not None else "system-entropy"
        return f"RngHandle({mode})"
