"""Counter-based deterministic random streams.

Every stream is keyed by ``blake2b(parent_seed, label)`` and produces words by
hashing ``(key, counter)``.  Streams with different keys are independent, the
output is identical on every platform and Python version, and a child stream
can be split off by label without consuming draws from the parent.
"""
from __future__ import annotations

import hashlib
import struct
from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

_MASK64 = (1 << 64) - 1


def _derive_key(parent_seed: int, label: str) -> bytes:
    h = hashlib.blake2b(digest_size=32, person=b"chainbench-rng")
    h.update(struct.pack("<Q", parent_seed & _MASK64))
    h.update(label.encode("utf-8"))
    return h.digest()


class Stream:
    """A deterministic stream of uniform 64-bit words."""

    __slots__ = ("_key", "_counter", "_buf", "_pos")

    def __init__(self, key: bytes):
        self._key = key
        self._counter = 0
        self._buf: tuple[int, ...] = ()
        self._pos = 0

    def _refill(self) -> None:
        block = hashlib.blake2b(
            struct.pack("<Q", self._counter), digest_size=64, key=self._key
        ).digest()
        self._counter += 1
        self._buf = struct.unpack("<8Q", block)
        self._pos = 0

    def next_u64(self) -> int:
        if self._pos >= len(self._buf):
            self._refill()
        w = self._buf[self._pos]
        self._pos += 1
        return w

    def split(self, label: str) -> "Stream":
        return Stream(hashlib.blake2b(label.encode("utf-8"), digest_size=32, key=self._key).digest())

    # -- convenience draws (all built on next_u64) ------------------------

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            w = self.next_u64()
            if w < limit:
                return w % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def shuffle(self, seq: MutableSequence[T]) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def shuffled(self, seq: Sequence[T]) -> list[T]:
        out = list(seq)
        self.shuffle(out)
        return out

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        if k > len(seq):
            raise ValueError("sample larger than population")
        pool = list(seq)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def seeded_stream(parent_seed: int, label: str) -> Stream:
    return Stream(_derive_key(parent_seed, label))


def instance_seed(task: str, level: int, index: int, master_seed: int) -> int:
    """Order-independent per-instance seed."""
    h = hashlib.blake2b(digest_size=8, person=b"chainbench-inst")
    h.update(f"{task}\x00{level}\x00{index}\x00".encode("utf-8"))
    h.update(struct.pack("<Q", master_seed & _MASK64))
    return int.from_bytes(h.digest(), "little")
