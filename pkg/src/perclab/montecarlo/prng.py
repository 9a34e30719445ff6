"""Reference stream cipher and keyed block function used to draw site labels.

``Arc4`` is the classic RC4 key schedule and output loop, generalised to
``w``-bit words (permutation of ``2^w`` entries).  With ``w = 8`` it is RC4;
the dual-component experiment uses ``w = 16``.  A 32-bit site draw is two
consecutive 16-bit words, high word first.

``chacha20_block`` is the 20-round block function; ``KeyedSiteOracle`` maps a
lattice site (x, y) to one 32-bit word of the block with counter ``x`` and
nonce ``(y >> 4, 0, 0)``, namely word ``y & 15``.
"""

from __future__ import annotations

import hashlib
import struct

MASK32 = 0xFFFFFFFF
ARC4_WORD_BITS = 16
ARC4_DROP = 1 << 16


class Arc4:
    """RC4 over ``word_bits``-bit words.

    Key words are consecutive little-endian groups of ``word_bits // 8``
    bytes (zero-padded); ``drop`` initial outputs are discarded.
    """

    def __init__(self, key: bytes, word_bits: int = ARC4_WORD_BITS, drop: int = 0):
        if word_bits not in (8, 16):
            raise ValueError("word_bits must be 8 or 16")
        if not key:
            raise ValueError("key must be non-empty")
        step = word_bits // 8
        if len(key) % step:
            key = key + b"\0" * (step - len(key) % step)
        kw = [int.from_bytes(key[i:i + step], "little") for i in range(0, len(key), step)]
        size = 1 << word_bits
        mask = size - 1
        s = list(range(size))
        j = 0
        nk = len(kw)
        for i in range(size):
            j = (j + s[i] + kw[i % nk]) & mask
            s[i], s[j] = s[j], s[i]
        self._s, self._i, self._j, self._mask = s, 0, 0, mask
        for _ in range(drop):
            self.next_word()

    def next_word(self) -> int:
        s, mask = self._s, self._mask
        i = (self._i + 1) & mask
        j = (self._j + s[i]) & mask
        s[i], s[j] = s[j], s[i]
        self._i, self._j = i, j
        return s[(s[i] + s[j]) & mask]

    def words(self, n: int) -> list[int]:
        return [self.next_word() for _ in range(n)]

    def keystream(self, n: int) -> bytes:
        """First ``n`` output words as bytes (8-bit variant only)."""
        if self._mask != 0xFF:
            raise ValueError("byte keystream requires word_bits=8")
        return bytes(self.words(n))

    def next_draw(self) -> int:
        """32-bit draw from two 16-bit words."""
        return (self.next_word() << 16) | self.next_word()

    def __iter__(self):
        while True:
            yield self.next_draw()


def _rotl(v: int, c: int) -> int:
    return ((v << c) & MASK32) | (v >> (32 - c))


def _quarter(x: list[int], a: int, b: int, c: int, d: int) -> None:
    x[a] = (x[a] + x[b]) & MASK32
    x[d] = _rotl(x[d] ^ x[a], 16)
    x[c] = (x[c] + x[d]) & MASK32
    x[b] = _rotl(x[b] ^ x[c], 12)
    x[a] = (x[a] + x[b]) & MASK32
    x[d] = _rotl(x[d] ^ x[a], 8)
    x[c] = (x[c] + x[d]) & MASK32
    x[b] = _rotl(x[b] ^ x[c], 7)


CHACHA_CONSTANTS = (0x61707865, 0x3320646E, 0x79622D32, 0x6B206574)


def chacha20_words(key_words, counter: int, nonce_words) -> list[int]:
    """ChaCha20 block as 16 little-endian 32-bit words."""
    state = list(CHACHA_CONSTANTS) + list(key_words) + [counter & MASK32] + list(nonce_words)
    x = state[:]
    for _ in range(10):
        _quarter(x, 0, 4, 8, 12)
        _quarter(x, 1, 5, 9, 13)
        _quarter(x, 2, 6, 10, 14)
        _quarter(x, 3, 7, 11, 15)
        _quarter(x, 0, 5, 10, 15)
        _quarter(x, 1, 6, 11, 12)
        _quarter(x, 2, 7, 8, 13)
        _quarter(x, 3, 4, 9, 14)
    return [(a + b) & MASK32 for a, b in zip(x, state)]


def chacha20_block(key: bytes, counter: int, nonce: bytes) -> bytes:
    if len(key) != 32 or len(nonce) != 12:
        raise ValueError("ChaCha20 needs a 32-byte key and a 12-byte nonce")
    words = chacha20_words(struct.unpack("<8I", key), counter, struct.unpack("<3I", nonce))
    return struct.pack("<16I", *words)


class KeyedSiteOracle:
    """Pure function from lattice sites to 32-bit draws."""

    def __init__(self, key: bytes):
        if len(key) != 32:
            raise ValueError("oracle key must be 32 bytes")
        self.key = key
        self._kw = struct.unpack("<8I", key)
        self._cache: dict[tuple[int, int], list[int]] = {}

    def block(self, x: int, band: int) -> list[int]:
        k = (x, band)
        blk = self._cache.get(k)
        if blk is None:
            if len(self._cache) > 1 << 16:
                self._cache.clear()
            blk = chacha20_words(self._kw, x & MASK32, (band & MASK32, 0, 0))
            self._cache[k] = blk
        return blk

    def draw(self, x: int, y: int) -> int:
        if x < 0 or y < 0 or x > MASK32:
            raise ValueError("site coordinates out of range")
        return self.block(x, y >> 4)[y & 15]


def trial_key(label: str, seed: int, trial: int) -> bytes:
    """Per-trial 256-bit key derived from the experiment seed and trial index."""
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit value")
    return hashlib.sha256(
        label.encode() + seed.to_bytes(8, "little") + trial.to_bytes(8, "little")
    ).digest()
