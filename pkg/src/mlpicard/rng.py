"""Deterministic splittable random streams.

The estimators in this package consume an unbounded family of random draws
indexed by finite integer paths: every stream can spawn child streams by a
signed integer index, to any depth, and every stream owns its own infinite
draw sequence.  This module realises that family with a counter-based
construction.  A stream is identified by ``(seed, path)``; its draws are

    word(seed, path, counter) = mix64((key ^ DRAW_SALT) + (counter + 1) * GOLDEN)

where ``key`` is a per-element chained hash of the seed and the path and
``mix64`` is the SplitMix64 finaliser (Stafford variant 13).  Consequences:

* spawning is O(1) and never touches the parent's counter or path,
* a draw is a pure function of (seed, path, counter), so the same
  (seed, path) reproduces the identical bit stream on every run and
  platform, and sibling streams can be advanced in any interleaving,
* independence across streams is the usual engineering surrogate
  (hash quality rather than a theorem); the test suite runs correlation
  batteries over the path tree to back it up statistically.

Uniforms take the top 53 bits of a word, giving exact float64 values in
[0, 1).  Gaussians use the Box-Muller cosine branch, frozen so that a seed
pins the whole experiment output::

    g = sqrt(-2 ln u1) * cos(2 pi u2)

with u1 in (0, 1] and u2 in [0, 1) built from two consecutive words (the
sine partner is discarded; one gaussian always consumes two counters).

:class:`SplittableStream` is the scalar, object-per-stream interface.
:class:`StreamBundle` advances many streams in lockstep with numpy and
produces bit-identical values lane by lane; the vectorised estimators are
built on it.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "GAUSSIAN_ALGORITHM",
    "RNG_ALGORITHM",
    "SplittableStream",
    "StreamBundle",
    "root",
]

RNG_ALGORITHM = "splitmix64-keyed-counter"
GAUSSIAN_ALGORITHM = "box-muller-cosine"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15     # 2^64 / golden ratio, odd
_ROOT_SALT = 0x5851F42D4C957F2D
_SPAWN_SALT = 0xD1342543DE82EF95
_DRAW_SALT = 0x2545F4914F6CDD1D

_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_SPAWN = np.uint64(_SPAWN_SALT)
_U64_DRAW = np.uint64(_DRAW_SALT)
_SH30, _SH27, _SH31, _SH11 = (np.uint64(s) for s in (30, 27, 31, 11))
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: int) -> int:
    """SplitMix64 finaliser on Python ints (mod 2^64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> _SH30)) * _M1
    z = (z ^ (z >> _SH27)) * _M2
    return z ^ (z >> _SH31)


def _root_key(seed: int) -> int:
    return _mix64(seed ^ _ROOT_SALT)


def _child_key(key: int, index: int) -> int:
    return _mix64((key ^ _SPAWN_SALT) + ((index & _MASK) * _GOLDEN))


def _word(key: int, counter: int) -> int:
    return _mix64((key ^ _DRAW_SALT) + (((counter + 1) & _MASK) * _GOLDEN))


def _child_keys_np(keys: np.ndarray, indices) -> np.ndarray:
    """Vector form of :func:`_child_key`; broadcasts keys against indices."""
    idx = np.asarray(indices, dtype=np.int64).astype(np.uint64)
    return _mix64_np((keys ^ _U64_SPAWN) + idx * _U64_GOLDEN)


def _words_np(keys: np.ndarray, counter: int) -> np.ndarray:
    off = np.uint64(((counter + 1) * _GOLDEN) & _MASK)
    return _mix64_np((keys ^ _U64_DRAW) + off)


def _uniform_from_words(words: np.ndarray) -> np.ndarray:
    return (words >> _SH11).astype(np.float64) * _INV_2_53


def _gaussian_from_words(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    # u1 in (0,1] keeps the log finite; u2 in [0,1).
    u1 = ((w1 >> _SH11) + np.uint64(1)).astype(np.float64) * _INV_2_53
    u2 = (w2 >> _SH11).astype(np.float64) * _INV_2_53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < (1 << 64):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


def _check_index(index: int) -> int:
    if not isinstance(index, (int, np.integer)):
        raise TypeError(f"stream index must be an integer, got {type(index).__name__}")
    index = int(index)
    if not -(1 << 63) <= index < (1 << 63):
        raise ValueError("stream index must fit in a signed 64-bit integer")
    return index


class SplittableStream:
    """One deterministic draw sequence, identified by (seed, path).

    Single-owner while being advanced; spawned children are independent of
    the parent and of each other and may be advanced concurrently.
    """

    __slots__ = ("seed", "path", "counter", "_key")

    def __init__(self, seed: int, path: tuple[int, ...] = (), counter: int = 0):
        self.seed = _check_seed(seed)
        self.path = tuple(_check_index(i) for i in path)
        self.counter = int(counter)
        key = _root_key(self.seed)
        for element in self.path:
            key = _child_key(key, element)
        self._key = key

    @classmethod
    def root(cls, seed: int) -> "SplittableStream":
        """Stream with empty path and counter 0 for the given master seed."""
        return cls(seed)

    def spawn(self, index: int) -> "SplittableStream":
        """Child stream with path ``self.path + (index,)`` and counter 0.

        Depends only on (seed, path, index); the parent's counter and path
        are left untouched, and repeated calls return equal streams.
        """
        index = _check_index(index)
        child = object.__new__(SplittableStream)
        child.seed = self.seed
        child.path = self.path + (index,)
        child.counter = 0
        child._key = _child_key(self._key, index)
        return child

    def next_uniform(self) -> float:
        """Next uniform draw in [0, 1); advances the counter by one."""
        w = _word(self._key, self.counter)
        self.counter += 1
        return (w >> 11) * _INV_2_53

    def next_gaussian(self) -> float:
        """Next standard normal draw; consumes two counters.

        Uses numpy's scalar log/cos so the value is bit-identical to the
        vectorised path in :class:`StreamBundle`.
        """
        w1 = _word(self._key, self.counter)
        w2 = _word(self._key, self.counter + 1)
        self.counter += 2
        u1 = ((w1 >> 11) + 1) * _INV_2_53
        u2 = (w2 >> 11) * _INV_2_53
        return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2))

    def uniforms(self, count: int) -> np.ndarray:
        """The next ``count`` uniforms as a float64 array (counter advances)."""
        counters = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        words = _mix64_np((np.uint64(self._key) ^ _U64_DRAW) + counters * _U64_GOLDEN)
        self.counter += count
        return _uniform_from_words(words)

    def gaussians(self, count: int) -> np.ndarray:
        """The next ``count`` gaussians (2*count counters), matching
        repeated :meth:`next_gaussian` calls bit for bit."""
        counters = np.arange(self.counter + 1, self.counter + 2 * count + 1, dtype=np.uint64)
        words = _mix64_np((np.uint64(self._key) ^ _U64_DRAW) + counters * _U64_GOLDEN)
        self.counter += 2 * count
        return _gaussian_from_words(words[0::2], words[1::2])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplittableStream):
            return NotImplemented
        return (self.seed, self.path, self.counter) == (other.seed, other.path, other.counter)

    def __hash__(self):
        return hash((self.seed, self.path, self.counter))

    def __repr__(self) -> str:
        return f"SplittableStream(seed={self.seed}, path={self.path}, counter={self.counter})"


def root(seed: int) -> SplittableStream:
    """Convenience alias for :meth:`SplittableStream.root`."""
    return SplittableStream.root(seed)


class StreamBundle:
    """Many streams advanced in lockstep (one shared counter).

    ``keys`` is a uint64 array of any shape; element ``i`` of every draw is
    bit-identical to the corresponding :class:`SplittableStream` draw for
    that key's (seed, path).  Used by the vectorised estimators, where all
    lanes consume draws in the same pattern.
    """

    __slots__ = ("keys", "counter")

    def __init__(self, keys: np.ndarray, counter: int = 0):
        self.keys = np.asarray(keys, dtype=np.uint64)
        self.counter = int(counter)

    @classmethod
    def root_children(cls, seed: int, indices) -> "StreamBundle":
        """Bundle of ``root(seed).spawn(i)`` for each i in ``indices``."""
        rk = np.uint64(_root_key(_check_seed(seed)))
        return cls(_child_keys_np(rk, indices))

    @classmethod
    def from_stream(cls, stream: SplittableStream) -> "StreamBundle":
        """Single-lane bundle mirroring ``stream`` (shares its counter value)."""
        return cls(np.array([stream._key], dtype=np.uint64), stream.counter)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.keys.shape

    def spawn(self, index: int) -> "StreamBundle":
        """Elementwise child bundle for one index; counter resets to 0."""
        return StreamBundle(_child_keys_np(self.keys, np.int64(_check_index(index))))

    def spawn_block(self, indices) -> "StreamBundle":
        """Child bundle over a block of indices: keys shape (len(indices), *shape)."""
        idx = np.asarray(indices, dtype=np.int64)
        return StreamBundle(_child_keys_np(self.keys[None, ...], idx.reshape((-1,) + (1,) * self.keys.ndim)))

    def next_uniform(self) -> np.ndarray:
        u = _uniform_from_words(_words_np(self.keys, self.counter))
        self.counter += 1
        return u

    def next_gaussian(self) -> np.ndarray:
        w1 = _words_np(self.keys, self.counter)
        w2 = _words_np(self.keys, self.counter + 1)
        self.counter += 2
        return _gaussian_from_words(w1, w2)

    def __repr__(self) -> str:
        return f"StreamBundle(shape={self.keys.shape}, counter={self.counter})"
