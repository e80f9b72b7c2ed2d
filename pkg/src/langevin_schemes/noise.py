"""Counter-based Gaussian noise.

Draw number ``c`` of stream ``(seed, stream_id)`` is a pure function of
``(seed, stream_id, c)``: it is computed from Philox block ``c // 2`` by a
Box-Muller transform, so any slice of a stream can be regenerated without
replaying what came before it.
"""
from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


def normals_at(seed: int, stream_id: int, start: int, count: int) -> np.ndarray:
    """Standard normal draws ``start, ..., start + count - 1`` of a stream."""
    if count <= 0:
        return np.empty(0)
    b0 = start // 2
    b1 = (start + count - 1) // 2
    key = np.array([seed & _U64, stream_id & _U64], dtype=np.uint64)
    bitgen = np.random.Philox(key=key, counter=b0)
    raw = bitgen.random_raw(4 * (b1 - b0 + 1)).reshape(-1, 2, 2)
    # each block: words (0,1) -> even draw, words (2,3) -> odd draw
    u1 = ((raw[..., 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_M53
    u2 = (raw[..., 1] >> np.uint64(11)).astype(np.float64) * _TWO_M53
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    z = z.reshape(-1)
    off = start - 2 * b0
    return z[off:off + count]


class NoiseStream:
    """Sequential reader over a counter-based normal stream.

    Two streams with equal ``(seed, stream_id, counter)`` produce identical
    draws; ``draw`` advances the counter so no draw is ever reused.
    """

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0):
        if seed < 0 or seed > _U64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if stream_id < 0 or counter < 0:
            raise ValueError("stream_id and counter must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)

    def draw(self, shape) -> np.ndarray:
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        count = int(np.prod(shape)) if shape else 1
        z = normals_at(self.seed, self.stream_id, self.counter, count)
        self.counter += count
        return z.reshape(shape)

    def peek(self, start: int, count: int) -> np.ndarray:
        return normals_at(self.seed, self.stream_id, start, count)

    def copy(self) -> "NoiseStream":
        return NoiseStream(self.seed, self.stream_id, self.counter)

    def __repr__(self):
        return f"NoiseStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"


def resolve_noise(noise, shape) -> np.ndarray:
    """Turn a ``NoiseStream`` or an explicit array into draws of ``shape``."""
    if isinstance(noise, NoiseStream):
        return noise.draw(shape)
    z = np.asarray(noise, dtype=float)
    if z.shape != tuple(shape):
        z = np.broadcast_to(z, shape)
    return z
