"""Counter-based random streams and a deterministic parallel map.

Every random draw in the package comes from a :class:`SeedStream`, a pair
``(master_seed, stream_id)`` mapped onto a Philox-4x64 bit generator.  The
mixing rule is fixed and documented here so that results can be reproduced
outside this package::

    key     = master_seed | (stream_id << 64)      # 128-bit Philox key
    counter = substream << 192                     # 256-bit Philox counter

Two streams with different keys are statistically independent by the design
of Philox; substreams start far apart on the same key.  Nothing depends on
thread scheduling, because a stream is materialised from its identifiers
alone.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

__all__ = [
    "SeedStream",
    "as_generator",
    "resolve_threads",
    "ordered_map",
    "chunk_sizes",
]

_MASK64 = (1 << 64) - 1
T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class SeedStream:
    """Identifier of one reproducible random stream.

    Parameters
    ----------
    master_seed : int
        64-bit seed shared by a whole run.
    stream_id : int
        64-bit stream index, typically a trial or chunk number.
    substream : int
        Offset selecting a far-away region of the same stream, used for
        retries after a rejected draw.
    """

    master_seed: int
    stream_id: int = 0
    substream: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "substream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0 or v > _MASK64:
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {v!r}")

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of the stream."""
        key = int(self.master_seed) | (int(self.stream_id) << 64)
        counter = int(self.substream) << 192
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def spawn(self, stream_id: int) -> "SeedStream":
        """Stream with the same master seed and a different ``stream_id``."""
        return SeedStream(self.master_seed, stream_id)

    def retry(self, attempt: int) -> "SeedStream":
        """Substream used for the ``attempt``-th redraw of this stream."""
        return SeedStream(self.master_seed, self.stream_id, attempt)


def as_generator(rng) -> np.random.Generator:
    """Accept a SeedStream, a Generator or an int seed and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeedStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return SeedStream(int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def resolve_threads(threads: int | None = None) -> int:
    """Worker count from the argument, then ``EIGENCHAOS_THREADS``, then 1."""
    if threads is None:
        env = os.environ.get("EIGENCHAOS_THREADS")
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Apply ``fn`` to every item and return results in input order.

    The result is independent of ``threads`` as long as ``fn`` is a pure
    function of its item, which is how every caller in the package uses it.
    """
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    """Split ``total`` trials into fixed-size chunks (the last may be short)."""
    if total < 0 or chunk < 1:
        raise ValueError("need total >= 0 and chunk >= 1")
    out = [chunk] * (total // chunk)
    if total % chunk:
        out.append(total % chunk)
    return out


def fsum_mean(values: Sequence[float]) -> float:
    """Mean with a correctly rounded sum (``math.fsum``)."""
    return math.fsum(values) / len(values)
