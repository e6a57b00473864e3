"""Counter-based random streams.

Every random draw in the package is addressed by a key and a counter on a
Philox4x64 generator, so a draw depends only on *what* it is for (a vertex
pair, a trial) and never on the order in which work is scheduled.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

from ._validation import check_seed

# second key word, one per consumer
DENSE_EDGES = 1
SPARSE_EDGES = 2

_U64 = np.uint64


@dataclass(frozen=True)
class Seed:
    """Root of a reproducible computation: a 64-bit unsigned integer."""

    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "root", check_seed(self.root))

    def child(self, label: str, index: int) -> "Seed":
        """Derive an independent seed for ``(label, index)``, e.g. one trial."""
        return Seed(hash_u64(f"{self.root}:{label}:{index}"))


def as_seed(seed) -> Seed:
    return seed if isinstance(seed, Seed) else Seed(seed)


def hash_u64(text: str) -> int:
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def philox(seed: Seed, stream: int, counter: tuple[int, int, int, int]) -> np.random.Philox:
    return np.random.Philox(
        key=np.array([seed.root, stream], dtype=_U64),
        counter=np.array(counter, dtype=_U64),
    )


_local = threading.local()


def raw_draws(seed: Seed, stream: int, counter: tuple[int, int, int, int], count: int) -> np.ndarray:
    """``count`` raw words from the stream at ``counter``; same values as :func:`philox`.

    Reuses one generator per thread and resets its state, which is several
    times cheaper than constructing a new one for short draws.
    """
    gen = getattr(_local, "gen", None)
    if gen is None:
        gen = _local.gen = np.random.Philox(0)
    gen.state = {
        "bit_generator": "Philox",
        "state": {"counter": np.array(counter, dtype=_U64), "key": np.array([seed.root, stream], dtype=_U64)},
        "buffer": np.zeros(4, dtype=_U64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }
    return gen.random_raw(count)


def pair_draws(seed: Seed, block: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit draws for pairs ``start .. start+count-1`` of a part-pair block.

    Pair ``r`` always receives lane ``r % 4`` of Philox block ``r // 4``, so any
    chunking of the index range reproduces the same values.
    """
    if count <= 0:
        return np.empty(0, dtype=_U64)
    head = start % 4
    return raw_draws(seed, DENSE_EDGES, (start // 4, block, 0, 0), head + count)[head:]


def bernoulli_threshold(q: float) -> int | None:
    """Integer cutoff t with P(raw < t) = q for a uniform 64-bit raw draw.

    Returns None for q == 1 (every draw succeeds). Exact for dyadic q.
    """
    if q >= 1.0:
        return None
    return int(q * 2.0**64)


def uniform_open(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit draws to doubles strictly inside (0, 1)."""
    return ((raw >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53
