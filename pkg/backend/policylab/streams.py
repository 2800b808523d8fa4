"""Counter-based random streams for replicated experiments.

Every wave of every replication draws from its own Philox stream. The key is
derived from ``(seed, rep_index)`` through :class:`numpy.random.SeedSequence`
and the counter's two high words hold ``(purpose, wave_index)``, so the low
words advanced by sampling never collide with another stream. Results depend
only on these coordinates, never on execution order or worker count.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    """Sub-stream selector inside one wave."""

    POSTERIOR = 0
    OUTCOMES = 1


def replication_key(seed: int, rep_index: int) -> np.ndarray:
    """Return the 128-bit Philox key for one replication."""

    if seed < 0 or rep_index < 0:
        raise ValueError("seed and rep_index must be non-negative integers")
    sequence = np.random.SeedSequence(seed, spawn_key=(rep_index,))
    return sequence.generate_state(2, dtype=np.uint64)


def wave_generator(key: np.ndarray, wave_index: int, purpose: Purpose) -> np.random.Generator:
    """Return the generator for ``wave_index`` under a replication key."""

    counter = np.array([0, 0, int(purpose), wave_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def stream(seed: int, rep_index: int, wave_index: int, purpose: Purpose) -> np.random.Generator:
    """Shorthand for :func:`wave_generator` keyed by ``(seed, rep_index)``."""

    return wave_generator(replication_key(seed, rep_index), wave_index, purpose)


__all__ = ["Purpose", "replication_key", "wave_generator", "stream"]
