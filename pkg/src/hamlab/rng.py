"""Reproducible counter-based RNG streams for Monte Carlo trials.

Every randomized routine in this package receives either an explicit seed or a
``numpy.random.Generator``.  Batch experiments derive one independent stream
per trial from ``(master_seed, trial_index)``; aggregation is then
order-independent, so results depend only on the master seed and the trial
count, never on scheduling.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "spawn_key"]


def spawn_key(master_seed: int, *indices: int) -> list[int]:
    """Key material for the stream identified by (master_seed, *indices)."""
    if master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    return [int(master_seed)] + [int(i) for i in indices]


def stream(master_seed: int, *indices: int) -> np.random.Generator:
    """Independent Philox-backed generator for one (seed, trial, ...) tuple.

    Philox is counter-based: streams keyed by distinct tuples never overlap,
    and the same tuple always reproduces the same draws.
    """
    seq = np.random.SeedSequence(spawn_key(master_seed, *indices))
    return np.random.Generator(np.random.Philox(seq))
