"""Deterministic random-stream trees.

Every randomised routine in this package receives either a
``numpy.random.Generator`` (leaf operations that draw variates) or a
``numpy.random.SeedSequence`` (operations that fan out into independent
sub-tasks).  Children are derived from a parent sequence purely by key,
never by a mutating ``spawn`` counter, so the stream consumed by
(candidate i, bootstrap replicate b) is the same whatever order tasks run
in and however many workers are used.
"""

from __future__ import annotations

import numpy as np


def root_stream(seed: int) -> np.random.SeedSequence:
    """Root of a stream tree for a 64-bit integer seed."""
    return np.random.SeedSequence(int(seed))


def substream(parent: np.random.SeedSequence, *key: int) -> np.random.SeedSequence:
    """Child sequence of ``parent`` addressed by a tuple of non-negative ints.

    Pure function of (parent entropy, parent spawn_key, key): calling it twice
    yields identical streams, and siblings with different keys are independent.
    """
    if any(k < 0 for k in key):
        raise ValueError("substream keys must be non-negative integers")
    return np.random.SeedSequence(
        entropy=parent.entropy,
        spawn_key=tuple(parent.spawn_key) + tuple(int(k) for k in key),
    )


def generator(stream: np.random.SeedSequence) -> np.random.Generator:
    """Instantiate the PCG64 generator for a stream node."""
    return np.random.default_rng(stream)
