"""Seedable, platform-independent random streams.

Every sampling operation draws from its own PCG64 stream, derived from the
user seed plus a fixed per-operation lane. Streams are independent, so adding
draws to one operation never perturbs another, and a recorded seed replays
bit-identically on any platform.
"""

from __future__ import annotations

import numpy as np

OP_SUBSAMPLE = 1
OP_TARGET = 2
OP_MATCH = 3
OP_CONSTRUCT = 4
OP_GENERATE = 5
OP_POOL = 6

_MASK64 = 0xFFFFFFFFFFFFFFFF


def op_rng(seed: int, op_id: int, *lane: int) -> np.random.Generator:
    """Generator for one operation's private stream.

    `lane` splits further when an operation needs several independent
    streams (e.g. one per side of a two-dataset operation).
    """
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=(op_id, *lane))
    return np.random.Generator(np.random.PCG64(ss))
