"""Deterministic per-replica random streams.

Every replica draws from its own counter-based Philox stream keyed by
(master seed, replica index), so results never depend on how replicas are
scheduled across workers.  Gaussian variates are produced by Box-Muller on
the stream's uniforms; with a fixed numpy version and IEEE-754 doubles the
same key yields the same path everywhere (best-effort contract: libm sin,
cos and log must agree bit-for-bit for cross-platform identity).
"""

from __future__ import annotations

import math

import numpy as np

SEED_BITS = 64
_SEED_LIMIT = 1 << SEED_BITS


def validate_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ValueError("seed must be an integer")
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError(f"seed must be in [0, 2**{SEED_BITS})")
    return int(seed)


def replica_stream(master_seed: int, replica: int) -> np.random.Generator:
    """Stream for one replica: Philox keyed by (master_seed, replica)."""
    validate_seed(master_seed)
    if replica < 0 or replica >= _SEED_LIMIT:
        raise ValueError("replica index out of range")
    key = (int(master_seed) << SEED_BITS) | int(replica)
    return np.random.Generator(np.random.Philox(key=key))


def normal_pairs(stream: np.random.Generator, count: int) -> np.ndarray:
    """(count, 2) standard normals via Box-Muller; 2 uniforms per pair."""
    u1 = 1.0 - stream.random(count)  # in (0, 1]; log stays finite
    u2 = stream.random(count)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * math.pi * u2
    return np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def normals(stream: np.random.Generator, count: int) -> np.ndarray:
    """count standard normals; always consumes full Box-Muller pairs."""
    pairs = normal_pairs(stream, (count + 1) // 2)
    return pairs.reshape(-1)[:count]
