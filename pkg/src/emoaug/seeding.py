"""Deterministic seed derivation.

All randomized stages derive per-item seeds by hashing the global seed with
stable string keys, so results do not depend on scheduling or worker count.
"""

import hashlib
import random


def mix(seed: int, *parts: object) -> int:
    """Derive a 64-bit child seed from a root seed and any hashable parts."""
    payload = "|".join([str(seed)] + [str(p) for p in parts])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(seed: int, *parts: object) -> random.Random:
    return random.Random(mix(seed, *parts))
