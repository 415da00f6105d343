"""Deterministic seed derivation for independent random streams.

Every stochastic stage derives its own seed from a base seed plus a string
path, so outputs never depend on scheduling or call order.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and any hashable path parts."""
    material = repr((int(base),) + tuple(parts)).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "little")


__all__ = ["derive_seed"]
