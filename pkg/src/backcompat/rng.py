"""Deterministic randomness.

All randomness in this package flows from explicit 64-bit seeds through
Philox counter-based generators keyed by hashing the seed together with a
context path (strings, ints, floats). Hashing uses BLAKE2b, so streams are
identical across platforms and Python processes, and per-instance substreams
keyed by example_id make corruption draws independent of dataset order.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def _hash_parts(seed: int, parts: tuple, digest_size: int) -> bytes:
    h = hashlib.blake2b(digest_size=digest_size)
    h.update(struct.pack("<Q", seed & _MASK64))
    for part in parts:
        if isinstance(part, bool):  # bool is an int subtype; disambiguate
            h.update(b"b" + struct.pack("<?", part))
        elif isinstance(part, int):
            h.update(b"i" + struct.pack("<q", part & _MASK64 if part >= 0 else part))
        elif isinstance(part, float):
            h.update(b"f" + struct.pack("<d", part))
        elif isinstance(part, str):
            raw = part.encode("utf-8")
            h.update(b"s" + struct.pack("<I", len(raw)) + raw)
        else:
            raise TypeError(f"unsupported seed part type: {type(part)!r}")
    return h.digest()


def derive_seed(seed: int, *parts: int | float | str) -> int:
    """Derive a child 64-bit seed from a root seed and a context path.

    Adding new context paths never perturbs streams derived from other paths.
    """
    return int.from_bytes(_hash_parts(seed, parts, 8), "little")


def stream(seed: int, *parts: int | float | str) -> np.random.Generator:
    """A Philox generator keyed by (seed, context path)."""
    key = int.from_bytes(_hash_parts(seed, parts, 16), "little")
    return np.random.Generator(np.random.Philox(key=key))
