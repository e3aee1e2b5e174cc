# src/utils/seeding.py

"""
SHA-512 based seed derivation and content hashing.

Each trial and run gets its seed from a key built out of the trial
parameters (graph, sample count, trial index, run index), so any single
run can be replayed in isolation.
"""

import json
from typing import Any

from cryptography.hazmat.primitives import hashes


def sha512_hex(payload: bytes) -> str:
    digest = hashes.Hash(hashes.SHA512())
    digest.update(payload)
    return digest.finalize().hex()


def derive_seed(*parts: Any) -> int:
    """
    Derive a 64-bit seed from the given key parts.

    Args:
        parts: Values identifying the run (graph name, n, trial, run, ...)

    Returns:
        Unsigned 64-bit integer taken from the first 8 bytes of the digest
    """
    key = '|'.join(str(part) for part in parts).encode('utf-8')
    digest = hashes.Hash(hashes.SHA512())
    digest.update(key)
    return int.from_bytes(digest.finalize()[:8], 'big')


def content_hash(obj: Any, length: int = 16) -> str:
    """Stable short hash of a JSON-serializable object."""
    payload = json.dumps(obj, sort_keys=True, separators=(',', ':')).encode('utf-8')
    return sha512_hex(payload)[:length]
