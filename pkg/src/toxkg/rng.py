"""Deterministic random-stream derivation.

Every seeded entry point derives named child streams from its seed so that
adding or removing one consumer never shifts the draws of another. Streams are
keyed by (seed, purpose-string); the same pair always yields the same stream.
"""

import hashlib

import numpy as np


def _tag_to_ints(tag):
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def stream(seed, *tags):
    """Return a numpy Generator for the given seed and purpose tags."""
    entropy = [int(seed) & 0xFFFFFFFF]
    for tag in tags:
        entropy.extend(_tag_to_ints(str(tag)))
    return np.random.default_rng(np.random.SeedSequence(entropy))
