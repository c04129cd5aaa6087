"""Deterministic, hierarchical random-number streams.

All randomness in the package flows through numpy's PCG64 (a 64-bit
permuted-congruential generator). Streams are derived hierarchically:
a root seed plus a path of string/int labels maps, via SHA-256, onto an
independent child seed. The same (root, path) always yields the same
stream on any platform, so every module is reproducible in isolation.

Typical paths: (seed, "glyphs", char, font, i) for a single image,
(seed, "train", "stream") for batch shuffling, and so on.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(root, *path):
    """Map a root seed and a label path to a stable 64-bit child seed."""
    h = hashlib.sha256()
    h.update(int(root).to_bytes(8, "little", signed=False))
    for label in path:
        if isinstance(label, (int, np.integer)):
            h.update(b"i" + int(label).to_bytes(8, "little", signed=True))
        elif isinstance(label, str):
            h.update(b"s" + label.encode("utf-8"))
        else:
            raise TypeError(f"seed path labels must be int or str, got {type(label)!r}")
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little") & MASK64


def make_rng(root, *path):
    """A fresh PCG64 generator for the stream named by (root, *path)."""
    return np.random.Generator(np.random.PCG64(derive_seed(root, *path)))
