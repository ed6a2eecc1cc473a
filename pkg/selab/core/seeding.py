"""
Per-phase seed derivation.

Every random stream in a run is derived from one root seed by hashing the
phase name (and optional keys such as a target id) into a 63-bit integer, so
each phase can be replayed on its own.
"""

import hashlib

import numpy as np


def derive_seed(root_seed: int, phase: str, *keys: object) -> int:
    """Derive a reproducible child seed for ``phase`` from ``root_seed``."""
    material = ":".join([str(int(root_seed)), phase, *(str(k) for k in keys)])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def phase_rng(root_seed: int, phase: str, *keys: object) -> np.random.Generator:
    """Return a numpy Generator seeded for ``phase``."""
    return np.random.default_rng(derive_seed(root_seed, phase, *keys))
