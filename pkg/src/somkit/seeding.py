"""Deterministic derivation of per-phase random streams from one master seed.

Every training phase (weight init, unsupervised fit, supervised fit, data
splits, each cross-validation fold) gets its own stream so that partial
re-runs reproduce the full run. The mixing function is
``numpy.random.SeedSequence(master_seed, spawn_key=(phase, *extra))`` with
the fixed phase tags below; resolved-config records name this scheme.
"""

from __future__ import annotations

import numpy as np

SEED_SCHEME = "numpy-seedsequence-spawn-key-v1"

PHASES = {
    "init": 0,
    "unsupervised": 1,
    "supervised": 2,
    "split": 3,
    "fold": 4,
    "data": 5,
}


def phase_rng(master_seed: int, phase: str, *extra: int) -> np.random.Generator:
    """Seeded generator for one named phase (plus optional indices, e.g. fold)."""
    key = (PHASES[phase],) + tuple(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
