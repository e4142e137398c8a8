"""Reproducible random streams.

All randomness flows through counter-based Philox generators keyed by
``(master_seed, path...)`` so that serial and parallel runs, and runs with
different thread counts, consume identical streams.
"""
from __future__ import annotations

import numpy as np

# Path prefixes: keep replication streams disjoint from the once-per-experiment
# draws (covariance, signal) and from Monte Carlo perturbations.
_SHARED = 0
_REPLICATION = 1


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Philox generator keyed by the master seed and an integer path."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(ss))


def replication_stream(master_seed: int, rep: int) -> np.random.Generator:
    """Stream for replication ``rep``; disjoint across reps for any fixed seed."""
    return stream(master_seed, _REPLICATION, rep)


def covariance_stream(master_seed: int) -> np.random.Generator:
    """Stream for the covariance draw shared by all replications."""
    return stream(master_seed, _SHARED, 0)


def signal_stream(master_seed: int) -> np.random.Generator:
    """Stream for the signal draw shared by all replications."""
    return stream(master_seed, _SHARED, 1)
