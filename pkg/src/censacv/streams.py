"""Reproducible random streams.

Every draw in the package comes from a Philox counter-based generator keyed by
``(seed, purpose, *indices)`` through :class:`numpy.random.SeedSequence`
spawn keys. Replicate ``r`` of an experiment therefore sees the same numbers
no matter how replicates are split across workers.

Purposes
--------
LATENT  latent process innovations
CENSOR  modulating process
AUX     anything else (e.g. moment estimation by long simulation)
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

LATENT = 0
CENSOR = 1
AUX = 2


def stream(seed: int, purpose: int, *indices: int) -> np.random.Generator:
    key = (int(purpose),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def default_threads() -> int:
    return os.cpu_count() or 1


def chunked_map(fn, n_items: int, threads: int | None = None, chunk: int = 64) -> list:
    """Apply ``fn(start, stop)`` over ``[0, n_items)`` in ordered chunks.

    Results come back in chunk order regardless of the worker count.
    """
    bounds = [(a, min(a + chunk, n_items)) for a in range(0, n_items, chunk)]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))
