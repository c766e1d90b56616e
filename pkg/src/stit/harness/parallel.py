"""Seeded replication across a process pool.

Replication ``i`` of experiment ``name`` always draws from the stream keyed by
``(master_seed, crc32(name), i)``, and results are gathered in index order,
so outputs do not depend on the number of workers.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat

import numpy as np


def stream(master_seed: int, experiment: str, index: int) -> np.random.Generator:
    key = zlib.crc32(experiment.encode())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, key, index])))


def _run_chunk(task, master_seed, experiment, indices):
    rows = [np.atleast_1d(np.asarray(task(stream(master_seed, experiment, int(i))), dtype=float))
            for i in indices]
    return np.array(rows)


def replicate(task, n: int, master_seed: int, experiment: str, workers: int = 1) -> np.ndarray:
    """Stack ``task(rng_i)`` for ``i < n`` into an ``(n, k)`` array.

    ``task`` must be picklable when ``workers > 1``.
    """
    if workers <= 1 or n < 2:
        return _run_chunk(task, master_seed, experiment, range(n))
    chunks = [c for c in np.array_split(np.arange(n), 4 * workers) if len(c)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, repeat(task), repeat(master_seed),
                              repeat(experiment), chunks))
    return np.concatenate(parts)
