"""
Deterministic seed splitting and the Monte Carlo fan-out used by every experiment.

Per-path seeds are ``mix64(master_seed XOR path_index)`` where ``mix64`` is the
splitmix64 finaliser. Results are collected by path index, so an experiment is
a pure function of its master seed whatever the worker count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from tqdm import tqdm

from config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")

MASK64 = (1 << 64) - 1


def mix64(value: int) -> int:
    """splitmix64 finaliser on a 64-bit unsigned integer."""
    z = (int(value) + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for stream ``index`` under ``master_seed``."""
    if master_seed < 0 or index < 0:
        raise ValueError("Seeds and stream indices must be non-negative")
    return mix64((int(master_seed) ^ int(index)) & MASK64)


def path_seeds(master_seed: int, n_paths: int) -> List[int]:
    """Seeds of paths ``0 .. n_paths - 1``."""
    return [derive_seed(master_seed, index) for index in range(n_paths)]


def make_rng(seed: int) -> np.random.Generator:
    """numpy Generator for a 64-bit seed."""
    return np.random.default_rng(int(seed) & MASK64)


def map_paths(fn: Callable[[int, int], T], n_paths: int, master_seed: int,
              workers: Optional[int] = None, desc: str = "paths") -> List[T]:
    """
    Evaluate ``fn(index, seed)`` for every path index.

    Args:
        fn: Pure function of the path index and its derived seed
        n_paths: Number of paths
        master_seed: Experiment seed
        workers: Thread count (defaults to MC_WORKERS)
        desc: Progress bar label

    Returns:
        Results ordered by path index
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")

    workers = workers or config.mc_workers
    seeds = path_seeds(master_seed, n_paths)
    disable = not config.show_progress

    if workers == 1:
        return [fn(index, seed) for index, seed in
                tqdm(enumerate(seeds), total=n_paths, desc=desc, disable=disable, leave=False)]

    logger.debug(f"Running {n_paths} {desc} on {workers} workers")
    results: List[Optional[T]] = [None] * n_paths
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, index, seed): index for index, seed in enumerate(seeds)}
        for future in tqdm(futures, total=n_paths, desc=desc, disable=disable, leave=False):
            results[futures[future]] = future.result()
    return results


def ordered_sum(blocks: Sequence[float]) -> float:
    """Sum partial results in block order (pairwise within numpy) for reproducible totals."""
    return float(np.sum(np.asarray(blocks, dtype=float)))
