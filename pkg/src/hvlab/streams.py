"""Reproducible random substreams for partitioned Monte Carlo runs.

Intervals are grouped into fixed-size blocks. Every block owns a Philox
(counter-based) stream keyed by ``(seed, tag, block_index)``, so the draws
an interval sees never depend on how blocks are later grouped into
partitions. A partition is a contiguous run of whole blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 16

T = TypeVar("T")


@dataclass(frozen=True)
class Block:
    index: int
    start: int
    size: int


def block_rng(seed: int, block: int, tag: int = 0) -> np.random.Generator:
    """Generator for one block. ``tag`` separates independent uses of a seed."""
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(int(tag), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def blocks(n_intervals: int, block_size: int = BLOCK_SIZE) -> list[Block]:
    out = []
    start = 0
    idx = 0
    while start < n_intervals:
        size = min(block_size, n_intervals - start)
        out.append(Block(idx, start, size))
        start += size
        idx += 1
    return out


def partition(items: Sequence[T], k: int) -> list[list[T]]:
    """Split ``items`` into at most ``k`` contiguous, near-equal, non-empty groups."""
    if k < 1:
        raise ValueError("partition count must be >= 1")
    n = len(items)
    k = min(k, n) or 1
    bounds = np.linspace(0, n, k + 1).round().astype(int)
    return [list(items[bounds[i]:bounds[i + 1]]) for i in range(k)]


def default_partitions() -> int:
    return os.cpu_count() or 1


def map_partitions(fn: Callable[[list[Block]], T], n_intervals: int, partitions: int) -> list[T]:
    """Apply ``fn`` to each partition's block list; results come back in partition order.

    numpy releases the GIL inside its kernels, so a thread pool is enough here.
    """
    groups = partition(blocks(n_intervals), partitions)
    if len(groups) == 1:
        return [fn(groups[0])]
    with ThreadPoolExecutor(max_workers=len(groups)) as pool:
        return list(pool.map(fn, groups))
