"""
Deterministic block map-reduce on top of multiprocessing.Pool.

Blocks are mapped in order and reduced left to right, so the result does not
depend on the worker count as long as the reducer is exact.
"""
import os
import sys
from functools import reduce
from multiprocessing import Pool
from typing import Callable, List, Sequence, TypeVar

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_blocks(func: Callable[[T], R], blocks: Sequence[T], workers: int = 1) -> List[R]:
    """Apply func to every block, in block order."""
    if workers <= 1 or len(blocks) <= 1:
        return [func(block) for block in blocks]
    n_proc = min(workers, len(blocks))
    logger.debug(f"Mapping {len(blocks)} blocks over {n_proc} workers")
    with Pool(processes=n_proc) as pool:
        return pool.map(func, blocks, chunksize=1)


def map_reduce(func: Callable[[T], R], blocks: Sequence[T],
               reducer: Callable[[R, R], R], workers: int = 1) -> R:
    """Map func over blocks and fold the results in block order."""
    if not blocks:
        raise ValueError("map_reduce needs at least one block")
    return reduce(reducer, map_blocks(func, blocks, workers))


def split_range(n: int, n_blocks: int) -> List[range]:
    """Split range(n) into at most n_blocks contiguous ranges."""
    n_blocks = max(1, min(n_blocks, n))
    bounds = [n * i // n_blocks for i in range(n_blocks + 1)]
    return [range(bounds[i], bounds[i + 1]) for i in range(n_blocks)]

