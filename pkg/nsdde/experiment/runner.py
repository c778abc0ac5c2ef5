from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from utils.env import chunk_paths, worker_count


logger = logging.getLogger("ConvergenceStudy")

T = TypeVar("T")


def path_chunks(n_paths: int, chunk_size: Optional[int] = None) -> List[np.ndarray]:
    """Consecutive path-index blocks; the split depends on NSDDE_CHUNK_PATHS only."""
    size = chunk_size or chunk_paths()
    return [np.arange(start, min(start + size, n_paths)) for start in range(0, n_paths, size)]


def run_chunks(
    fn: Callable[[np.ndarray], T],
    chunks: Sequence[np.ndarray],
    workers: Optional[int] = None,
) -> List[T]:
    """Apply fn to every chunk on a thread pool; results come back in chunk order."""
    workers = min(workers or worker_count(), max(len(chunks), 1))

    def timed(chunk: np.ndarray) -> T:
        started = time.perf_counter()
        result = fn(chunk)
        logger.debug(f"Paths {chunk[0]}..{chunk[-1]} done in {time.perf_counter() - started:.3f}s")
        return result

    if workers <= 1:
        return [timed(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(timed, chunks))
