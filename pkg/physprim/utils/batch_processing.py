"""
Batch processing utilities for physprim
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Iterable, List, Optional

from tqdm import tqdm

from .config import get_global_config


def parallel_map(func: Callable[[Any], Any], items: Iterable[Any],
                 max_workers: Optional[int] = None,
                 desc: Optional[str] = None,
                 show_progress: Optional[bool] = None) -> List[Any]:
    """
    Apply ``func`` to every item, possibly on a thread pool.

    Results come back in input order whatever the completion order, so the
    output does not depend on ``max_workers``. The first exception raised by
    a worker is re-raised after the pool shuts down.

    Args:
        func: Pure function to apply
        items: Inputs
        max_workers: Worker threads (global ``max_workers`` if None; 1 runs inline)
        desc: Progress bar label
        show_progress: Show a tqdm bar (global ``progress_bar`` if None)

    Returns:
        List of results aligned with ``items``
    """

    items = list(items)
    if max_workers is None:
        max_workers = get_global_config('max_workers') or 1
    if show_progress is None:
        show_progress = bool(get_global_config('progress_bar')) and desc is not None

    results: List[Any] = [None] * len(items)

    if max_workers <= 1 or len(items) <= 1:
        iterator = tqdm(items, desc=desc, disable=not show_progress, leave=False)
        for index, item in enumerate(iterator):
            results[index] = func(item)
        return results

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {
            executor.submit(func, item): index
            for index, item in enumerate(items)
        }

        with tqdm(total=len(items), desc=desc, disable=not show_progress, leave=False) as progress:
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()
                progress.update(1)

    return results


def process_in_batches(items: Iterable[Any], batch_size: int = 10):
    """Yield consecutive slices of ``items`` with at most ``batch_size`` entries."""
    items = list(items)
    for start in range(0, len(items), batch_size):
        yield items[start:start + batch_size]
