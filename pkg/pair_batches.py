"""Row-batched exhaustive scans with progress tracking."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Tuple, TypeVar

from tqdm import tqdm

import config

logger = logging.getLogger(__name__)

T = TypeVar("T")


class BatchFailedError(ValueError):
    """Raised when a batch of an exhaustive scan fails."""

    pass


def calculate_batch_size(row_count: int) -> int:
    """
    Calculate batch size: max(MIN_BATCH_SIZE, ceil(row_count / MAX_BATCHES)).

    This ensures:
    - At most MAX_BATCHES batches in total
    - At least MIN_BATCH_SIZE rows per batch

    Args:
        row_count: Number of rows that the scan has to visit

    Returns:
        Batch size for the given row count

    Examples:
        >>> calculate_batch_size(50)
        100
        >>> calculate_batch_size(15000)
        150
    """
    if row_count <= 0:
        return config.MIN_BATCH_SIZE

    calculated_size = math.ceil(row_count / config.MAX_BATCHES)
    return max(config.MIN_BATCH_SIZE, calculated_size)


def make_batches(row_count: int) -> List[Tuple[int, int]]:
    """Split range(row_count) into consecutive half-open (start, stop) batches."""
    if row_count <= 0:
        return []
    batch_size = calculate_batch_size(row_count)
    return [
        (start, min(start + batch_size, row_count))
        for start in range(0, row_count, batch_size)
    ]


def run_batched(
    row_count: int, worker: Callable[[int, int], T], desc: str = "Scanning"
) -> List[T]:
    """
    Run ``worker(start, stop)`` over row batches and return results in batch order.

    Batches run on a thread pool capped by ``config.MAX_THREADS``; numpy
    releases the GIL inside the block arithmetic the workers do. Results are
    merged in batch order, so callers see the same output whatever the
    schedule was.

    Args:
        row_count: Number of rows to cover
        worker: Callable taking (start, stop) and returning a per-batch result
        desc: Progress bar label

    Returns:
        List of per-batch results, ordered by batch start

    Raises:
        BatchFailedError: If any batch raised; the first error is chained
    """
    batches = make_batches(row_count)
    if not batches:
        return []

    results: List[T] = [None] * len(batches)  # type: ignore[list-item]
    failed_batches = []
    threads = max(1, int(config.MAX_THREADS))

    with tqdm(
        total=len(batches), desc=desc, unit="batch", disable=not config.SHOW_PROGRESS
    ) as pbar:
        if threads == 1 or len(batches) == 1:
            for batch_idx, (start, stop) in enumerate(batches):
                try:
                    results[batch_idx] = worker(start, stop)
                except Exception as e:
                    failed_batches.append((batch_idx, e))
                pbar.set_postfix(
                    {"Rows": f"{stop}/{row_count}", "Errors": len(failed_batches)}
                )
                pbar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=min(threads, len(batches))) as pool:
                futures = {
                    pool.submit(worker, start, stop): batch_idx
                    for batch_idx, (start, stop) in enumerate(batches)
                }
                for future in as_completed(futures):
                    batch_idx = futures[future]
                    try:
                        results[batch_idx] = future.result()
                    except Exception as e:
                        failed_batches.append((batch_idx, e))
                    pbar.set_postfix({"Errors": len(failed_batches)})
                    pbar.update(1)

    if failed_batches:
        failed_batches.sort(key=lambda item: item[0])
        first_idx, first_error = failed_batches[0]
        logger.warning(
            f"{len(failed_batches)} out of {len(batches)} batches failed in {desc}"
        )
        raise BatchFailedError(
            f"{len(failed_batches)} of {len(batches)} batches failed. "
            f"First error (batch {first_idx + 1}): {first_error}"
        ) from first_error

    return results
