import logging
from multiprocessing import Pool
from typing import Callable, Iterable, Optional, TypeVar

from tqdm import tqdm

from ..env import app

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    desc: Optional[str] = None,
    threads: Optional[int] = None,
) -> list[R]:
    """
    Apply `fn` to every item, in worker processes when more than one thread is allowed.

    Results come back in input order whatever the number of workers, so assembled grids are
    identical between sequential and parallel runs.

    Args:
        fn: A picklable callable, i.e. a module-level function or a functools.partial of one.
        items: The work items.
        desc: Progress bar label.
        threads: Worker count; defaults to SOLITON_THREADS.

    Returns:
        The results, one per item, in order.
    """
    items = list(items)
    threads = min(threads or app.threads, max(len(items), 1))
    if threads <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=None)]

    logger.debug("mapping %d items over %d processes", len(items), threads)
    with Pool(processes=threads) as pool:
        return list(tqdm(pool.imap(fn, items), total=len(items), desc=desc, disable=None))
