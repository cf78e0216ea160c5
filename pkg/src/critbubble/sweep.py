"""Parameter sweeps over independent cells.

Each cell is a pure computation. Cells are dispatched to a
:class:`multiprocessing.pool.Pool` bounded by the configured number of
workers and collected with :meth:`Pool.map`, so the output order is the input
order regardless of which worker finished first.
"""

import logging
import multiprocessing
import sys
from multiprocessing.pool import Pool

from .exceptions import CritBubbleError

logger = logging.getLogger(__name__)


class CellOutcome:
    """The result of one sweep cell.

    :ivar key: The cell's parameters.
    :ivar value: The computed value, or `None` when the cell failed.
    :ivar str error: The error message of a failed cell.
    """

    def __init__(self, key, value=None, error=None):
        self.key = key
        self.value = value
        self.error = error

    @property
    def failed(self):
        return self.error is not None

    def __repr__(self):
        return "CellOutcome(key={!r}, failed={})".format(self.key, self.failed)


def catch_keyboard_interrupt(func):
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KeyboardInterrupt:
            logger.debug(
                "Shutting down worker %s...", multiprocessing.current_process().pid
            )
            sys.exit(0)

    return wrapper


class _Guarded:
    """Wrap a cell function so that library errors are recorded, not raised."""

    def __init__(self, func):
        self.func = func

    @catch_keyboard_interrupt
    def __call__(self, key):
        try:
            return CellOutcome(key, value=self.func(key))
        except CritBubbleError as e:
            logger.debug("Cell %r failed: %s", key, e.format_message())
            return CellOutcome(key, error="{}: {}".format(type(e).__name__, e.format_message()))


def run_cells(func, keys, workers=1):
    """Evaluate `func` on every key and return the outcomes in key order.

    `func` must be a picklable top-level callable when ``workers > 1``.
    """
    keys = list(keys)
    guarded = _Guarded(func)
    if workers <= 1 or len(keys) <= 1:
        return [guarded(key) for key in keys]
    logger.debug("Dispatching %d cells to %d workers.", len(keys), workers)
    with Pool(processes=workers) as pool:
        return pool.map(guarded, keys)
