import copy
import functools
import logging
import os
import os.path
import time
from contextlib import ContextDecorator

import click

logger = logging.getLogger(__name__)


def cache(obj):
    _cache = obj._cache = {}

    @functools.wraps(obj)
    def memoizer(*args, **kwargs):
        key = args + tuple(sorted(kwargs.items()))
        if key not in _cache:
            _cache[key] = obj(*args, **kwargs)
        return _cache[key]

    return memoizer


class timer(ContextDecorator):
    def __init__(self, msg, logger=None):
        self.msg = msg
        self.logger = logger or logging.getLogger(__name__)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *args):
        self.end = time.perf_counter()
        self.duration = self.end - self.start
        self.logger.debug(self.msg, self.duration)


def ensure_dir(path):
    """Create directory unless it already exists."""
    os.makedirs(path, exist_ok=True)


def atomic_write(path, data):
    """Write `data` (str or bytes) to `path` through a temporary file.

    The temporary file is flushed and synced before it is renamed over
    `path`, so readers never observe a partially written report.
    """
    directory = os.path.dirname(path)
    if directory:
        ensure_dir(directory)
    mode = "wb" if isinstance(data, bytes) else "w"
    tmp_path = path + ".new"
    with open(tmp_path, mode) as fileobj:
        fileobj.write(data)
        fileobj.flush()
        os.fsync(fileobj.fileno())
    os.replace(tmp_path, path)
    logger.debug("Wrote %s", path)


class ColorFormatter(logging.Formatter):

    STYLING = {
        "WARNING": dict(fg="yellow"),
        "INFO": dict(fg="blue"),
        "DEBUG": dict(fg="cyan"),
        "ERROR": dict(fg="red", bold=True),
        "CRITICAL": dict(fg="magenta", bold=True),
    }

    def format(self, record):
        level = record.levelname
        color_record = copy.copy(record)
        if record.levelname in self.STYLING:
            styling = self.STYLING[level]
            padded_level_name = "{:<10}".format(record.levelname.lower())
            color_record.levelname = click.style(padded_level_name, **styling)
            color_record.name = click.style(record.name, **styling)
            color_record.msg = record.msg
        return super().format(color_record)


def parse_range(text):
    """Parse an inclusive integer range such as ``3..6`` or ``5``.

    An empty range (upper bound below lower bound) is returned as an empty
    list; the caller decides whether that is an error.
    """
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    return list(range(lo, hi + 1))


class DimRange(click.ParamType):
    """A click parameter accepting an inclusive range such as ``3..6``."""

    name = "range"

    def __init__(self, minimum=3):
        self.minimum = minimum

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            dims = parse_range(value)
        except ValueError:
            self.fail("{!r} is not a range like 3..6.".format(value), param, ctx)
        if not dims:
            self.fail("The range {!r} is empty.".format(value), param, ctx)
        if dims[0] < self.minimum:
            self.fail("The range must start at {} or above.".format(self.minimum), param, ctx)
        return dims


class FractionalOrder(click.ParamType):
    """A click parameter accepting a fractional order in the open interval (0, 1)."""

    name = "order"

    def convert(self, value, param, ctx):
        try:
            s = float(value)
        except (TypeError, ValueError):
            self.fail("{!r} is not a number.".format(value), param, ctx)
        if not 0.0 < s < 1.0:
            self.fail("s must lie in (0, 1), got {}.".format(value), param, ctx)
        return s
