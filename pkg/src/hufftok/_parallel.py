"""Order-preserving chunked map over an optional process pool."""

from __future__ import annotations

import os
from collections import deque
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Any

ENV_THREADS = "HUFFTOK_THREADS"

_state: Any = None


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(ENV_THREADS, "").strip()
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"{ENV_THREADS} must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    return max(1, workers)


def _batched(items: Iterable, size: int) -> Iterator[list]:
    it = iter(items)
    while chunk := list(islice(it, size)):
        yield chunk


def _init(factory, args):
    global _state
    _state = factory(*args)


def _call(func, chunk):
    return func(_state, chunk)


def map_chunks(
    func: Callable[[Any, list], Any],
    items: Iterable,
    factory: Callable[..., Any],
    factory_args: tuple = (),
    workers: int = 1,
    chunk_size: int = 10_000,
) -> Iterator[Any]:
    """Yield ``func(state, chunk)`` for consecutive chunks, in input order.

    ``state = factory(*factory_args)`` is built once per worker process (or
    once locally when ``workers == 1``).  At most ``2 * workers`` chunks are
    in flight, so memory stays bounded on large files.
    """
    chunks = _batched(items, chunk_size)
    if workers <= 1:
        state = factory(*factory_args)
        for chunk in chunks:
            yield func(state, chunk)
        return

    with ProcessPoolExecutor(workers, initializer=_init, initargs=(factory, factory_args)) as ex:
        pending: deque = deque()
        for chunk in chunks:
            pending.append(ex.submit(_call, func, chunk))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
