"""Order-preserving process pool map.

Workers are forked, so large read-only state (polytopes, candidate pools)
is inherited rather than pickled.  Results come back in input order, which
keeps every merged output independent of the worker count.
"""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Iterable, Iterator

_SHARED: dict[str, Any] = {}


def shared(key: str) -> Any:
    return _SHARED[key]


def ordered_map(fn: Callable[[Any], Any], items: Iterable[Any], workers: int = 1,
                state: dict[str, Any] | None = None) -> Iterator[Any]:
    """Yield ``fn(item)`` in input order, using up to ``workers`` processes.

    ``state`` is published to :func:`shared` before workers start.
    """
    if state:
        _SHARED.update(state)
    try:
        if workers <= 1 or "fork" not in mp.get_all_start_methods():
            for item in items:
                yield fn(item)
            return
        with ProcessPoolExecutor(max_workers=workers, mp_context=mp.get_context("fork")) as ex:
            yield from ex.map(fn, items)
    finally:
        if state:
            for k in state:
                _SHARED.pop(k, None)
