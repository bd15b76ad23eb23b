# Copyright 2025 qpf authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Executors for the embarrassingly parallel parts of qpf.

Block sweeps over sector points, inverse-bound sweeps over ε and image
sampling over rows submit independent tasks through a :class:`QpfExecutor`.
``submit`` returns a Future in every implementation, and :func:`map_ordered`
gathers results in submission order so outputs do not depend on scheduling.
"""

import os
from abc import ABC, abstractmethod
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional

THREADS_ENV = "QPF_THREADS"


class QpfExecutor(ABC):
    """Abstract task executor: decides how a callable is run."""

    @abstractmethod
    def submit(self, fn: Callable[..., Any], *args, **kwargs) -> Future:
        """Schedule ``fn(*args, **kwargs)`` and return its Future."""

    def shutdown(self) -> None:
        """Release worker resources, if any."""


class SequentialExecutor(QpfExecutor):
    """Runs each task immediately in the calling thread."""

    class _ImmediateFuture(Future):
        """Future that is already resolved with a value."""

        def __init__(self, result: Any):
            super().__init__()
            self.set_result(result)

    def submit(self, fn: Callable[..., Any], *args, **kwargs) -> Future:
        # exceptions propagate straight out of submit()
        return SequentialExecutor._ImmediateFuture(fn(*args, **kwargs))


class ThreadedExecutor(QpfExecutor):
    """Thread-pool executor; numpy kernels release the GIL on large arrays."""

    def __init__(self, max_workers: int):
        if max_workers < 1:
            raise ValueError("max_workers must be at least 1")
        self.max_workers = max_workers
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def submit(self, fn: Callable[..., Any], *args, **kwargs) -> Future:
        return self._pool.submit(fn, *args, **kwargs)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def thread_count(default: int = 1) -> int:
    """Worker cap from ``QPF_THREADS`` (invalid or missing values give ``default``)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)


def executor_from_env() -> QpfExecutor:
    """Sequential executor for one thread, thread pool otherwise."""
    workers = thread_count()
    if workers == 1:
        return SequentialExecutor()
    return ThreadedExecutor(workers)


def map_ordered(
    fn: Callable[..., Any],
    items: Iterable[Any],
    executor: Optional[QpfExecutor] = None,
) -> List[Any]:
    """Apply ``fn`` to every item through ``executor``; results keep input order."""
    owned = executor is None
    active = executor_from_env() if executor is None else executor
    try:
        futures = [active.submit(fn, item) for item in items]
        return [future.result() for future in futures]
    finally:
        if owned:
            active.shutdown()
