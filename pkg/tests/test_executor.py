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
Executors behind the parallel sweeps.

Key behaviors under test:
  - submit() returns a Future in every implementation.
  - The sequential executor raises task exceptions from submit() itself.
  - map_ordered keeps input order regardless of scheduling.
  - QPF_THREADS selects the executor.
"""

import time
from concurrent.futures import Future

import pytest

from qpf.execution import (
    SequentialExecutor,
    ThreadedExecutor,
    executor_from_env,
    map_ordered,
    thread_count,
)


def test_sequential_submit_returns_resolved_future():
    fut = SequentialExecutor().submit(lambda a, b: a + b, 2, 3)
    assert isinstance(fut, Future)
    assert fut.done()
    assert fut.result() == 5


def test_sequential_submit_raises_immediately():
    def explode():
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        SequentialExecutor().submit(explode)


def test_map_ordered_keeps_order_with_threads():
    executor = ThreadedExecutor(4)

    def slow_square(x):
        # later items finish first
        time.sleep(0.01 * (5 - x))
        return x * x

    try:
        assert map_ordered(slow_square, range(5), executor) == [0, 1, 4, 9, 16]
    finally:
        executor.shutdown()


def test_threaded_executor_needs_workers():
    with pytest.raises(ValueError):
        ThreadedExecutor(0)


@pytest.mark.parametrize(
    "raw, expected", [("", 1), ("abc", 1), ("0", 1), ("3", 3)]
)
def test_thread_count(monkeypatch, raw, expected):
    monkeypatch.setenv("QPF_THREADS", raw)
    assert thread_count() == expected


def test_executor_from_env(monkeypatch):
    monkeypatch.delenv("QPF_THREADS", raising=False)
    assert isinstance(executor_from_env(), SequentialExecutor)
    monkeypatch.setenv("QPF_THREADS", "2")
    executor = executor_from_env()
    try:
        assert isinstance(executor, ThreadedExecutor)
        assert executor.max_workers == 2
    finally:
        executor.shutdown()


def test_map_ordered_without_executor(monkeypatch):
    monkeypatch.setenv("QPF_THREADS", "2")
    assert map_ordered(str, [3, 1, 2]) == ["3", "1", "2"]
