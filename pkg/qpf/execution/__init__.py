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

from .executor import (
    QpfExecutor,
    SequentialExecutor,
    ThreadedExecutor,
    executor_from_env,
    map_ordered,
    thread_count,
)

__all__ = [
    "QpfExecutor",
    "SequentialExecutor",
    "ThreadedExecutor",
    "executor_from_env",
    "map_ordered",
    "thread_count",
]
