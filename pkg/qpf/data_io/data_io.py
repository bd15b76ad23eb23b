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


"""Source and sink abstractions for qpf files.

A :class:`DataSource` turns a file into a qpf value; a :class:`DataSink`
writes one. Both are components, so their metadata names the data type they
produce or consume.
"""

from abc import abstractmethod
from pathlib import Path
from typing import Any, Dict, Generic, Optional, TypeVar, Union

from qpf.core.qpf_component import _QpfComponent
from qpf.logger import Logger

T = TypeVar("T")
PathLike = Union[str, Path]


class DataSource(_QpfComponent):
    """Reads a qpf value from a file."""

    def __init__(self, logger: Optional[Logger] = None):
        super().__init__(logger=logger)

    @abstractmethod
    def _get_data(self, path: PathLike, **kwargs) -> Any:
        """Read and return the value stored at ``path``."""

    def get_data(self, path: PathLike, **kwargs) -> Any:
        self.logger.debug("%s reading %s", type(self).__name__, path)
        return self._get_data(path, **kwargs)

    @classmethod
    @abstractmethod
    def output_data_type(cls) -> type:
        """Type of the values produced."""

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        metadata: Dict[str, Any] = {"component_type": "DataSource"}
        try:
            metadata["output_data_type"] = cls.output_data_type().__name__
        except TypeError:
            pass
        return metadata


class DataSink(_QpfComponent, Generic[T]):
    """Writes a qpf value to a file."""

    def __init__(self, logger: Optional[Logger] = None):
        super().__init__(logger=logger)

    @abstractmethod
    def _send_data(self, data: T, path: Path, **kwargs) -> None:
        """Write ``data`` to ``path``."""

    def send_data(self, data: T, path: PathLike, **kwargs) -> Path:
        """Write ``data`` (parent directories are created) and return the path."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        self._send_data(data, target, **kwargs)
        self.logger.debug("%s wrote %s", type(self).__name__, target)
        return target

    @classmethod
    @abstractmethod
    def input_data_type(cls) -> type:
        """Type of the values consumed."""

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        metadata: Dict[str, Any] = {"component_type": "DataSink"}
        try:
            metadata["input_data_type"] = cls.input_data_type().__name__
        except TypeError:
            pass
        return metadata
