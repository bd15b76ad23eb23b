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

"""Generic payload wrappers for qpf value objects.

:class:`BaseDataType` holds a validated payload behind ``data``;
:class:`DataCollectionType` is an ordered collection of such values. Atlases
and spectral fields are ``BaseDataType`` subclasses, continuation branches are
collections of fields.
"""

from abc import abstractmethod
from typing import Any, Dict, Generic, Iterator, Optional, Type, TypeVar, get_args

from qpf.core.qpf_component import _QpfComponent
from qpf.logger import Logger

T = TypeVar("T")


class BaseDataType(_QpfComponent, Generic[T]):
    """
    Validated, immutable-by-convention payload holder.

    Subclasses override :meth:`validate` and raise a qpf error on invalid
    payloads; the constructor runs it before the payload is stored.
    """

    _data: T

    def __init__(self, data: T, logger: Optional[Logger] = None):
        super().__init__(logger)
        self.validate(data)
        self._data = data

    @property
    def data(self) -> T:
        """The wrapped payload."""
        return self._data

    def validate(self, data: T) -> bool:
        """Check ``data``; the base accepts everything."""
        return True

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        return {"component_type": "BaseDataType"}

    def __repr__(self):
        return f"{self.__class__.__name__}({self._data!r})"


E = TypeVar("E", bound=BaseDataType)
S = TypeVar("S")


class DataCollectionType(BaseDataType[S], Generic[E, S]):
    """Ordered collection of ``BaseDataType`` elements of one kind."""

    def __init__(self, data: Optional[S] = None, logger: Optional[Logger] = None):
        if data is None:
            data = self._initialize_empty()
        super().__init__(data, logger)

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        metadata: Dict[str, Any] = {"component_type": "DataCollectionType"}
        try:
            metadata["collection_element_type"] = cls.collection_base_type().__name__
        except TypeError:
            pass
        return metadata

    @classmethod
    @abstractmethod
    def _initialize_empty(cls) -> S:
        """Return the empty storage object."""

    @classmethod
    def collection_base_type(cls) -> Type[E]:
        """Element class bound by the generic parameters."""
        for base in (cls, *getattr(cls, "__orig_bases__", ())):
            args = get_args(base)
            if args and isinstance(args[0], type):
                return args[0]
        raise TypeError(f"{cls.__name__} does not bind an element type.")

    @abstractmethod
    def __iter__(self) -> Iterator[E]:
        """Iterate over the elements in insertion order."""

    @abstractmethod
    def append(self, item: E) -> None:
        """Append one element; wrong element types raise TypeError."""

    @abstractmethod
    def __len__(self) -> int:
        """Number of stored elements."""

    @classmethod
    def from_list(cls, items: list) -> "DataCollectionType[E, S]":
        """Build a collection from a list of elements."""
        instance = cls()
        for item in items:
            instance.append(item)
        return instance
