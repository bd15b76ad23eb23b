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

"""Component base class with metadata and a category registry.

Every data type and every CLI study derives from :class:`_QpfComponent`.
Concrete classes declare a ``component_type`` in ``_define_metadata`` and are
registered under it when the class body is executed, which is how the CLI
finds the study behind a command name.
"""

from __future__ import annotations

import inspect
import textwrap
import threading
from abc import abstractmethod
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Type

if TYPE_CHECKING:
    from qpf.logger import Logger


_COMPONENT_REGISTRY: Dict[str, List[Type["_QpfComponent"]]] = {}
_REGISTRY_LOCK = threading.Lock()


def get_component_registry() -> Dict[str, List[Type["_QpfComponent"]]]:
    """Return the mapping ``component_type -> registered classes``."""
    return _COMPONENT_REGISTRY


class _QpfComponentMeta(type):
    """Registers concrete subclasses under their declared component type."""

    def __init__(
        cls: type, name: str, bases: Tuple[type, ...], attrs: Dict[str, Any]
    ) -> None:
        super().__init__(name, bases, attrs)  # type: ignore
        if any(b is _QpfComponent for b in bases) or inspect.isabstract(cls):
            return
        try:
            category = cls.get_metadata().get("component_type")  # type: ignore[attr-defined]
        except Exception:  # pylint: disable=broad-except
            return
        if category:
            with _REGISTRY_LOCK:
                _COMPONENT_REGISTRY.setdefault(category, []).append(cls)


class _QpfComponent(metaclass=_QpfComponentMeta):
    """
    Foundation of qpf components.

    Provides logger injection, ``get_metadata()`` (class name, docstring and
    the subclass fields from ``_define_metadata()``) and ``semantic_id()``,
    a readable rendering of the same metadata used in debug logs.
    """

    def __init__(self, logger: Optional["Logger"] = None) -> None:
        from qpf.logger import Logger  # pylint: disable=import-outside-toplevel

        self.logger: "Logger" = logger if logger is not None else Logger()

    @classmethod
    def get_metadata(cls) -> Dict[str, Any]:
        """Merge framework metadata with ``_define_metadata()``."""
        docstring = inspect.getdoc(cls) or "No documentation available."
        metadata: Dict[str, Any] = {
            "class_name": cls.__name__,
            "docstring": docstring.strip(),
        }
        extra = cls._define_metadata()
        if not isinstance(extra, dict):
            raise TypeError("_define_metadata() must return a dictionary.")
        metadata.update(extra)
        return metadata

    @classmethod
    def semantic_id(cls) -> str:
        """Render the metadata as an indented, wrapped text block."""
        metadata = cls.get_metadata()
        docstring = metadata.pop("docstring", "")
        lines = [f"[{metadata.pop('class_name')}]"]
        for doc_line in docstring.splitlines()[:1]:
            lines.extend("  " + w for w in textwrap.wrap(doc_line, width=96))
        for key, value in sorted(metadata.items()):
            if isinstance(value, (list, tuple)):
                lines.append(f"  {key}:")
                lines.extend(f"    - {item}" for item in value)
            else:
                lines.append(f"  {key}: {value}")
        return "\n".join(lines)

    @classmethod
    @abstractmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        """Return component-specific metadata (at least ``component_type``)."""
