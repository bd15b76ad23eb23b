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


"""Studies: the unit of work behind each CLI command.

A :class:`Study` declares its command name and typed parameters, runs its
``_process_logic`` with a seeded generator and returns a :class:`StudyResult`
listing the files it wrote and any violated checks. Concrete studies register
themselves as components of type ``"Study"``.
"""

import math
import re
from abc import abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, ClassVar, Dict, List, Optional, Tuple, Type

import numpy as np
import sympy

from qpf.core.qpf_component import _QpfComponent, get_component_registry
from qpf.data_io import DataSink
from qpf.exceptions import ConfigurationError
from qpf.logger import Logger

Converter = Callable[[Any], Any]


def parse_real(value: Any) -> float:
    """Float from a number or an expression such as ``"sqrt(5)"`` or ``"√5"``."""
    if isinstance(value, bool):
        raise ConfigurationError(f"Expected a number, got {value!r}.")
    if isinstance(value, (int, float)):
        return float(value)
    text = re.sub(r"√\s*([0-9.]+)", r"sqrt(\1)", str(value).strip())
    try:
        number = float(sympy.sympify(text).evalf())
    except (sympy.SympifyError, SyntaxError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"Cannot read {value!r} as a real number.") from exc
    if not math.isfinite(number):
        raise ConfigurationError(f"{value!r} is not finite.")
    return number


def parse_optional_real(value: Any) -> Optional[float]:
    return None if value is None else parse_real(value)


def parse_real_list(value: Any) -> List[float]:
    if isinstance(value, str):
        value = [item for item in re.split(r"[,\s]+", value) if item]
    if not isinstance(value, (list, tuple)):
        value = [value]
    return [parse_real(item) for item in value]


def parse_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigurationError(f"Expected an integer, got {value!r}.")
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Expected an integer, got {value!r}.") from exc
    if not number.is_integer():
        raise ConfigurationError(f"Expected an integer, got {value!r}.")
    return int(number)


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"Expected a boolean, got {value!r}.")


def parse_optional_str(value: Any) -> Optional[str]:
    return None if value is None else str(value)


@dataclass
class StudyResult:
    """Files written by a study and the checks it found violated."""

    parameters: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Path] = field(default_factory=dict)
    violations: List[Any] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


class Study(_QpfComponent):
    """
    One CLI command.

    Subclasses set ``command``, declare ``parameters`` as
    ``name -> (converter, default)`` and implement :meth:`_process_logic`.
    """

    command: ClassVar[str] = ""
    parameters: ClassVar[Dict[str, Tuple[Converter, Any]]] = {}

    def __init__(self, output_dir: Path, logger: Optional[Logger] = None):
        super().__init__(logger)
        self.output_dir = Path(output_dir)
        self.result = StudyResult()

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        return {
            "component_type": "Study",
            "command": cls.command,
            "parameters": sorted(cls.parameters),
        }

    @classmethod
    def resolve_parameters(cls, given: Dict[str, Any]) -> Dict[str, Any]:
        """Defaults overlaid with ``given``, each value converted."""
        unknown = sorted(set(given) - set(cls.parameters))
        if unknown:
            raise ConfigurationError(
                f"Unknown parameters for '{cls.command}': {', '.join(unknown)}."
            )
        resolved = {}
        for name, (convert, default) in cls.parameters.items():
            value = given.get(name, default)
            try:
                resolved[name] = value if value is None else convert(value)
            except ConfigurationError as exc:
                raise ConfigurationError(f"Parameter '{name}': {exc.message}") from exc
        return resolved

    @abstractmethod
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        """Run the study, writing files through :meth:`write`."""

    def run(self, params: Dict[str, Any], seed: int = 0) -> StudyResult:
        resolved = self.resolve_parameters(params)
        self.result.parameters = resolved
        self.logger.debug("%s", self.semantic_id())
        self.logger.info("Running '%s' with %s", self.command, resolved)
        self._process_logic(resolved, np.random.default_rng(seed))
        if self.result.violations:
            self.logger.warning(
                "'%s' found %d violation(s)", self.command, len(self.result.violations)
            )
        return self.result

    def write(self, label: str, sink: DataSink, data: Any, name: str, **kwargs) -> Path:
        """Send ``data`` to ``output_dir/name`` and record it under ``label``."""
        path = sink.send_data(data, self.output_dir / name, **kwargs)
        self.result.outputs[label] = path
        return path

    def violate(self, check: str, **details: Any) -> None:
        self.result.violations.append(dict(details, check=check))


def study_for(command: str) -> Type[Study]:
    """Registered study class behind ``command``."""
    for cls in get_component_registry().get("Study", []):
        if cls.command == command:
            return cls
    raise ConfigurationError(f"No study is registered for command '{command}'.")
