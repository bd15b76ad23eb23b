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
Run configuration files
=======================

A run is one CLI command with its parameters. It can be given entirely on the
command line or loaded from YAML:

```yaml
command: solve
seed: 0
output_dir: runs/fig
parameters:
  q: 4
  lambda: 0.1
  nmax: 27
  kcut: sqrt(5)
```

Command-line flags override file values; ``--set key=value`` overrides are
parsed as YAML scalars, so ``--set tol=1e-12`` yields a float.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import yaml

from qpf.exceptions import ConfigurationError

COMMANDS = ("lattice", "divisors", "expand", "split", "blocks", "solve", "continue", "render")
TOP_LEVEL_KEYS = {"command", "seed", "output_dir", "parameters"}


@dataclass
class RunConfig:
    """One command, its parameters, the seed of randomized checks and the output directory."""

    command: Optional[str] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "."

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigurationError(
                f"Unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}."
            )
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigurationError(f"seed must be an integer, got {self.seed!r}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must fit in 64 unsigned bits.")
        if not isinstance(self.parameters, dict):
            raise ConfigurationError("parameters must be a mapping.")
        return self


def load_run_config(yaml_file: Union[str, Path]) -> RunConfig:
    """
    Load a :class:`RunConfig` from a YAML file.

    Raises:
        ConfigurationError: unreadable file, invalid YAML or unknown keys.
    """
    try:
        with open(yaml_file, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigurationError(f"Cannot read run configuration {yaml_file}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Invalid YAML in {yaml_file}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError("A run configuration must be a YAML mapping.")
    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigurationError(f"Unknown run configuration keys: {sorted(unknown)}.")
    parameters = raw.get("parameters") or {}
    if not isinstance(parameters, dict):
        raise ConfigurationError("'parameters' must be a mapping.")
    return RunConfig(
        command=raw.get("command"),
        parameters={str(k): v for k, v in parameters.items()},
        seed=raw.get("seed", 0),
        output_dir=str(raw.get("output_dir", ".")),
    )


def parse_override(text: str) -> Dict[str, Any]:
    """``key=value`` with the value read as a YAML scalar."""
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigurationError(f"Override {text!r} is not of the form key=value.")
    try:
        parsed = yaml.safe_load(value) if value.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Cannot parse override {text!r}: {exc}") from exc
    return {key.strip(): parsed}


def apply_overrides(config: RunConfig, overrides: Iterable[str]) -> RunConfig:
    """Apply ``--set`` overrides; ``seed``, ``output_dir`` and ``command`` are top level."""
    for text in overrides:
        for key, value in parse_override(text).items():
            if key in ("seed", "output_dir", "command"):
                setattr(config, key, value if key == "seed" else str(value))
            else:
                config.parameters[key.removeprefix("parameters.")] = value
    return config
