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


import pytest

from qpf.configurations import RunConfig, apply_overrides, load_run_config, parse_override
from qpf.exceptions import ConfigurationError


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_run_config(tmp_path):
    path = write(
        tmp_path,
        """
command: solve
seed: 7
output_dir: runs/one
parameters:
  q: 4
  lambda: 0.1
  kcut: sqrt(5)
""",
    )
    config = load_run_config(path).validate()
    assert config.command == "solve"
    assert config.seed == 7
    assert config.output_dir == "runs/one"
    assert config.parameters == {"q": 4, "lambda": 0.1, "kcut": "sqrt(5)"}


def test_empty_file_gives_defaults(tmp_path):
    config = load_run_config(write(tmp_path, ""))
    assert config.command is None
    assert config.parameters == {}
    assert config.seed == 0


@pytest.mark.parametrize(
    "text",
    [
        "command: lattice\nunknown: 1\n",
        "- just\n- a list\n",
        "command: lattice\nparameters: [1, 2]\n",
        "command: [unclosed\n",
    ],
)
def test_invalid_files(tmp_path, text):
    with pytest.raises(ConfigurationError):
        load_run_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_config(tmp_path / "absent.yaml")


def test_validate():
    with pytest.raises(ConfigurationError):
        RunConfig(command="plot").validate()
    with pytest.raises(ConfigurationError):
        RunConfig(command="lattice", seed=-1).validate()
    with pytest.raises(ConfigurationError):
        RunConfig(command="lattice", seed=True).validate()
    with pytest.raises(ConfigurationError):
        RunConfig(command="lattice", seed=2**64).validate()
    assert RunConfig(command="lattice", seed=2**64 - 1).validate().seed == 2**64 - 1


def test_overrides_are_yaml_scalars():
    assert parse_override("tol=1e-12") == {"tol": 1e-12}
    assert parse_override("kcut=null") == {"kcut": None}
    assert parse_override("strict=false") == {"strict": False}
    assert parse_override("eps=[0.1, 0.05]") == {"eps": [0.1, 0.05]}
    assert parse_override("kcut=") == {"kcut": None}
    with pytest.raises(ConfigurationError):
        parse_override("no-equals-sign")
    with pytest.raises(ConfigurationError):
        parse_override("=3")


def test_apply_overrides():
    config = RunConfig(command="lattice", parameters={"nmax": 5})
    apply_overrides(config, ["nmax=3", "seed=11", "parameters.q=6", "output_dir=out"])
    assert config.parameters == {"nmax": 3, "q": 6}
    assert config.seed == 11
    assert config.output_dir == "out"
