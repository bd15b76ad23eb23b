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


from typing import Any, Dict

import numpy as np

from qpf import Logger, SolutionBranch, Study, get_component_registry, study_for
from qpf.data_io import FieldJsonSink
from qpf.quasilattice import LatticeAtlas
from qpf.studies import LatticeStudy


def test_studies_are_registered():
    studies = get_component_registry()["Study"]
    assert LatticeStudy in studies
    assert Study not in studies


def test_new_study_is_found_by_command(tmp_path):
    class EchoStudy(Study):
        """Writes nothing and reports its parameter."""

        command = "echo-study"
        parameters = {"value": (int, 1)}

        def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
            self.result.summary = {"value": params["value"]}

    assert study_for("echo-study") is EchoStudy
    result = EchoStudy(tmp_path).run({"value": "4"})
    assert result.summary == {"value": 4}


def test_metadata():
    metadata = LatticeStudy.get_metadata()
    assert metadata["class_name"] == "LatticeStudy"
    assert metadata["command"] == "lattice"
    assert "nmax" in metadata["parameters"]
    assert metadata["docstring"].startswith("Generate an atlas")
    assert LatticeAtlas.get_metadata()["component_type"] == "DataType"
    branch = SolutionBranch.get_metadata()
    assert branch["collection_element_type"] == "SpectralField"


def test_semantic_id():
    text = LatticeStudy.semantic_id()
    assert text.startswith("[LatticeStudy]")
    assert "  command: lattice" in text
    assert "    - nmax" in text


def test_logger_injection(tmp_path):
    default = FieldJsonSink()
    assert isinstance(default.logger, Logger)
    custom = Logger()
    assert FieldJsonSink(custom).logger is custom
    assert LatticeStudy(tmp_path, logger=custom).logger is custom
