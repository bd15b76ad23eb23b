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


from .asymptotics import ExpansionBundle, expansion_bundle
from .configurations import RunConfig, load_run_config
from .core import get_component_registry
from .data_io import DataSink, DataSource
from .data_types import BaseDataType, DataCollectionType
from .exceptions import QpfError
from .fitting import FittingModel
from .logger import Logger
from .newton_solver import (
    GalerkinSystem,
    NewtonConfig,
    SolutionBranch,
    continuation,
    fixed_point_solve,
    newton_solve,
)
from .quasilattice import LatticeAtlas, build_atlas
from .spectral_field import SpectralField
from .studies import Study, study_for

__all__ = [
    "BaseDataType",
    "DataCollectionType",
    "DataSink",
    "DataSource",
    "ExpansionBundle",
    "FittingModel",
    "GalerkinSystem",
    "LatticeAtlas",
    "Logger",
    "NewtonConfig",
    "QpfError",
    "RunConfig",
    "SolutionBranch",
    "SpectralField",
    "Study",
    "build_atlas",
    "continuation",
    "expansion_bundle",
    "fixed_point_solve",
    "get_component_registry",
    "load_run_config",
    "newton_solve",
    "study_for",
]
