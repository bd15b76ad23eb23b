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


from .convolution import cube, multiply
from .field import (
    SobolevIndex,
    SpectralField,
    hs_norm,
    inner,
    project,
    rotate_field,
    sample,
    transfer,
)
from .monitors import MonitorResult, MoserNirenbergMonitor, ProductInequalityMonitor

__all__ = [
    "MonitorResult",
    "MoserNirenbergMonitor",
    "ProductInequalityMonitor",
    "SobolevIndex",
    "SpectralField",
    "cube",
    "hs_norm",
    "inner",
    "multiply",
    "project",
    "rotate_field",
    "sample",
    "transfer",
]
