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


from .expansion import (
    ExpansionBundle,
    PreparedState,
    amplitude_law,
    base_pattern,
    coefficient_fields,
    epsilon_from_lambda,
    expansion_atlas,
    expansion_bundle,
    first_correction,
    lambda_2,
    lambda_4,
    lambda_4_report,
    potential,
    prepare,
    prepare_atlas,
    residual_order,
    second_correction,
    square_atlas,
    steady_residual,
)

__all__ = [
    "ExpansionBundle",
    "PreparedState",
    "amplitude_law",
    "base_pattern",
    "coefficient_fields",
    "epsilon_from_lambda",
    "expansion_atlas",
    "expansion_bundle",
    "first_correction",
    "lambda_2",
    "lambda_4",
    "lambda_4_report",
    "potential",
    "prepare",
    "prepare_atlas",
    "residual_order",
    "second_correction",
    "square_atlas",
    "steady_residual",
]
