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


from .continuation import SolutionBranch, continuation
from .fixed_point import CorrectionProblem, correction_problem, first_iterate, fixed_point_solve
from .galerkin import QUASIPATTERN_PRESET, GalerkinState, GalerkinSystem
from .newton import JacobianSolver, NewtonConfig, SolveReport, newton_solve

__all__ = [
    "QUASIPATTERN_PRESET",
    "CorrectionProblem",
    "GalerkinState",
    "GalerkinSystem",
    "JacobianSolver",
    "NewtonConfig",
    "SolutionBranch",
    "SolveReport",
    "continuation",
    "correction_problem",
    "first_iterate",
    "fixed_point_solve",
    "newton_solve",
]
