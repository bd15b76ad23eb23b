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


from .blocks import (
    BlockMatrix,
    BlockSweep,
    SectorPoint,
    apply_P2a,
    assemble_block,
    beta_values,
    block_eigenvalues,
    block_sites,
    block_sweep,
    coupling_block,
    coupling_field,
    isolated_eigenvalues,
    jacobi_eigenvalues,
    lambda1_matrix,
    sector_points,
    sector_points_from_atlas,
)
from .inequalities import weight_ratio_bound
from .linear_operator import (
    assemble_L_eps,
    convolution_matrix,
    inverse_bound_sweep,
    negative_lambda_check,
    orbit_projector,
    smallest_abs_eigenvalue,
    symmetric_reduction,
)
from .reduction import (
    SchurReduction,
    projection_identities,
    schur_estimates,
    schur_reduce,
)
from .splitting import (
    DEFAULT_C,
    DisjointnessReport,
    SplitLabels,
    check_disjointness,
    classify_spectrum,
    generator_sums,
    shift_margin,
    unit_vectors,
)

__all__ = [
    "DEFAULT_C",
    "BlockMatrix",
    "BlockSweep",
    "DisjointnessReport",
    "SchurReduction",
    "SectorPoint",
    "SplitLabels",
    "apply_P2a",
    "assemble_L_eps",
    "assemble_block",
    "beta_values",
    "block_eigenvalues",
    "block_sites",
    "block_sweep",
    "check_disjointness",
    "classify_spectrum",
    "convolution_matrix",
    "coupling_block",
    "coupling_field",
    "generator_sums",
    "inverse_bound_sweep",
    "isolated_eigenvalues",
    "jacobi_eigenvalues",
    "lambda1_matrix",
    "negative_lambda_check",
    "orbit_projector",
    "projection_identities",
    "schur_estimates",
    "schur_reduce",
    "sector_points",
    "sector_points_from_atlas",
    "shift_margin",
    "smallest_abs_eigenvalue",
    "symmetric_reduction",
    "unit_vectors",
    "weight_ratio_bound",
]
