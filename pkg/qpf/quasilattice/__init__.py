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


from .atlas import (
    DEFAULT_CAPACITY,
    AtlasTables,
    LatticeAtlas,
    LatticeSite,
    build_atlas,
    rotate_site,
)
from .divisors import (
    DivisorSpectrum,
    NormCertificate,
    conjugate_norm_certificate,
    divisor_coefficients,
    divisor_spectrum,
    linear_symbol,
    on_unit_circle,
    small_divisor,
)
from .properties import (
    CensusReport,
    LatticeReport,
    census,
    has_two_opposite_pairs,
    lattice_properties,
    resonant_count,
    resonant_quadruples,
)
from .ring import RingElement, cyclotomic_data, minimal_polynomial, norm2_coefficients

__all__ = [
    "DEFAULT_CAPACITY",
    "AtlasTables",
    "CensusReport",
    "DivisorSpectrum",
    "LatticeAtlas",
    "LatticeReport",
    "LatticeSite",
    "NormCertificate",
    "RingElement",
    "build_atlas",
    "census",
    "conjugate_norm_certificate",
    "cyclotomic_data",
    "divisor_coefficients",
    "divisor_spectrum",
    "has_two_opposite_pairs",
    "lattice_properties",
    "linear_symbol",
    "minimal_polynomial",
    "norm2_coefficients",
    "on_unit_circle",
    "resonant_count",
    "resonant_quadruples",
    "rotate_site",
    "small_divisor",
]
