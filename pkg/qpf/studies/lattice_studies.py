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


"""``lattice`` and ``divisors`` commands."""

from typing import Any, Dict

import numpy as np
from typing_extensions import override

from qpf.data_io import (
    AtlasJsonSink,
    CensusCsvSink,
    DivisorCsvSink,
    JsonReportSink,
    census_rows,
    divisor_rows,
)
from qpf.quasilattice import (
    build_atlas,
    census,
    conjugate_norm_certificate,
    divisor_spectrum,
    lattice_properties,
)

from .study import Study, parse_bool, parse_int, parse_optional_real


class LatticeStudy(Study):
    """Generate an atlas, export it with its shell census and check the word-length laws."""

    command = "lattice"
    parameters = {
        "q": (parse_int, 4),
        "nmax": (parse_int, 5),
        "kcut": (parse_optional_real, None),
        "pairs": (parse_int, 100_000),
        "check": (parse_bool, True),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        atlas = build_atlas(params["q"], params["nmax"], params["kcut"], logger=self.logger)
        self.write("atlas", AtlasJsonSink(self.logger), atlas, "atlas.json")
        report = census(atlas)
        self.write("census", CensusCsvSink(self.logger), census_rows(report.rows), "census.csv")
        self.result.summary = {"sites": len(atlas), "c1": report.c1}
        if params["check"]:
            properties = lattice_properties(atlas, params["pairs"], rng, self.logger)
            self.write("properties", JsonReportSink(self.logger), properties, "lattice_report.json")
            for message in properties.violations:
                self.violate("lattice_properties", message=message)


class DivisorStudy(Study):
    """Per-shell minima of ``||k|^2 - 1|``, their decay fit and the conjugate-norm certificate."""

    command = "divisors"
    parameters = {
        "q": (parse_int, 4),
        "nmax": (parse_int, 20),
        "kcut": (parse_optional_real, None),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        atlas = build_atlas(params["q"], params["nmax"], params["kcut"], logger=self.logger)
        spectrum = divisor_spectrum(atlas, logger=self.logger)
        certificate = conjugate_norm_certificate(atlas)
        self.write(
            "divisors", DivisorCsvSink(self.logger), divisor_rows(spectrum.rows()), "divisors.csv"
        )
        fit = {
            "q": spectrum.q,
            "l0": spectrum.l0,
            "exponent": spectrum.exponent,
            "prefactor": spectrum.prefactor,
            "constant": spectrum.constant,
            "extra_circle_sites": [atlas.canon[i] for i in spectrum.extra_circle_sites],
            "certificate": certificate,
        }
        self.write("fit", JsonReportSink(self.logger), fit, "divisors_fit.json")
        self.result.summary = {"exponent": spectrum.exponent, "constant": spectrum.constant}
        zero_shells = [n for n, m in zip(spectrum.shells, spectrum.minima) if m <= 0.0]
        if zero_shells:
            self.violate("nonzero_minima", shells=zero_shells)
        if spectrum.exponent < -2 * spectrum.l0 - 0.5:
            self.violate("decay_exponent", exponent=spectrum.exponent, l0=spectrum.l0)
        if spectrum.extra_circle_sites:
            self.violate("extra_circle_sites", count=len(spectrum.extra_circle_sites))
        if certificate.min_abs_norm < 1:
            self.violate("conjugate_norm", min_abs_norm=certificate.min_abs_norm)
