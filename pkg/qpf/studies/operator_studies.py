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


"""``split`` and ``blocks`` commands."""

from typing import Any, Dict

import numpy as np
from typing_extensions import override

from qpf.data_io import BlockCsvSink, JsonReportSink, LabelMapJsonSink
from qpf.operator_analysis import (
    DEFAULT_C,
    block_sweep,
    check_disjointness,
    classify_spectrum,
    inverse_bound_sweep,
    projection_identities,
    schur_estimates,
    weight_ratio_bound,
)
from qpf.operator_analysis.blocks import DEFAULT_GAP_FLOOR
from qpf.quasilattice import build_atlas

from .study import (
    Study,
    parse_bool,
    parse_int,
    parse_optional_real,
    parse_real,
    parse_real_list,
)

INVERSE_BAND = 4.0


class SplitStudy(Study):
    """Label the atlas with the σ₀/σ₁/σ₂ split and check the region-shift rules."""

    command = "split"
    parameters = {
        "q": (parse_int, 4),
        "eps": (parse_real, 0.01),
        "C": (parse_real, DEFAULT_C),
        "nmax": (parse_int, 10),
        "kcut": (parse_optional_real, None),
        "strict": (parse_bool, True),
        "trials": (parse_int, 0),
        "schur_trials": (parse_int, 0),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        atlas = build_atlas(params["q"], params["nmax"], params["kcut"], logger=self.logger)
        labels = classify_spectrum(
            atlas, params["eps"], params["C"], strict=params["strict"], logger=self.logger
        )
        self.write("labels", LabelMapJsonSink(self.logger), labels, "labels.json")
        report = check_disjointness(labels, logger=self.logger)
        self.write("violations", JsonReportSink(self.logger), report.violations, "violations.json")
        self.result.violations.extend(report.violations)
        self.result.summary = {
            "counts": labels.counts(),
            "checks": report.checks,
            "shift_margin": report.margin,
        }
        if params["trials"] > 0:
            identities = projection_identities(labels, params["trials"], rng)
            self.write("identities", JsonReportSink(self.logger), identities, "identities.json")
            for name, value in identities.items():
                if value != 0.0:
                    self.violate("projection_identity", identity=name, value=value)
        if params["schur_trials"] > 0:
            estimates = schur_estimates(labels, params["eps"], params["schur_trials"], rng=rng)
            self.write("schur", JsonReportSink(self.logger), estimates, "schur.json")
            self.result.summary["schur"] = estimates


class BlocksStudy(Study):
    """Block eigenvalues over sector points, optionally with the inverse-bound sweep."""

    command = "blocks"
    parameters = {
        "q": (parse_int, 4),
        "eps": (parse_real_list, [0.1, 0.05, 0.025]),
        "points": (parse_int, 64),
        "C": (parse_real, DEFAULT_C),
        "gap_floor": (parse_real, DEFAULT_GAP_FLOOR),
        "inverse_nmax": (parse_int, None),
        "inverse_kcut": (parse_optional_real, None),
        "weight_p": (parse_optional_real, None),
        "weight_K": (parse_real, 1.0),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        sweep = block_sweep(
            params["q"],
            params["eps"],
            params["points"],
            params["C"],
            params["gap_floor"],
            logger=self.logger,
        )
        self.write("blocks", BlockCsvSink(self.logger), sweep.rows, "blocks.csv")
        self.write("summary", JsonReportSink(self.logger), sweep.summary, "blocks_summary.json")
        self.result.summary = {
            "K_fitted": sweep.summary["K_fitted"],
            "K_spread": sweep.summary["K_spread"],
        }
        if not sweep.lower_bound_holds:
            self.violate("block_lower_bound", per_epsilon=sweep.summary["per_epsilon"])
        if not sweep.single_constant:
            self.violate(
                "block_defect_constant",
                K={eps: data["K"] for eps, data in sweep.summary["per_epsilon"].items()},
                spread=sweep.summary["K_spread"],
            )
        if params["inverse_nmax"] is not None:
            atlas = build_atlas(
                params["q"], params["inverse_nmax"], params["inverse_kcut"], logger=self.logger
            )
            inverse = inverse_bound_sweep(atlas, params["eps"], logger=self.logger)
            self.write("inverse", JsonReportSink(self.logger), inverse, "inverse_bound.json")
            if not inverse["band"] < INVERSE_BAND:
                self.violate("inverse_bound_band", band=inverse["band"])
        if params["weight_p"] is not None:
            weight = weight_ratio_bound(params["weight_p"], params["weight_K"])
            self.write("weight_ratio", JsonReportSink(self.logger), weight, "weight_ratio.json")
            self.result.summary["weight_ratio"] = weight
            if weight["stated_ratio"] is not None and weight["stated_ratio"] > 1.0 + 1e-12:
                self.violate(
                    "weight_ratio_constant",
                    p=weight["p"],
                    K=weight["K"],
                    worst=weight["worst"],
                    stated_constant=weight["stated_constant"],
                )
