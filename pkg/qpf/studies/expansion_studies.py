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


"""``expand`` command."""

from typing import Any, Dict

import numpy as np
from typing_extensions import override

from qpf.asymptotics import expansion_bundle, lambda_4_report, residual_order
from qpf.data_io import BundleJsonSink

from .study import Study, parse_int, parse_optional_real

U1_TRIPLE_COEFFICIENT = -1.0 / 64.0
U1_TOL = 1e-15


class ExpandStudy(Study):
    """Formal expansion ``U_ε``, ``λ_ε`` and the coefficient fields ``a``, ``b``."""

    command = "expand"
    parameters = {
        "q": (parse_int, 4),
        "residual_eps": (parse_optional_real, None),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        q = params["q"]
        bundle = expansion_bundle(q)
        extra: Dict[str, Any] = {"lambda4_report": lambda_4_report(q)}
        if params["residual_eps"] is not None:
            extra["residual_order"] = residual_order(q, params["residual_eps"])
        self.write("bundle", BundleJsonSink(self.logger), bundle, "bundle.json", extra=extra)
        self.result.summary = {"lambda2": bundle.lambda2, "lambda4": bundle.lambda4}

        u1 = bundle.u1
        triple = u1.atlas.index_of_word([3] + [0] * (q - 1))
        value = u1.coefficient(triple)
        if abs(value - U1_TRIPLE_COEFFICIENT) > U1_TOL:
            self.violate("u1_triple_coefficient", value=value)
