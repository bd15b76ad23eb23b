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


"""Elementary weight-ratio inequality used to move ``H_s`` weights across shifts.

For ``x, y > 0`` with ``|x - y| <= K`` and ``p >= 0``,
``|(1+x)^p - (1+y)^p| <= d(p, K) (1+x)^{p-1}``. The mean value theorem gives
``d = pK(1+K)^{p-1}`` for ``p >= 1`` and ``d = pK(1+K)^{1-p}`` for ``p < 1``.
The commonly quoted ``d = pK(1+K)`` for ``p > 1`` agrees with it up to
``p = 2`` only; both are reported.
"""

from typing import Dict, Optional

import numpy as np

from qpf.exceptions import ParameterError


def stated_constant(p: float, K: float) -> float:
    """``pK(1+K)`` for ``p > 1`` and ``pK(1+K)^{1-p}`` otherwise."""
    return p * K * (1.0 + K) if p > 1.0 else p * K * (1.0 + K) ** (1.0 - p)


def mean_value_constant(p: float, K: float) -> float:
    """Constant produced by the mean value theorem."""
    return p * K * (1.0 + K) ** abs(p - 1.0)


def weight_ratio_bound(
    p: float, K: float, grid_max: float = 200.0, grid_size: int = 400
) -> Dict[str, Optional[float]]:
    """
    Largest ``|(1+x)^p - (1+y)^p| / (1+x)^{p-1}`` over a grid of admissible
    pairs, relative to both constants.
    """
    if p < 0.0 or K <= 0.0:
        raise ParameterError(f"Need p >= 0 and K > 0, got p={p}, K={K}.")
    x = np.concatenate([np.geomspace(1e-6, grid_max, grid_size), [0.0]])[:, None]
    offsets = np.linspace(-K, K, 2 * grid_size + 1)[None, :]
    y = x + offsets
    admissible = y >= 0.0
    ratio = np.abs((1.0 + x) ** p - (1.0 + y) ** p) / (1.0 + x) ** (p - 1.0)
    worst = float(ratio[admissible].max())
    stated = stated_constant(p, K)
    mean_value = mean_value_constant(p, K)
    return {
        "p": float(p),
        "K": float(K),
        "worst": worst,
        "stated_constant": stated,
        "mean_value_constant": mean_value,
        "stated_ratio": worst / stated if stated > 0 else None,
        "mean_value_ratio": worst / mean_value if mean_value > 0 else None,
    }
