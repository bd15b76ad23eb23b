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


"""Seeded monitors for the algebra inequalities of the ``H_s`` scale.

The constants in ``||UV||_0 <= c_s ||U||_s ||V||_0`` (``s > q/2``) and in the
Moser–Nirenberg bound exist but are never given. The monitors estimate them
from random field pairs: ``calibrate`` records the largest ratio seen, and
``check`` draws fresh pairs and compares against the calibrated value.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from qpf.exceptions import ParameterError
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas

from .convolution import multiply
from .field import SpectralField, hs_norm

MONITOR_BAND = 1.05


@dataclass
class MonitorResult:
    """Largest observed ratio against the calibrated constant."""

    name: str
    samples: int
    max_ratio: float
    calibrated: Optional[float]

    @property
    def within_band(self) -> bool:
        if self.calibrated is None:
            return True
        return self.max_ratio <= MONITOR_BAND * self.calibrated


class _PairMonitor(ABC):
    """Draws random real field pairs whose products fit the atlas exactly."""

    name = "pair"

    def __init__(
        self,
        atlas: LatticeAtlas,
        s: float = 3.0,
        n_pairs: int = 200,
        n_modes: int = 20,
        logger: Optional[Logger] = None,
    ):
        if atlas.k_cut is not None or atlas.n_max < 2:
            raise ParameterError("Monitors need an uncut atlas with n_max >= 2.")
        self.atlas = atlas
        self.s = float(s)
        self.n_pairs = int(n_pairs)
        self.n_modes = int(n_modes)
        self.logger = logger if logger is not None else atlas.logger
        self.calibrated: Optional[float] = None

    def _pair(self, rng: np.random.Generator) -> Tuple[SpectralField, SpectralField]:
        half = self.atlas.n_max // 2
        u = SpectralField.random(self.atlas, self.n_modes, rng, n_word_max=half)
        v = SpectralField.random(self.atlas, self.n_modes, rng, n_word_max=half)
        return u, v

    @abstractmethod
    def _ratio(self, u: SpectralField, v: SpectralField) -> float:
        """Ratio monitored for one pair."""

    def _run(self, rng: np.random.Generator) -> float:
        ratios = [self._ratio(*self._pair(rng)) for _ in range(self.n_pairs)]
        return float(max(ratios))

    def calibrate(self, seed: int = 0) -> float:
        """Record the largest ratio over ``n_pairs`` pairs drawn from ``seed``."""
        self.calibrated = self._run(np.random.default_rng(seed))
        self.logger.info(
            "%s monitor calibrated at s=%.2f: %.6g", self.name, self.s, self.calibrated
        )
        return self.calibrated

    def check(self, rng: np.random.Generator) -> MonitorResult:
        result = MonitorResult(self.name, self.n_pairs, self._run(rng), self.calibrated)
        if not result.within_band:
            self.logger.warning(
                "%s monitor ratio %.6g exceeds calibration %.6g",
                self.name,
                result.max_ratio,
                self.calibrated,
            )
        return result


class ProductInequalityMonitor(_PairMonitor):
    """Ratio ``||UV||_0 / (||U||_s ||V||_0)``."""

    name = "product"

    def _ratio(self, u: SpectralField, v: SpectralField) -> float:
        uv = multiply(u, v, strict=True)
        return hs_norm(uv, 0.0) / (hs_norm(u, self.s) * hs_norm(v, 0.0))


class MoserNirenbergMonitor(_PairMonitor):
    """Ratio ``||UV||_s / (||U||_s ||V||_s' + ||U||_s' ||V||_s)``."""

    name = "moser-nirenberg"

    def __init__(self, atlas: LatticeAtlas, s: float = 3.0, s_prime: float = 3.0, **kw):
        super().__init__(atlas, s=s, **kw)
        self.s_prime = float(s_prime)

    def _ratio(self, u: SpectralField, v: SpectralField) -> float:
        uv = multiply(u, v, strict=True)
        bound = hs_norm(u, self.s) * hs_norm(v, self.s_prime) + hs_norm(
            u, self.s_prime
        ) * hs_norm(v, self.s)
        return hs_norm(uv, self.s) / bound
