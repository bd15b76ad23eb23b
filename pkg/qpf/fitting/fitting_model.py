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


"""Least-squares and envelope fits for the numerical diagnostics.

Diagnostics in qpf report fitted constants rather than hardcoded ones: decay
exponents of small divisors, census constants, perturbation defects and
Schur prefactors all go through a :class:`FittingModel`.
"""

from abc import ABC, abstractmethod
from typing import Dict, Generic, Sequence, TypeVar

import numpy as np

X = TypeVar("X")
Y = TypeVar("Y")


class FittingModel(ABC, Generic[X, Y]):
    """Abstract base class for function-fitting models."""

    def __str__(self) -> str:
        return self.__class__.__name__

    @abstractmethod
    def fit(self, x_values: Sequence[X], y_values: Sequence[Y]) -> Dict[str, float]:
        """Fit the model and return the estimated parameters by name."""


class PowerLawFittingModel(FittingModel[float, float]):
    """
    Fit ``y = prefactor * x**exponent`` by a straight line in log-log space.

    All values must be strictly positive.
    """

    def fit(
        self, x_values: Sequence[float], y_values: Sequence[float]
    ) -> Dict[str, float]:
        x = np.asarray(x_values, dtype=float)
        y = np.asarray(y_values, dtype=float)
        if x.size < 2 or x.size != y.size:
            raise ValueError("A power-law fit needs at least two paired points.")
        if np.any(x <= 0.0) or np.any(y <= 0.0):
            raise ValueError("A power-law fit needs strictly positive data.")
        slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
        return {"exponent": float(slope), "prefactor": float(np.exp(intercept))}


class BoundConstantModel(FittingModel[float, float]):
    """
    Tightest constant of a one-sided power bound for a fixed exponent.

    With ``side="lower"`` returns the largest ``c`` such that
    ``y >= c * x**exponent`` on every point; with ``side="upper"`` the
    smallest ``c`` such that ``y <= c * x**exponent``.
    """

    def __init__(self, exponent: float, side: str = "upper"):
        if side not in ("lower", "upper"):
            raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
        self.exponent = exponent
        self.side = side

    def fit(
        self, x_values: Sequence[float], y_values: Sequence[float]
    ) -> Dict[str, float]:
        x = np.asarray(x_values, dtype=float)
        y = np.asarray(y_values, dtype=float)
        if x.size == 0 or x.size != y.size:
            raise ValueError("A bound fit needs at least one paired point.")
        if np.any(x <= 0.0):
            raise ValueError("Bound abscissae must be strictly positive.")
        ratios = y / np.power(x, self.exponent)
        constant = ratios.min() if self.side == "lower" else ratios.max()
        return {"constant": float(constant), "exponent": float(self.exponent)}

    def __str__(self) -> str:
        return (
            f"{self.__class__.__name__}(exponent={self.exponent}, side={self.side})"
        )
