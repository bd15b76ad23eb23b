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


"""Warm-started parameter sweeps along the quasipattern branch."""

from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from qpf.data_types import DataCollectionType
from qpf.exceptions import ContinuationError, ParameterError, QpfError
from qpf.logger import Logger
from qpf.spectral_field import SpectralField, hs_norm

from .galerkin import GalerkinSystem
from .newton import NewtonConfig, SolveReport, newton_solve


class SolutionBranch(DataCollectionType[SpectralField, List[SpectralField]]):
    """Solutions along a λ path, with the λ value and report of each point."""

    def __init__(
        self, data: Optional[List[SpectralField]] = None, logger: Optional[Logger] = None
    ):
        super().__init__(data, logger)
        self.lambdas: List[float] = [float("nan")] * len(self._data)
        self.reports: List[Optional[SolveReport]] = [None] * len(self._data)

    @classmethod
    def _initialize_empty(cls) -> List[SpectralField]:
        return []

    def __iter__(self) -> Iterator[SpectralField]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def append(
        self,
        item: SpectralField,
        lam: float = float("nan"),
        report: Optional[SolveReport] = None,
    ) -> None:
        if not isinstance(item, SpectralField):
            raise TypeError(f"Expected SpectralField, got {type(item).__name__}.")
        self._data.append(item)
        self.lambdas.append(float(lam))
        self.reports.append(report)

    def rows(self) -> List[Dict[str, Any]]:
        """One row per point: λ, ``||u||_0``, unit-orbit coefficient, solver status."""
        rows = []
        for lam, field, report in zip(self.lambdas, self._data, self.reports):
            unit = field.coefficient(field.atlas.unit_index(1))
            rows.append(
                {
                    "lambda": lam,
                    "norm_h0": hs_norm(field),
                    "unit_coefficient": unit,
                    "converged": bool(report.converged) if report else None,
                    "iterations": report.iterations if report else None,
                    "final_residual": report.final_residual if report else None,
                }
            )
        return rows


def _check_path(path: Sequence[float]) -> np.ndarray:
    values = np.asarray(path, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ParameterError("The λ path must be a non-empty list.")
    if values.size > 1:
        steps = np.diff(values)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ParameterError("The λ path must be strictly monotone.")
    return values


def continuation(
    system: GalerkinSystem,
    lambda_path: Sequence[float],
    cfg: Optional[NewtonConfig] = None,
    init: Optional[np.ndarray] = None,
    logger: Optional[Logger] = None,
) -> SolutionBranch:
    """
    Solve at every λ of a monotone path, each solve warm-started.

    The first point starts from ``init`` (default: the asymptotic guess for
    positive λ, zero otherwise). Later points use the previous solution, or a
    secant predictor once two points exist.

    Raises:
        ContinuationError: a solve fails or does not converge; carries λ.
    """
    path = _check_path(lambda_path)
    cfg = NewtonConfig() if cfg is None else cfg
    log = logger if logger is not None else system.logger
    branch = SolutionBranch(logger=log)
    solutions: List[np.ndarray] = []
    for i, lam in enumerate(path):
        if i == 0:
            if init is not None:
                guess = np.asarray(init, dtype=float)
            elif lam > 0.0:
                try:
                    guess = system.asymptotic_guess(lam)
                except QpfError as exc:
                    raise ContinuationError(
                        f"No initial guess at λ = {lam}: {exc.message}", lam, exc
                    ) from exc
            else:
                guess = system.zeros()
        elif i == 1:
            guess = solutions[-1]
        else:
            slope = (lam - path[i - 1]) / (path[i - 1] - path[i - 2])
            guess = solutions[-1] + slope * (solutions[-1] - solutions[-2])
        try:
            u, report = newton_solve(system, lam, guess, cfg, log)
        except QpfError as exc:
            raise ContinuationError(
                f"Continuation failed at λ = {lam}: {exc.message}", lam, exc
            ) from exc
        if not report.converged:
            raise ContinuationError(
                f"Newton did not converge at λ = {lam} "
                f"(residual {report.final_residual:.3e}).",
                lam,
            )
        solutions.append(u)
        branch.append(system.to_field(u), lam=lam, report=report)
        log.info("Branch point λ = %.6g: |u|_0 = %.6e", lam, system.norm(u))
    return branch
