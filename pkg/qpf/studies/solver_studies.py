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


"""``solve``, ``continue`` and ``render`` commands."""

from typing import Any, Dict, Tuple

import numpy as np
from typing_extensions import override

from qpf.asymptotics import epsilon_from_lambda
from qpf.data_io import BranchCsvSink, FieldJsonSource, PgmSink, SolutionJsonSink
from qpf.exceptions import ConfigurationError, OutOfRangeError
from qpf.newton_solver import (
    QUASIPATTERN_PRESET,
    GalerkinSystem,
    NewtonConfig,
    SolveReport,
    continuation,
    first_iterate,
    fixed_point_solve,
    newton_solve,
)
from qpf.operator_analysis import negative_lambda_check
from qpf.spectral_field import SpectralField, sample

from .study import (
    Study,
    parse_int,
    parse_optional_real,
    parse_optional_str,
    parse_real,
)

INIT_KINDS = ("asymptotic", "zero", "file")
METHODS = ("newton", "fixed_point")
UNIT_COEFFICIENT_SLACK = 10.0


def _choice(options: Tuple[str, ...]):
    def convert(value: Any) -> str:
        if str(value) not in options:
            raise ConfigurationError(f"Expected one of {', '.join(options)}, got {value!r}.")
        return str(value)

    return convert


def _write_image(study: Study, field: SpectralField, params: Dict[str, Any], name: str) -> None:
    image = sample(field, params["window"], params["resolution"])
    study.write("image", PgmSink(study.logger), image, name, window=params["window"])


class SolveStudy(Study):
    """Solve the truncated steady equation at one λ."""

    command = "solve"
    parameters = {
        "q": (parse_int, QUASIPATTERN_PRESET["q"]),
        "lambda": (parse_real, QUASIPATTERN_PRESET["lambda"]),
        "nmax": (parse_int, QUASIPATTERN_PRESET["n_max"]),
        "kcut": (parse_optional_real, QUASIPATTERN_PRESET["k_cut"]),
        "tol": (parse_real, 1e-10),
        "max_iter": (parse_int, 50),
        "init": (_choice(INIT_KINDS), "asymptotic"),
        "init_file": (parse_optional_str, None),
        "method": (_choice(METHODS), "newton"),
        "linear_solver": (str, "auto"),
        "out": (str, "solution.json"),
        "render": (parse_optional_str, None),
        "window": (parse_real, 30.0),
        "resolution": (parse_int, 512),
    }

    def _initial_guess(self, system: GalerkinSystem, params: Dict[str, Any]) -> np.ndarray:
        if params["init"] == "zero":
            return system.zeros()
        if params["init"] == "file":
            if not params["init_file"]:
                raise ConfigurationError("--init file needs --init-file.")
            field = FieldJsonSource(self.logger).get_data(params["init_file"])
            return system.from_field(field)
        return system.asymptotic_guess(params["lambda"])

    def _check_amplitude(self, system: GalerkinSystem, lam: float, unit: float) -> None:
        """Compare with ``u^{(k_1)} = ε + O(ε^3)`` above onset, isolation below it."""
        if lam < 0.0:
            isolation = negative_lambda_check(system.atlas, lam)
            self.result.summary["isolation"] = isolation
            if not isolation["ok"]:
                self.violate("isolation_bound", **isolation)
            return
        try:
            epsilon = epsilon_from_lambda(system.q, lam)
        except OutOfRangeError:
            return
        if abs(unit - epsilon) > UNIT_COEFFICIENT_SLACK * epsilon**3:
            self.violate("unit_coefficient", unit_coefficient=unit, epsilon=epsilon)

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        system = GalerkinSystem.from_truncation(
            params["q"], params["nmax"], params["kcut"], logger=self.logger
        )
        cfg = NewtonConfig(
            tol=params["tol"],
            max_iter=params["max_iter"],
            linear_solver=params["linear_solver"],
        )
        lam = params["lambda"]
        report: SolveReport
        extra: Dict[str, Any] = {}
        if params["method"] == "fixed_point":
            epsilon = epsilon_from_lambda(params["q"], lam)
            extra["first_iterate"] = first_iterate(system, epsilon)
            W, report = fixed_point_solve(system, epsilon, cfg, self.logger)
            u = system.asymptotic_field(epsilon) + epsilon**4 * W
        else:
            u, report = newton_solve(
                system, lam, self._initial_guess(system, params), cfg, self.logger
            )
        field = system.to_field(u)
        self.write("solution", SolutionJsonSink(self.logger), field, params["out"], report=report)
        self.result.summary = {
            "converged": report.converged,
            "final_residual": report.final_residual,
            "unit_coefficient": system.unit_coefficient(u),
            **extra,
        }
        if not report.converged:
            self.violate("not_converged", final_residual=report.final_residual)
        self._check_amplitude(system, lam, self.result.summary["unit_coefficient"])
        if params["render"]:
            _write_image(self, field, params, params["render"])


class ContinueStudy(Study):
    """Warm-started sweep of λ over an evenly spaced path."""

    command = "continue"
    parameters = {
        "q": (parse_int, 4),
        "lambda_start": (parse_real, 0.01),
        "lambda_end": (parse_real, 0.1),
        "steps": (parse_int, 10),
        "nmax": (parse_int, 9),
        "kcut": (parse_optional_real, None),
        "tol": (parse_real, 1e-10),
        "max_iter": (parse_int, 50),
        "out": (str, "branch.csv"),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        if params["steps"] < 1:
            raise ConfigurationError("steps must be at least 1.")
        system = GalerkinSystem.from_truncation(
            params["q"], params["nmax"], params["kcut"], logger=self.logger
        )
        path = np.linspace(params["lambda_start"], params["lambda_end"], params["steps"])
        cfg = NewtonConfig(tol=params["tol"], max_iter=params["max_iter"])
        branch = continuation(system, path, cfg, logger=self.logger)
        rows = branch.rows()
        self.write("branch", BranchCsvSink(self.logger), rows, params["out"])
        norms = np.array([row["norm_h0"] for row in rows])
        self.result.summary = {"points": len(rows), "final_norm": float(norms[-1])}
        if len(rows) > 1 and path[0] > 0.0 and np.all(np.diff(path) > 0):
            if not np.all(np.diff(norms) > 0):
                self.violate("branch_norm_monotone", norms=norms)


class RenderStudy(Study):
    """Sample a stored field or solution on a square grid and write a PGM."""

    command = "render"
    parameters = {
        "in": (parse_optional_str, None),
        "window": (parse_real, 30.0),
        "resolution": (parse_int, 512),
        "out": (str, "render.pgm"),
    }

    @override
    def _process_logic(self, params: Dict[str, Any], rng: np.random.Generator) -> None:
        if not params["in"]:
            raise ConfigurationError("render needs --in with a field or solution file.")
        field = FieldJsonSource(self.logger).get_data(params["in"])
        _write_image(self, field, params, params["out"])
