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


"""Contraction map for the rescaled correction ``W = (U - U_ε) / ε^4``."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from qpf.asymptotics import expansion_bundle
from qpf.exceptions import DivergenceError, ParameterError
from qpf.logger import Logger

from .galerkin import GalerkinSystem
from .newton import JacobianSolver, NewtonConfig, SolveReport

GROWTH_LIMIT = 5


@dataclass
class CorrectionProblem:
    """``U_ε``, ``λ_ε``, ``f_ε`` and the factorized ``L_ε`` on one window."""

    system: GalerkinSystem
    epsilon: float
    lam: float
    U: np.ndarray
    f: np.ndarray
    solver: JacobianSolver

    def products(self, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Projected ``U_ε W^2`` and ``W^3``."""
        system = self.system
        W_full = system.expand(W)
        square = system.quadratic(W_full, W_full)
        return (
            system.apply_rows(square, system.expand(self.U)),
            system.apply_rows(square, W_full),
        )

    def map(self, W: np.ndarray) -> np.ndarray:
        """``G(ε, W) = -ε^3 L_ε^{-1}[f_ε + 3ε U_ε W^2 + ε^5 W^3]``."""
        eps = self.epsilon
        uw2, w3 = self.products(W)
        return -(eps**3) * self.solver.solve(self.f + 3.0 * eps * uw2 + eps**5 * w3)

    def equation(self, W: np.ndarray) -> np.ndarray:
        """``F(ε, W) = L_ε W + ε^3 f_ε + 3ε^4 U_ε W^2 + ε^8 W^3``."""
        eps = self.epsilon
        uw2, w3 = self.products(W)
        linear = self.system.jacobian_apply(self.U, self.lam, W, self.solver.state)
        return linear + eps**3 * self.f + 3.0 * eps**4 * uw2 + eps**8 * w3


def correction_problem(
    system: GalerkinSystem,
    epsilon: float,
    cfg: Optional[NewtonConfig] = None,
    logger: Optional[Logger] = None,
) -> CorrectionProblem:
    """
    Set up the correction equation on the window of ``system``.

    ``f_ε`` is the Galerkin residual of ``U_ε`` divided by ``ε^7``, so that
    ``U_ε + ε^4 W`` solves the same truncated equation as :func:`newton_solve`.
    """
    if not epsilon > 0.0:
        raise ParameterError(f"ε must be positive, got {epsilon}.")
    cfg = NewtonConfig() if cfg is None else cfg
    bundle = expansion_bundle(system.q)
    lam = bundle.lambda_eps(epsilon)
    U = system.asymptotic_field(epsilon)
    state = system.evaluate(U, lam)
    return CorrectionProblem(
        system=system,
        epsilon=float(epsilon),
        lam=lam,
        U=U,
        f=state.residual / epsilon**7,
        solver=JacobianSolver(system, state, cfg, logger),
    )


def first_iterate(
    system: GalerkinSystem, epsilon: float, s: float = 3.0
) -> float:
    """``H_s`` norm of ``G(ε, 0) = -ε^3 L_ε^{-1} f_ε``."""
    problem = correction_problem(system, epsilon)
    return system.norm(problem.map(system.zeros()), s)


def fixed_point_solve(
    system: GalerkinSystem,
    epsilon: float,
    cfg: Optional[NewtonConfig] = None,
    logger: Optional[Logger] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Picard iteration ``W <- G(ε, W)`` from ``W = 0``.

    Stops when ``||F(ε, W)||_0 <= cfg.tol``. The report compares with the
    expansion through ``ε^4 ||W||_0``.

    Raises:
        DivergenceError: the step grows five times in a row.
    """
    cfg = NewtonConfig() if cfg is None else cfg
    log = logger if logger is not None else system.logger
    problem = correction_problem(system, epsilon, cfg, log)
    report = SolveReport(
        lam=problem.lam, epsilon_used=float(epsilon), linear_solver=problem.solver.kind
    )
    W = system.zeros()
    previous_step = np.inf
    growth = 0
    F = problem.equation(W)
    norm = system.norm(F)
    for iteration in range(int(cfg.max_iter) + 1):
        log.info("Fixed point %d: |F(ε, W)| = %.3e", iteration, norm)
        if norm <= cfg.tol or iteration == cfg.max_iter:
            report.converged = norm <= cfg.tol
            report.iterates.append((norm, 0.0))
            break
        W_next = problem.map(W)
        step = system.norm(W_next - W)
        report.iterates.append((norm, step))
        growth = growth + 1 if step > previous_step else 0
        if growth >= GROWTH_LIMIT:
            raise DivergenceError(
                f"Fixed-point steps grew {GROWTH_LIMIT} times in a row at ε = {epsilon}."
            )
        previous_step = step
        W = W_next
        F = problem.equation(W)
        norm = system.norm(F)

    report.final_residual = norm
    report.residual_h3 = system.norm(F, 3.0)
    W_norm = system.norm(W)
    report.comparison = {"h0": epsilon**4 * W_norm, "scaled": W_norm}
    if not report.converged:
        log.warning("Fixed point did not converge at ε = %.4g: %.3e", epsilon, norm)
    return W, report
