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


"""Damped Newton iteration for the truncated steady equation."""

import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from qpf.asymptotics import epsilon_from_lambda
from qpf.exceptions import OutOfRangeError, ParameterError, SingularJacobianError
from qpf.logger import Logger

from .galerkin import GalerkinState, GalerkinSystem

LINEAR_SOLVERS = ("auto", "dense", "iterative")
PIVOT_TOL = 1e-14
REPORT_SOBOLEV_INDEX = 3.0


@dataclass
class NewtonConfig:
    """Stopping rule, damping and linear-solver choice."""

    tol: float = 1e-10
    max_iter: int = 50
    damping: float = 1.0
    damped_steps: int = 0
    max_halvings: int = 10
    linear_solver: str = "auto"
    linear_tol: float = 1e-12
    dense_limit: int = 4000

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ParameterError(f"tol must be positive, got {self.tol}.")
        if int(self.max_iter) < 0:
            raise ParameterError(f"max_iter must be non-negative, got {self.max_iter}.")
        if not 0.0 < self.damping <= 1.0:
            raise ParameterError(f"damping must lie in (0, 1], got {self.damping}.")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise ParameterError(
                f"linear_solver must be one of {LINEAR_SOLVERS}, got {self.linear_solver!r}."
            )


@dataclass
class SolveReport:
    """History and diagnostics of one solve."""

    lam: float
    iterates: List[Tuple[float, float]] = field(default_factory=list)
    converged: bool = False
    final_residual: float = float("nan")
    residual_h3: float = float("nan")
    epsilon_used: Optional[float] = None
    comparison: Optional[Dict[str, float]] = None
    truncation_losses: List[float] = field(default_factory=list)
    quadratic_constant: Optional[float] = None
    linear_solver: str = "dense"
    halvings: int = 0

    @property
    def iterations(self) -> int:
        return max(0, len(self.iterates) - 1)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["iterates"] = [list(pair) for pair in self.iterates]
        out["iterations"] = self.iterations
        return out


class JacobianSolver:
    """
    Solves ``J(u) x = b`` at a fixed iterate.

    Dense LU up to ``dense_limit`` unknowns; beyond that MINRES on the
    orbit-weighted (symmetric) form ``W J`` with a diagonal preconditioner
    ``|W ((1-|k|^2)^2 - λ + 3 mean(u^2))|``.
    """

    def __init__(
        self,
        system: GalerkinSystem,
        state: GalerkinState,
        cfg: NewtonConfig,
        logger: Optional[Logger] = None,
    ):
        self.system = system
        self.state = state
        self.cfg = cfg
        self.logger = logger if logger is not None else system.logger
        kind = cfg.linear_solver
        if kind == "auto":
            kind = "dense" if system.dof <= cfg.dense_limit else "iterative"
        self.kind = kind
        self._lu = None
        if kind == "dense":
            self._factor()

    def _factor(self) -> None:
        matrix = self.system.jacobian_matrix(self.state.u, self.state.lam, self.state)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            try:
                lu, piv = scipy.linalg.lu_factor(matrix)
            except (ValueError, scipy.linalg.LinAlgError) as exc:
                raise SingularJacobianError(f"Jacobian factorization failed: {exc}") from exc
        pivots = np.abs(np.diag(lu))
        scale = max(float(np.abs(matrix).max(initial=0.0)), 1.0)
        if pivots.min(initial=np.inf) <= PIVOT_TOL * scale:
            raise SingularJacobianError(
                f"Jacobian is singular at λ = {self.state.lam:.6g} "
                f"(smallest pivot {pivots.min():.3e})."
            )
        self._lu = (lu, piv)
        self.logger.debug("Dense Jacobian factorized, %d unknowns", self.system.dof)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            return scipy.linalg.lu_solve(self._lu, rhs)
        system, state = self.system, self.state
        weights = system.sizes
        operator = spla.LinearOperator(
            (system.dof, system.dof),
            matvec=lambda v: weights
            * system.jacobian_apply(state.u, state.lam, v, state),
            dtype=float,
        )
        shift = 3.0 * system.square_mean(state.square)
        scale = np.abs(weights * (system.diag - state.lam + shift))
        scale[scale == 0.0] = 1.0
        precond = spla.LinearOperator(
            (system.dof, system.dof), matvec=lambda v: v / scale, dtype=float
        )
        solution, info = spla.minres(
            operator, weights * rhs, rtol=self.cfg.linear_tol, M=precond
        )
        if info < 0:
            raise SingularJacobianError(f"MINRES broke down with code {info}.")
        if info > 0:
            self.logger.warning("MINRES stopped after %d iterations without converging", info)
        return solution


def _quadratic_constant(steps: List[Tuple[float, bool]]) -> Optional[float]:
    # trailing run of undamped steps; the last three give two ratios
    tail: List[float] = []
    for norm, undamped in reversed(steps):
        if not undamped:
            break
        tail.insert(0, norm)
    tail = tail[-3:]
    ratios = [b / a**2 for a, b in zip(tail, tail[1:]) if a > 0.0]
    return max(ratios) if ratios else None


def _compare_with_expansion(
    system: GalerkinSystem, u: np.ndarray, lam: float, report: SolveReport
) -> None:
    if not lam > 0.0:
        return
    try:
        epsilon = epsilon_from_lambda(system.q, lam)
    except OutOfRangeError:
        return
    distance = system.norm(u - system.asymptotic_field(epsilon))
    report.epsilon_used = epsilon
    report.comparison = {"h0": distance, "scaled": distance / epsilon**4}


def newton_solve(
    system: GalerkinSystem,
    lam: float,
    init: np.ndarray,
    cfg: Optional[NewtonConfig] = None,
    logger: Optional[Logger] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Damped Newton iteration from ``init`` for ``residual(u, λ) = 0``.

    Converged means ``||residual||_0 <= cfg.tol``. A step that does not
    reduce the residual is halved up to ``cfg.max_halvings`` times; if it
    still fails the solve stops unconverged. Exhausting ``max_iter`` also
    returns ``converged=False``.

    Raises:
        ParameterError: non-finite initial data.
        SingularJacobianError: the Jacobian cannot be factorized.
    """
    cfg = NewtonConfig() if cfg is None else cfg
    log = logger if logger is not None else system.logger
    u = np.array(init, dtype=float)
    if u.shape != (system.dof,) or not np.all(np.isfinite(u)):
        raise ParameterError("Initial guess must be a finite representative vector.")

    report = SolveReport(lam=float(lam))
    steps: List[Tuple[float, bool]] = []
    state = system.evaluate(u, lam)
    norm = system.norm(state.residual)
    for iteration in range(int(cfg.max_iter) + 1):
        report.truncation_losses.append(state.truncation_loss)
        log.info("Newton %d: residual %.3e", iteration, norm)
        if norm <= cfg.tol:
            report.converged = True
            report.iterates.append((norm, 0.0))
            break
        if iteration == cfg.max_iter:
            report.iterates.append((norm, 0.0))
            break
        solver = JacobianSolver(system, state, cfg, log)
        report.linear_solver = solver.kind
        step = solver.solve(-state.residual)
        scale = cfg.damping if iteration < cfg.damped_steps else 1.0
        trial = system.evaluate(u + scale * step, lam)
        trial_norm = system.norm(trial.residual)
        halvings = 0
        while not trial_norm < norm and halvings < cfg.max_halvings:
            scale *= 0.5
            halvings += 1
            trial = system.evaluate(u + scale * step, lam)
            trial_norm = system.norm(trial.residual)
        report.halvings += halvings
        step_norm = system.norm(scale * step)
        report.iterates.append((norm, step_norm))
        if not trial_norm < norm:
            log.warning(
                "Newton line search failed at iteration %d (residual %.3e)", iteration, norm
            )
            break
        steps.append((step_norm, scale == 1.0))
        u, state, norm = trial.u, trial, trial_norm

    report.final_residual = norm
    report.residual_h3 = system.norm(state.residual, REPORT_SOBOLEV_INDEX)
    report.quadratic_constant = _quadratic_constant(steps)
    _compare_with_expansion(system, u, lam, report)
    if not report.converged:
        log.warning("Newton did not converge at λ = %.6g: residual %.3e", lam, norm)
    return u, report
