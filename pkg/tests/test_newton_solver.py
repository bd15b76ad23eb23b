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


"""Galerkin system, Newton iteration, correction fixed point and continuation."""

import numpy as np
import pytest

from qpf.asymptotics import expansion_bundle, prepare_atlas
from qpf.exceptions import (
    ContinuationError,
    DivergenceError,
    ParameterError,
    SingularJacobianError,
)
from qpf.fitting import BoundConstantModel
from qpf.newton_solver import (
    GalerkinSystem,
    JacobianSolver,
    NewtonConfig,
    SolutionBranch,
    continuation,
    first_iterate,
    fixed_point_solve,
    newton_solve,
)
from qpf.newton_solver.fixed_point import CorrectionProblem
from qpf.spectral_field import SpectralField, cube, hs_norm, transfer

EPSILON = 0.05
TIGHT = NewtonConfig(tol=1e-12, max_iter=30)


@pytest.fixture(scope="module")
def system():
    """Window N_k <= 6 around the quasipattern for q = 4."""
    return GalerkinSystem.from_truncation(4, 6)


@pytest.fixture(scope="module")
def lam():
    return expansion_bundle(4).lambda_eps(EPSILON)


@pytest.fixture(scope="module")
def newton_solution(system, lam):
    return newton_solve(system, lam, system.asymptotic_guess(lam), TIGHT)


def test_system_shape(system):
    assert len(system.atlas) == 1289
    assert system.dof == system.atlas.orbit_reps.size
    assert system.sizes.sum() == len(system.atlas)
    assert "GalerkinSystem" in repr(system)


def test_coordinates_round_trip(system):
    U = system.asymptotic_field(EPSILON)
    field = system.to_field(U)
    assert field.symmetric
    assert np.array_equal(system.from_field(field), U)
    assert system.norm(U) == pytest.approx(hs_norm(field))
    assert system.norm(U, 3.0) == pytest.approx(hs_norm(field, 3.0))
    assert system.unit_coefficient(U) == pytest.approx(EPSILON)
    with pytest.raises(ParameterError):
        system.from_field(SpectralField.indicator(system.atlas, system.atlas.unit_index(1)))


def test_projected_cube_is_exact(system):
    """The projected cube equals the untruncated cube on the representatives."""
    u = system.asymptotic_field(0.2)
    big = prepare_atlas(4)
    exact = cube(transfer(system.to_field(u), big), strict=True)
    state = system.evaluate(u, 0.0)
    projected = system.apply_rows(state.square, system.expand(u))
    where = big.lookup(system.atlas.canon[system.reps])
    assert np.allclose(projected, exact.coeffs[where], atol=1e-15)
    assert state.truncation_loss > 0.0
    assert system.square_mean(state.square) == pytest.approx(system.norm(u) ** 2)


def test_jacobian_matches_finite_differences(system):
    rng = np.random.default_rng(4)
    u = system.asymptotic_field(0.1)
    v = rng.standard_normal(system.dof) * 1e-2
    h = 1e-5
    difference = (system.residual(u + h * v, 0.3) - system.residual(u - h * v, 0.3)) / (2 * h)
    assert np.allclose(system.jacobian_apply(u, 0.3, v), difference, atol=1e-9)
    assert np.allclose(system.jacobian_matrix(u, 0.3) @ v, system.jacobian_apply(u, 0.3, v))


def test_jacobian_is_weighted_symmetric(system):
    """⟨Jv, w⟩ = ⟨v, Jw⟩ in the orbit-weighted product."""
    rng = np.random.default_rng(5)
    u = system.asymptotic_field(0.1)
    v, w = rng.standard_normal(system.dof), rng.standard_normal(system.dof)
    left = system.inner(system.jacobian_apply(u, 0.2, v), w)
    right = system.inner(v, system.jacobian_apply(u, 0.2, w))
    assert left == pytest.approx(right, rel=1e-12)


def test_newton_converges_near_expansion(system, newton_solution):
    u, report = newton_solution
    assert report.converged
    assert report.final_residual <= 1e-12
    assert report.linear_solver == "dense"
    assert report.iterations >= 1
    assert abs(system.unit_coefficient(u) - EPSILON) <= 10 * EPSILON**3
    assert report.epsilon_used == pytest.approx(EPSILON)
    distance = system.norm(u - system.asymptotic_field(EPSILON))
    assert report.comparison["h0"] == pytest.approx(distance)
    assert report.comparison["scaled"] == pytest.approx(distance / EPSILON**4)
    assert len(report.truncation_losses) == len(report.iterates)
    assert report.to_dict()["iterations"] == report.iterations


def scaled_distance(system: GalerkinSystem, epsilon: float) -> float:
    """``||u - U_ε||_0 / ε⁴`` for the Newton solution at ``λ_ε``."""
    lam = expansion_bundle(system.q).lambda_eps(epsilon)
    _, report = newton_solve(system, lam, system.asymptotic_guess(lam), TIGHT)
    assert report.converged
    return report.comparison["scaled"]


def test_distance_to_expansion_is_order_epsilon4(system):
    """One constant K bounds ||u - U_ε||₀ <= Kε⁴ and does not grow as ε shrinks."""
    epsilons = [0.025, 0.0125]
    scaled = [scaled_distance(system, epsilon) for epsilon in epsilons]
    distances = [K * epsilon**4 for K, epsilon in zip(scaled, epsilons)]
    K = BoundConstantModel(exponent=4, side="upper").fit(epsilons, distances)["constant"]
    assert K == pytest.approx(max(scaled))
    assert scaled[1] <= 2.0 * scaled[0]
    for epsilon, distance in zip(epsilons, distances):
        assert distance <= K * epsilon**4 * (1 + 1e-12)


@pytest.fixture(scope="module")
def wide_system():
    """Window N_k <= 9."""
    return GalerkinSystem.from_truncation(4, 9)


def test_correction_shrinks_with_epsilon(wide_system):
    """||W||₀ = ||u - U_ε||₀ / ε⁴ is O(ε) between ε = 0.1 and ε = 0.05."""
    coarse, fine = scaled_distance(wide_system, 0.1), scaled_distance(wide_system, 0.05)
    assert 0.0 < fine
    assert fine / 0.05 <= coarse / 0.1


def test_fixed_point_agrees_with_newton(system, newton_solution):
    """U_ε + ε⁴W from the contraction is the Newton solution."""
    u, _ = newton_solution
    W, report = fixed_point_solve(system, EPSILON, TIGHT)
    assert report.converged
    candidate = system.asymptotic_field(EPSILON) + EPSILON**4 * W
    assert system.norm(candidate - u) < 1e-8
    assert report.comparison["scaled"] == pytest.approx(system.norm(W))
    assert first_iterate(system, EPSILON, 0.0) == pytest.approx(report.iterates[0][1])
    assert first_iterate(system, EPSILON) >= first_iterate(system, EPSILON, 0.0)


def test_fixed_point_divergence(system, monkeypatch):
    """Five growing steps in a row abort the iteration."""
    monkeypatch.setattr(CorrectionProblem, "map", lambda self, W: 2.0 * W + 1.0)
    with pytest.raises(DivergenceError):
        fixed_point_solve(system, EPSILON, NewtonConfig(tol=1e-14, max_iter=40))


def test_iterative_solver_agrees(system, lam, newton_solution):
    u, _ = newton_solution
    cfg = NewtonConfig(tol=1e-10, max_iter=30, linear_solver="iterative")
    v, report = newton_solve(system, lam, system.asymptotic_guess(lam), cfg)
    assert report.converged
    assert report.linear_solver == "iterative"
    assert system.norm(v - u) < 1e-7


def test_negative_lambda_decays_to_zero(system):
    rng = np.random.default_rng(6)
    init = 1e-3 * rng.standard_normal(system.dof)
    u, report = newton_solve(system, -0.05, init, NewtonConfig(tol=1e-13))
    assert report.converged
    assert system.norm(u) < 1e-10
    assert report.comparison is None


def test_zero_is_a_fixed_point(system):
    u, report = newton_solve(system, 0.05, system.zeros())
    assert report.converged
    assert report.iterations == 0
    assert not u.any()


def test_singular_jacobian(system):
    """At u = 0, λ = 0 the unit orbit is in the kernel."""
    state = system.evaluate(system.zeros(), 0.0)
    with pytest.raises(SingularJacobianError):
        JacobianSolver(system, state, NewtonConfig(linear_solver="dense"))


def test_budget_exhaustion_is_not_convergence(system, lam):
    u, report = newton_solve(
        system, lam, system.asymptotic_guess(lam), NewtonConfig(tol=1e-30, max_iter=1)
    )
    assert not report.converged
    assert report.iterations == 1


def test_invalid_configuration(system):
    with pytest.raises(ParameterError):
        NewtonConfig(tol=0.0)
    with pytest.raises(ParameterError):
        NewtonConfig(damping=1.5)
    with pytest.raises(ParameterError):
        NewtonConfig(linear_solver="magic")
    with pytest.raises(ParameterError):
        newton_solve(system, 0.1, np.full(system.dof, np.nan))


def test_continuation_branch(system):
    path = [0.03, 0.04, 0.05, 0.06]
    branch = continuation(system, path, NewtonConfig(tol=1e-11))
    assert len(branch) == 4
    assert branch.lambdas == path
    rows = branch.rows()
    norms = [row["norm_h0"] for row in rows]
    assert all(b > a for a, b in zip(norms, norms[1:]))
    assert all(row["converged"] for row in rows)
    assert SolutionBranch.collection_base_type() is SpectralField


def test_continuation_rejects_non_monotone_path(system):
    with pytest.raises(ParameterError):
        continuation(system, [0.03, 0.05, 0.04])


def test_continuation_reports_failing_lambda(system):
    with pytest.raises(ContinuationError) as info:
        continuation(system, [0.03, 0.04], NewtonConfig(tol=1e-30, max_iter=1))
    assert info.value.lam == pytest.approx(0.03)


def test_branch_rejects_foreign_items():
    branch = SolutionBranch()
    with pytest.raises(TypeError):
        branch.append(np.zeros(3))
