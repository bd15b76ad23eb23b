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


"""Formal small-amplitude expansion of the quasipattern."""

import math

import numpy as np
import pytest

from qpf.asymptotics import (
    amplitude_law,
    base_pattern,
    epsilon_from_lambda,
    expansion_bundle,
    lambda_2,
    lambda_4_report,
    potential,
    prepare,
    residual_order,
    steady_residual,
)
from qpf.exceptions import OutOfRangeError, ParameterError
from qpf.newton_solver import GalerkinSystem
from qpf.spectral_field import SpectralField, hs_norm, transfer


@pytest.fixture(scope="module")
def bundle():
    return expansion_bundle(4)


def test_lambda2():
    """λ₂ = 3(2q - 1)."""
    assert lambda_2(4) == 21.0
    assert lambda_2(5) == 27.0


def test_bundle_invariants(bundle):
    """λ₄ < 0, u₁ <= 0, mean(a) = 3 and mean(b) = -λ₄."""
    assert bundle.lambda2 == 21.0
    assert bundle.lambda4 < 0.0
    assert np.all(bundle.u1.coeffs <= 0.0)
    assert bundle.a0 == pytest.approx(3.0)
    assert bundle.b0 == pytest.approx(-bundle.lambda4)
    assert bundle.u0.symmetric and bundle.u1.symmetric and bundle.u2.symmetric


def test_u1_coefficients(bundle):
    """u₁ vanishes on the circle and equals -1/64 at 3k₁."""
    atlas = bundle.atlas
    assert bundle.u1.coefficient(atlas.unit_index(1)) == 0.0
    assert bundle.u2.coefficient(atlas.unit_index(1)) == 0.0
    triple = atlas.index_of_word([3, 0, 0, 0])
    assert bundle.u1.coefficient(triple) == pytest.approx(-1.0 / 64.0, abs=1e-15)
    # k_1 + k_1 + k_2: three orderings, divisor (1 - |2k_1 + k_2|^2)^2
    site = atlas.index_of_word([2, 1, 0, 0])
    norm2 = 5.0 + 4.0 * math.cos(math.pi / 4)
    assert bundle.u1.coefficient(site) == pytest.approx(-3.0 / (1.0 - norm2) ** 2)


def test_lambda4_report(bundle):
    """The convolution entry of the report is λ₄ itself."""
    report = lambda_4_report(4)
    assert report["convolution"] == pytest.approx(bundle.lambda4)
    assert math.isfinite(report["literal_sum"])


def test_lambda_eps_and_inverse(bundle):
    """epsilon_from_lambda inverts λ_ε on the small-amplitude root."""
    for epsilon in (0.01, 0.05, 0.1):
        lam = bundle.lambda_eps(epsilon)
        assert epsilon_from_lambda(4, lam) == pytest.approx(epsilon, rel=1e-12)


def test_epsilon_from_lambda_out_of_range(bundle):
    with pytest.raises(OutOfRangeError):
        epsilon_from_lambda(4, 0.0)
    with pytest.raises(OutOfRangeError):
        epsilon_from_lambda(4, -0.1)
    too_large = bundle.lambda2**2 / (4.0 * -bundle.lambda4) * 1.01
    with pytest.raises(OutOfRangeError):
        epsilon_from_lambda(4, too_large)


def test_amplitude_law():
    law = amplitude_law(4, 0.1)
    assert law["unit_coefficient"] == 0.1
    assert law["h0_norm"] == pytest.approx(0.1 * math.sqrt(8.0))


def test_steady_residual_of_zero():
    zero = SpectralField.zeros(base_pattern(4).atlas)
    assert not steady_residual(zero, 0.3).coeffs.any()


def test_potential_mean_is_parseval(bundle):
    """The mean of U_ε² is ||U_ε||_0²."""
    epsilon = 0.1
    square = potential(bundle, epsilon)
    assert square.truncation_loss == 0.0
    assert square.mean() == pytest.approx(hs_norm(bundle.U_eps(epsilon)) ** 2)


def test_prepare_rejects_bad_epsilon():
    with pytest.raises(ParameterError):
        prepare(4, 0.0)
    with pytest.raises(ParameterError):
        prepare(4, 0.6)


def test_residual_is_seventh_order():
    """Halving ε divides the residual by about 2⁷."""
    order = residual_order(4, 0.02)
    assert order["fine"] < order["coarse"]
    assert 110.0 < order["ratio"] < 150.0


def test_galerkin_residual_matches_prepared_residual(bundle):
    """On a window holding supp U_ε the truncated residual is ε⁷ f_ε."""
    epsilon = 0.1
    state = prepare(4, epsilon)
    system = GalerkinSystem.from_truncation(4, 6)
    U = system.asymptotic_field(epsilon)
    residual = system.residual(U, state.lambda_eps)
    f = transfer(state.f_eps, system.atlas, strict=False).coeffs[system.reps]
    scale = float(np.abs(residual).max())
    assert scale > 0.0
    assert np.allclose(residual, epsilon**7 * f, rtol=1e-9, atol=1e-12 * scale)
