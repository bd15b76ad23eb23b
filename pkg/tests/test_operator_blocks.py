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

"""Reduced blocks on the disc region and the weight-ratio inequality."""

import math

import numpy as np
import pytest
import sympy

from qpf.asymptotics import expansion_bundle
from qpf.exceptions import ParameterError, SupportError
from qpf.operator_analysis import (
    SectorPoint,
    apply_P2a,
    assemble_block,
    beta_values,
    block_eigenvalues,
    block_sites,
    block_sweep,
    classify_spectrum,
    coupling_block,
    isolated_eigenvalues,
    jacobi_eigenvalues,
    lambda1_matrix,
    sector_points,
    sector_points_from_atlas,
    weight_ratio_bound,
)
from qpf.quasilattice import build_atlas
from qpf.spectral_field import SpectralField, multiply, project

SAFE_KPRIME = (0.3, 0.1)
ISOLATED_KPRIME = (0.9, 0.0)
NEAR_DEGENERATE_KPRIME = (0.3, 1e-6)

# rows couple k_r to k_c: 3 on the diagonal and for the opposite vector, 6 elsewhere
LAMBDA1_Q4 = 3 * np.array(
    [
        [1, 2, 2, 2, 1, 2, 2, 2],
        [2, 1, 2, 2, 2, 1, 2, 2],
        [2, 2, 1, 2, 2, 2, 1, 2],
        [2, 2, 2, 1, 2, 2, 2, 1],
        [1, 2, 2, 2, 1, 2, 2, 2],
        [2, 1, 2, 2, 2, 1, 2, 2],
        [2, 2, 1, 2, 2, 2, 1, 2],
        [2, 2, 2, 1, 2, 2, 2, 1],
    ]
)


def charpoly_roots(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues as the roots of the exact characteristic polynomial."""
    x = sympy.Symbol("x")
    exact = sympy.Matrix(matrix.tolist()).applyfunc(sympy.Rational)
    roots = sympy.Poly(exact.charpoly(x).as_expr(), x).real_roots()
    return np.sort([float(root.evalf(30)) for root in roots])


@pytest.fixture(scope="module")
def labels():
    return classify_spectrum(build_atlas(4, 6), 1e-4, 2.0)


@pytest.fixture(scope="module")
def shifted_labels():
    """Disc 1 holds lattice offsets k' != 0 and the discs stay apart under 2-sum shifts."""
    return classify_spectrum(build_atlas(4, 9), 4e-5, 2.0)


@pytest.fixture(scope="module")
def shifted_site(shifted_labels):
    """A disc-1 site other than k_1 whose whole block is on the atlas."""
    atlas = shifted_labels.atlas
    for site in shifted_labels.indices(("S2", 1)):
        if site == atlas.unit_index(1):
            continue
        try:
            block_sites(shifted_labels, int(site))
        except SupportError:
            continue
        return int(site)
    pytest.fail("No disc-1 site with a complete block on the atlas.")


def test_lambda1_matches_literal():
    assert np.array_equal(lambda1_matrix(4), LAMBDA1_Q4)


def test_lambda1_spectrum():
    """Λ₁ for q = 4 has eigenvalues 42 (once), 0 (four times) and -6 (three times)."""
    matrix = lambda1_matrix(4)
    assert np.array_equal(matrix, matrix.T)
    values = np.rint(np.linalg.eigvalsh(matrix.astype(float))).astype(int)
    counts = {v: int(np.count_nonzero(values == v)) for v in set(values.tolist())}
    assert counts == {42: 1, 0: 4, -6: 3}


def test_lambda1_is_circulant_for_other_orders():
    for q in (5, 6):
        matrix = lambda1_matrix(q)
        assert matrix.shape == (2 * q, 2 * q)
        for r in range(2 * q):
            assert np.array_equal(np.roll(matrix[0], r), matrix[r])


def test_lambda1_copies_are_independent():
    matrix = lambda1_matrix(4)
    matrix[0, 0] = 0
    assert lambda1_matrix(4)[0, 0] == 3


def test_coupling_block_off_the_generators(shifted_labels, shifted_site):
    """P₂(a·) on the block of k' != 0 is Λ₁ and leaves nothing on other disc sites."""
    atlas = shifted_labels.atlas
    kprime = atlas.embed[shifted_site] - atlas.embed[atlas.unit_index(1)]
    assert np.hypot(*kprime) > 0.1
    matrix, leakage = coupling_block(shifted_labels, shifted_site)
    assert leakage == 0.0
    assert np.array_equal(matrix, LAMBDA1_Q4)


def test_block_sites_rejects_sites_outside_disc_one(shifted_labels):
    with pytest.raises(ParameterError):
        block_sites(shifted_labels, 0)


def test_apply_P2a_matches_projected_product(shifted_labels):
    atlas = shifted_labels.atlas
    field = SpectralField.random(
        atlas, 40, np.random.default_rng(5), support=shifted_labels.indices("S2")
    )
    a = expansion_bundle(4).a_field
    expected = project(multiply(a, field, target=atlas), shifted_labels, "S2")
    assert np.allclose(apply_P2a(field, shifted_labels).coeffs, expected.coeffs, atol=1e-12)


def test_apply_P2a_on_generator(labels):
    """P₂(a·) spreads an indicator at k_1 along the first column of Λ₁."""
    atlas = labels.atlas
    k1 = SpectralField.indicator(atlas, atlas.unit_index(1))
    out = apply_P2a(k1, labels)
    for j in range(1, 9):
        assert out.coefficient(atlas.unit_index(j)) == LAMBDA1_Q4[j - 1, 0]
    assert out.coeffs.sum() == LAMBDA1_Q4[:, 0].sum()


def test_apply_P2a_needs_disc_support(labels):
    origin = SpectralField.indicator(labels.atlas, 0)
    with pytest.raises(SupportError):
        apply_P2a(origin, labels)


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((8, 8))
    a = a + a.T
    assert np.allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-10)


@pytest.mark.parametrize("kprime", [(0.0, 0.0), SAFE_KPRIME, NEAR_DEGENERATE_KPRIME])
def test_jacobi_matches_characteristic_polynomial(kprime):
    block = assemble_block(4, kprime, 0.05)
    assert np.allclose(block_eigenvalues(block), charpoly_roots(block.mat), rtol=0.0, atol=1e-10)


def test_block_at_zero_offset():
    """With k' = 0 every β vanishes and the block is ε²Λ₁."""
    block = assemble_block(4, (0.0, 0.0), 0.1)
    assert not block.beta.any()
    expected = np.sort(0.01 * np.linalg.eigvalsh(LAMBDA1_Q4.astype(float)))
    assert np.allclose(block_eigenvalues(block), expected, atol=1e-12)


def test_beta_values():
    beta = beta_values(4, SAFE_KPRIME)
    assert beta[0] == pytest.approx((2 * 0.3 + 0.1) ** 2)
    assert beta[2] == pytest.approx((2 * 0.1 + 0.1) ** 2)
    with pytest.raises(ParameterError):
        assemble_block(4, (1.0, 0.0), 0.01, delta1=0.5)


def test_isolated_eigenvalues():
    mask = isolated_eigenvalues(np.array([5.0, 0.0, 3.0, 0.2]), gap_floor=1.0)
    assert mask.tolist() == [False, False, True, True]
    assert not isolated_eigenvalues(beta_values(4, SAFE_KPRIME)).any()
    assert isolated_eigenvalues(beta_values(4, ISOLATED_KPRIME)).tolist() == [False] * 7 + [True]


def test_isolated_block_has_an_epsilon4_defect():
    """The largest β at k' = (0.9, 0) is isolated; its defect scales like ε⁴."""
    sweep = block_sweep(4, [0.025, 0.0125], kprimes=[ISOLATED_KPRIME])
    assert len(sweep.rows) == 2 * 8
    for data in sweep.summary["per_epsilon"].values():
        assert data["isolated"] == 1
        assert data["min_abs_mu_over_eps2_isolated"] >= 2.0
    assert sweep.lower_bound_holds
    assert sweep.single_constant
    assert math.isfinite(sweep.summary["K_fitted"])


def test_zero_offset_is_reported_below_the_bound():
    """k' = 0 gives μ = -6ε²; nothing there is isolated, so K stays undefined."""
    sweep = block_sweep(4, [0.05], kprimes=[(0.0, 0.0)])
    data = sweep.summary["per_epsilon"][repr(0.05)]
    assert data["isolated"] == 0
    assert data["points_below_bound"] == 1
    assert data["min_mu_over_eps2"] == pytest.approx(-6.0, abs=1e-9)
    assert data["min_abs_mu_over_eps2"] == pytest.approx(0.0, abs=1e-9)
    assert sweep.lower_bound_holds
    assert not sweep.single_constant


@pytest.fixture(scope="module")
def default_sweep():
    return block_sweep(4, [0.1, 0.05, 0.025])


def test_default_sweep_has_one_defect_constant(default_sweep):
    """64 sector points at ε = 0.1, 0.05, 0.025: one K and |μ| >= 2ε² where β is isolated."""
    assert len(default_sweep.rows) == 3 * 64 * 8
    per_eps = default_sweep.summary["per_epsilon"]
    assert set(per_eps) == {repr(0.1), repr(0.05), repr(0.025)}
    for data in per_eps.values():
        assert data["points"] == 64
        assert data["isolated"] > 0
        assert math.isfinite(data["K"]) and data["K"] > 0.0
        assert data["min_abs_mu_over_eps2_isolated"] >= 2.0
    constants = [data["K"] for data in per_eps.values()]
    assert max(constants) <= 2.0 * min(constants)
    assert default_sweep.summary["K_spread"] <= 2.0
    assert default_sweep.single_constant
    assert default_sweep.lower_bound_holds
    assert default_sweep.summary["K_fitted"] == pytest.approx(max(constants))


def test_default_sweep_shares_its_sample(default_sweep):
    offsets = {(row["kprime_x"], row["kprime_y"]) for row in default_sweep.rows}
    assert len(offsets) == 64


def test_block_sweep_rejects_bad_input():
    with pytest.raises(ParameterError):
        block_sweep(4, [])
    with pytest.raises(ParameterError):
        block_sweep(4, [0.05], gap_floor=0.0)


def test_sector_points_stay_in_sector():
    epsilon, C = 0.01, 2.0
    delta1 = math.sqrt(3.0 * C * math.sqrt(epsilon))
    points = sector_points(4, epsilon, C, 32)
    assert len(points) == 32
    for point in points:
        x, y = point.kprime
        assert math.hypot(x, y) <= delta1 * (1 + 1e-12)
        assert -math.pi / 8 - 1e-12 <= math.atan2(y, x) < math.pi / 8
    assert points == sector_points(4, epsilon, C, 32)


def test_sector_points_from_atlas(labels):
    points = sector_points_from_atlas(labels)
    assert SectorPoint((0.0, 0.0), labels.atlas.unit_index(1)) in points


def test_weight_ratio_constants():
    """For p = 3, K = 2 the worst ratio 26 beats pK(1+K) but not the mean-value constant."""
    report = weight_ratio_bound(3.0, 2.0)
    assert report["worst"] == pytest.approx(26.0)
    assert report["stated_constant"] == pytest.approx(18.0)
    assert report["mean_value_constant"] == pytest.approx(54.0)
    assert report["stated_ratio"] > 1.0
    assert report["mean_value_ratio"] <= 1.0


def test_weight_ratio_small_powers():
    """Both constants hold for p <= 2."""
    for p in (0.5, 1.0, 2.0):
        report = weight_ratio_bound(p, 1.5)
        assert report["stated_ratio"] <= 1.0 + 1e-12
        assert report["mean_value_ratio"] <= 1.0 + 1e-12
    with pytest.raises(ParameterError):
        weight_ratio_bound(-1.0, 1.0)
