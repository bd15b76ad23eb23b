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


"""Spectral fields: construction, norms, products, transfer and sampling."""

import numpy as np
import pytest

from qpf.exceptions import NotInAtlasError, ParameterError, TruncationError
from qpf.execution import SequentialExecutor
from qpf.quasilattice import build_atlas, resonant_count
from qpf.spectral_field import (
    MoserNirenbergMonitor,
    ProductInequalityMonitor,
    SobolevIndex,
    SpectralField,
    cube,
    hs_norm,
    inner,
    multiply,
    rotate_field,
    sample,
    transfer,
)


@pytest.fixture(scope="module")
def atlas():
    return build_atlas(4, 4)


def base_field(atlas):
    """Σ_j e^{ik_j·x}, symmetric and real."""
    units = {atlas.unit_index(j): 1.0 for j in range(1, 2 * atlas.q + 1)}
    return SpectralField.from_map(atlas, units, symmetric=True)


def test_validation(atlas):
    """Wrong shapes, non-finite values and broken symmetry are rejected."""
    with pytest.raises(ParameterError):
        SpectralField(atlas, np.zeros(3))
    bad = np.zeros(len(atlas))
    bad[1] = np.nan
    with pytest.raises(ParameterError):
        SpectralField(atlas, bad)
    with pytest.raises(ParameterError):
        SpectralField.from_map(atlas, {atlas.unit_index(1): 1.0}, symmetric=True)
    with pytest.raises(ParameterError):
        SobolevIndex(-1.0)


def test_fields_are_immutable(atlas):
    field = SpectralField.zeros(atlas)
    with pytest.raises(ValueError):
        field.coeffs[0] = 1.0


def test_norms(atlas):
    """H_s weights are (1 + N_k²)^s."""
    field = base_field(atlas)
    assert hs_norm(field) == pytest.approx(np.sqrt(8.0))
    assert hs_norm(field, 3) == pytest.approx(np.sqrt(8.0 * 2.0**3))
    assert inner(field, field, SobolevIndex(1.0)) == pytest.approx(16.0)


def test_arithmetic_keeps_symmetry(atlas):
    field = base_field(atlas)
    twice = field + field
    assert twice.symmetric
    assert (2.0 * field).coefficient(atlas.unit_index(3)) == 2.0
    assert (twice - field).coeffs.tolist() == field.coeffs.tolist()
    assert field.add_constant(0.5).mean() == 0.5
    assert field.is_real()
    assert field.max_word_length() == 1
    with pytest.raises(TypeError):
        field * field


def test_orbit_values_round_trip(atlas):
    """Orbit values rebuild the same symmetric field."""
    field = base_field(atlas)
    rebuilt = SpectralField.from_orbit_values(atlas, field.orbit_values())
    assert np.array_equal(rebuilt.coeffs, field.coeffs)


def test_cube_of_base_pattern(atlas):
    """The k_1 coefficient of the cubed base pattern counts the resonances."""
    field = base_field(atlas)
    result = cube(field, strict=True)
    assert result.coefficient(atlas.unit_index(1)) == pytest.approx(resonant_count(4))
    assert result.truncation_loss == 0.0
    assert result.symmetric


def test_square_mean_is_parseval(atlas):
    """The mean of U² equals ||U||_0² for a real field."""
    field = SpectralField.random(atlas, 12, np.random.default_rng(3), n_word_max=2)
    assert field.is_real()
    square = multiply(field, field)
    assert square.mean() == pytest.approx(hs_norm(field) ** 2)


def test_product_of_indicators(atlas):
    """e^{ik_1·x} e^{ik_2·x} = e^{i(k_1+k_2)·x}."""
    k1 = SpectralField.indicator(atlas, atlas.unit_index(1))
    k2 = SpectralField.indicator(atlas, atlas.unit_index(2))
    product = multiply(k1, k2)
    assert product.support.tolist() == [atlas.index_of_word([1, 1, 0, 0])]


def test_truncation_loss():
    """Products leaving the atlas record their lost mass, strict mode raises."""
    small = build_atlas(4, 1)
    k1 = SpectralField.indicator(small, small.unit_index(1))
    square = multiply(k1, k1)
    assert square.truncation_loss == pytest.approx(1.0)
    assert not square.coeffs.any()
    with pytest.raises(TruncationError):
        multiply(k1, k1, strict=True)


def test_transfer(atlas):
    """Fields move between atlases by canonical key."""
    small = build_atlas(4, 1)
    field = base_field(small)
    moved = transfer(field, atlas)
    assert hs_norm(moved) == pytest.approx(hs_norm(field))
    assert moved.symmetric
    wide = SpectralField.indicator(atlas, atlas.index_of_word([2, 0, 0, 0]))
    with pytest.raises(NotInAtlasError):
        transfer(wide, small)
    lossy = transfer(wide, small, strict=False)
    assert lossy.truncation_loss == pytest.approx(1.0)


def test_rotate_field(atlas):
    k1 = SpectralField.indicator(atlas, atlas.unit_index(1))
    rotated = rotate_field(k1, 2)
    assert rotated.support.tolist() == [atlas.unit_index(3)]


def test_sample_cosine(atlas):
    """Coefficients 1/2 at ±k_1 sample to cos(x)."""
    field = SpectralField.from_map(
        atlas, {atlas.unit_index(1): 0.5, atlas.unit_index(5): 0.5}
    )
    grid = np.linspace(-3.0, 3.0, 7)
    values = sample(field, 3.0, 7, executor=SequentialExecutor())
    assert values.shape == (7, 7)
    assert np.allclose(values, np.cos(grid)[None, :], atol=1e-12)
    with pytest.raises(ParameterError):
        sample(field, 3.0, 1)


def test_monitors_reproduce_their_calibration(atlas):
    """A check drawn from the calibration seed stays within the band."""
    for monitor in (
        ProductInequalityMonitor(atlas, n_pairs=10, n_modes=6),
        MoserNirenbergMonitor(atlas, n_pairs=10, n_modes=6),
    ):
        calibrated = monitor.calibrate(seed=5)
        assert calibrated > 0.0
        result = monitor.check(np.random.default_rng(5))
        assert result.max_ratio == pytest.approx(calibrated)
        assert result.within_band


def test_monitors_need_uncut_atlas():
    with pytest.raises(ParameterError):
        ProductInequalityMonitor(build_atlas(4, 3, k_cut=2.0))
