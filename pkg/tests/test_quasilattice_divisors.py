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


"""Small divisors |k|² - 1: exact zero test, spectrum and norm certificate."""

import math

import numpy as np
import pytest

from qpf.exceptions import ParameterError
from qpf.quasilattice import (
    build_atlas,
    conjugate_norm_certificate,
    divisor_spectrum,
    linear_symbol,
    on_unit_circle,
    small_divisor,
)


@pytest.fixture(scope="module")
def atlas4():
    return build_atlas(4, 6)


def test_small_divisor_exact(atlas4):
    """The divisor vanishes exactly on k_1 and equals 1 + √2 at k_1 + k_2."""
    exact, value = small_divisor(atlas4.unit_index(1), atlas4)
    assert exact.is_zero()
    assert value == 0.0
    exact, value = small_divisor(atlas4.site(atlas4.index_of_word([1, 1, 0, 0])))
    assert value == pytest.approx(1.0 + math.sqrt(2.0))
    with pytest.raises(ParameterError):
        small_divisor(3)


def test_only_generators_on_the_circle(atlas4):
    """For q = 4 the unit circle meets the atlas in the 2q generators."""
    circle = np.flatnonzero(on_unit_circle(atlas4))
    assert sorted(circle) == sorted(atlas4.unit_index(j) for j in range(1, 9))


def test_linear_symbol(atlas4):
    """(1 - |k|²)² is 1 at the origin, 0 on the circle and 9 at 2k_1."""
    symbol = linear_symbol(atlas4)
    assert symbol[0] == 1.0
    assert symbol[atlas4.unit_index(5)] == 0.0
    assert symbol[atlas4.index_of_word([2, 0, 0, 0])] == pytest.approx(9.0)
    assert np.all(symbol >= 0.0)


def test_divisor_spectrum(atlas4):
    """Per-shell minima stay positive above the c/N^(2l0) envelope."""
    spectrum = divisor_spectrum(atlas4)
    assert spectrum.l0 == 1
    assert spectrum.shells == list(range(2, 7))
    assert all(m > 0.0 for m in spectrum.minima)
    assert spectrum.constant > 0.0
    assert spectrum.exponent < 0.0
    assert spectrum.extra_circle_sites == []
    for n, minimum, canon in spectrum.rows():
        assert minimum >= spectrum.constant / n**2 * (1 - 1e-12)
        assert atlas4.n_word[atlas4.index_of(canon)] == n


def test_divisor_spectrum_needs_four_shells():
    with pytest.raises(ParameterError):
        divisor_spectrum(build_atlas(4, 3))


def test_conjugate_norm_certificate(atlas4):
    """Field norms of the divisor are non-zero rational integers."""
    certificate = conjugate_norm_certificate(atlas4)
    assert certificate.sites == len(atlas4) - 8
    assert certificate.min_abs_norm >= 1
    assert certificate.max_integrality_error < 1e-6
