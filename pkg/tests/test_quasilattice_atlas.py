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


"""Atlas generation, indexing and the structural lattice checks."""

import math

import numpy as np
import pytest

from qpf.exceptions import CapacityError, NotInAtlasError, ParameterError
from qpf.quasilattice import (
    build_atlas,
    census,
    has_two_opposite_pairs,
    lattice_properties,
    resonant_count,
    resonant_quadruples,
    rotate_site,
)


@pytest.fixture(scope="module")
def atlas4():
    """q = 4 atlas with word lengths up to 4."""
    return build_atlas(4, 4)


@pytest.mark.parametrize("n_max, expected", [(1, 9), (2, 41), (6, 1289)])
def test_q4_atlas_is_an_l1_ball(n_max, expected):
    """For q = 4 the generators are a basis, so the atlas counts an ℓ¹ ball."""
    assert len(build_atlas(4, n_max)) == expected


def test_origin_and_generators(atlas4):
    """Index 0 is the origin and every k_j is a distinct site of length 1."""
    assert atlas4.n_word[0] == 0
    assert not atlas4.canon[0].any()
    units = [atlas4.unit_index(j) for j in range(1, 9)]
    assert len(set(units)) == 8
    assert all(atlas4.n_word[i] == 1 for i in units)
    assert atlas4.unit_index(9) == atlas4.unit_index(1)
    for j, index in enumerate(units):
        x, y = atlas4.embed[index]
        assert x == pytest.approx(math.cos(j * math.pi / 4), abs=1e-12)
        assert y == pytest.approx(math.sin(j * math.pi / 4), abs=1e-12)


def test_sites_sorted_by_word_length(atlas4):
    """Sites are ordered by word length first."""
    assert np.all(np.diff(atlas4.n_word) >= 0)


def test_q6_relation_shortens_words():
    """k_1 + k_5 = k_3 for q = 6, so that sum has word length 1."""
    atlas = build_atlas(6, 2)
    index = atlas.index_of_word([1, 0, 0, 0, 1, 0])
    assert atlas.n_word[index] == 1
    assert index == atlas.unit_index(3)
    assert len(build_atlas(6, 1)) == 13


def test_lookup_and_missing_points(atlas4):
    """Lookups return -1 outside the atlas; index_of raises instead."""
    far = np.array([[9, 0, 0, 0]])
    assert atlas4.lookup(far)[0] == -1
    with pytest.raises(NotInAtlasError):
        atlas4.index_of([9, 0, 0, 0])
    with pytest.raises(NotInAtlasError):
        atlas4.site(len(atlas4))


def test_site_materialization(atlas4):
    """A site carries its word, exact norm and word length."""
    index = atlas4.index_of_word([1, 1, 0, 0])
    site = atlas4.site(index)
    assert site.n_word == 2
    assert float(site.norm2) == pytest.approx(2.0 + math.sqrt(2.0))
    assert site.canon == tuple(int(a) for a in atlas4.canon[index])


def test_rotation_and_negation_permutations(atlas4):
    """Rotation by π/q and negation are permutations of the atlas."""
    assert np.all(atlas4.rotation >= 0)
    assert np.array_equal(np.sort(atlas4.rotation), np.arange(len(atlas4)))
    assert np.array_equal(atlas4.negation[atlas4.negation], np.arange(len(atlas4)))
    k1 = atlas4.unit_index(1)
    assert rotate_site(atlas4, k1).index == atlas4.unit_index(2)
    assert rotate_site(atlas4, k1, steps=4).index == atlas4.negation[k1]
    assert rotate_site(atlas4, k1, steps=8).index == k1


def test_orbits_partition_the_atlas(atlas4):
    """Orbit sizes add up to the atlas; the origin is alone in its orbit."""
    assert atlas4.orbit_sizes.sum() == len(atlas4)
    assert atlas4.orbit_sizes[atlas4.orbit_id[0]] == 1
    assert atlas4.orbit_sizes[atlas4.orbit_id[atlas4.unit_index(1)]] == 8
    assert np.all(atlas4.orbit_id[atlas4.orbit_reps] == np.arange(atlas4.orbit_reps.size))


def test_k_cut_keeps_word_lengths():
    """The disc cut keeps the word lengths of the full lattice."""
    full = build_atlas(4, 5)
    cut = build_atlas(4, 5, k_cut=math.sqrt(5.0))
    assert len(cut) < len(full)
    assert cut.norm2.max() <= 5.0 * (1 + 1e-9)
    where = full.lookup(cut.canon)
    assert np.all(where >= 0)
    assert np.array_equal(full.n_word[where], cut.n_word)
    assert np.all(cut.rotation >= 0)


def test_parameter_errors():
    """n_max, k_cut and capacity are validated."""
    with pytest.raises(ParameterError):
        build_atlas(4, 0)
    with pytest.raises(ParameterError):
        build_atlas(4, 2, k_cut=0.0)
    with pytest.raises(CapacityError):
        build_atlas(4, 3, capacity=50)


def test_census_counts(atlas4):
    """Shell N holds the ℓ¹ sphere of radius N in four dimensions."""
    report = census(atlas4)
    counts = {n: c for n, c, _ in report.rows}
    assert counts == {1: 8, 2: 32, 3: 88, 4: 192}
    assert report.c1 == pytest.approx(max(c / n**3 for n, c in counts.items()))


def test_lattice_properties_hold(atlas4):
    """Word-length laws and indexing invariants hold on a clean atlas."""
    report = lattice_properties(atlas4, n_pairs=5000, rng=np.random.default_rng(1))
    assert report.violations == []
    assert report.extra_circle_sites == 0
    assert report.pairs_in_atlas > 0
    assert report.min_key_gap > 0.0


def test_lattice_properties_with_cut_q6():
    """The checks also pass on a cut q = 6 atlas."""
    atlas = build_atlas(6, 4, k_cut=2.0)
    report = lattice_properties(atlas, n_pairs=2000)
    assert not [v for v in report.violations if "unit circle" not in v]


def test_resonant_quadruples_q4():
    """For q = 4 every vanishing four-sum is two opposite pairs."""
    quads = resonant_quadruples(4)
    assert quads
    assert all(has_two_opposite_pairs(quad, 4) for quad in quads)
    assert resonant_count(4) == 21


@pytest.mark.parametrize("q", [4, 5, 7, 8])
def test_resonant_count_matches_lambda2_coefficient(q):
    """Without extra four-term resonances the count is 3(2q - 1)."""
    assert resonant_count(q) == 3 * (2 * q - 1)
