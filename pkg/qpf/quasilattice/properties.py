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


"""Structural checks of a built atlas: resonances, word-length laws, census."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from qpf.logger import Logger

from .atlas import EMBED_TOL, LatticeAtlas
from .divisors import on_unit_circle
from .ring import _check_order, cyclotomic_data, evaluate


def resonant_quadruples(q: int) -> List[Tuple[int, int, int, int]]:
    """
    Ordered index quadruples ``(j, l, r, s)`` in ``1..2q`` with
    ``k_j + k_l + k_r + k_s = 0``, found by exact enumeration.
    """
    q = _check_order(q)
    gens = cyclotomic_data(q).generators
    total = (
        gens[:, None, None, None, :]
        + gens[None, :, None, None, :]
        + gens[None, None, :, None, :]
        + gens[None, None, None, :, :]
    )
    hits = np.argwhere(~np.any(total, axis=-1))
    quads = [tuple(int(i) + 1 for i in row) for row in hits]
    return sorted(quads)


def has_two_opposite_pairs(quad: Tuple[int, int, int, int], q: int) -> bool:
    """Whether the quadruple splits into two pairs ``{k_j, -k_j}``."""
    j, l, r, s = (i - 1 for i in quad)

    def opposite(a: int, b: int) -> bool:
        return (a - b) % (2 * q) == q

    return (
        (opposite(j, l) and opposite(r, s))
        or (opposite(j, r) and opposite(l, s))
        or (opposite(j, s) and opposite(l, r))
    )


def resonant_count(q: int) -> int:
    """
    Ordered triples ``(l, r, s)`` with ``k_l + k_r + k_s = k_1``.

    These are the quadruples whose first entry is ``k_{1+q} = -k_1``; the count
    is the coefficient of ``k_1`` in the cube of the base pattern.
    """
    return sum(1 for quad in resonant_quadruples(q) if quad[0] == q + 1)


@dataclass
class CensusReport:
    """Shell populations against the ``c_1 N^{q-1}`` law."""

    q: int
    rows: List[Tuple[int, int, float]]
    c1: float


def census(atlas: LatticeAtlas) -> CensusReport:
    """Rows ``(N, count, count / N^{q-1})`` for ``N >= 1`` and the fitted ``c_1``."""
    shells, counts = atlas.shell_counts()
    rows = [
        (int(n), int(c), float(c) / float(n) ** (atlas.q - 1))
        for n, c in zip(shells, counts)
        if n >= 1
    ]
    return CensusReport(q=atlas.q, rows=rows, c1=atlas.census_constant)


@dataclass
class LatticeReport:
    """Outcome of :func:`lattice_properties`; ``violations`` is empty on success."""

    q: int
    sites: int
    pairs_checked: int
    pairs_in_atlas: int
    c1: float
    min_key_gap: float
    max_word_embed_error: float
    max_norm_error: float
    extra_circle_sites: int
    violations: List[str] = field(default_factory=list)


def lattice_properties(
    atlas: LatticeAtlas,
    n_pairs: int = 100_000,
    rng: Optional[np.random.Generator] = None,
    logger: Optional[Logger] = None,
) -> LatticeReport:
    """
    Check the word-length laws and indexing invariants on ``atlas``.

    Subadditivity ``N_{k+k'} <= N_k + N_k'`` is tested on ``n_pairs`` random
    pairs whose sum lies in the atlas; symmetry ``N_{-k} = N_k``, growth
    ``|k|^2 <= N_k^2`` and closure under rotation and negation are checked on
    every site.
    """
    log = logger if logger is not None else atlas.logger
    rng = rng if rng is not None else np.random.default_rng(0)
    violations: List[str] = []
    n = len(atlas)

    first = rng.integers(0, n, size=n_pairs)
    second = rng.integers(0, n, size=n_pairs)
    summed = atlas.lookup(atlas.canon[first] + atlas.canon[second])
    present = summed >= 0
    bad = present & (
        atlas.n_word[np.maximum(summed, 0)] > atlas.n_word[first] + atlas.n_word[second]
    )
    if bad.any():
        violations.append(f"subadditivity fails on {int(bad.sum())} pairs")

    if np.any(atlas.negation < 0):
        violations.append("atlas is not closed under negation")
    elif np.any(atlas.n_word[atlas.negation] != atlas.n_word):
        violations.append("N_{-k} differs from N_k")
    if np.any(atlas.rotation < 0):
        violations.append("atlas is not closed under rotation")
    elif np.any(atlas.n_word[atlas.rotation] != atlas.n_word):
        violations.append("rotation changes N_k")

    slack = atlas.n_word.astype(np.int64) ** 2
    growth = -atlas.norm2_coeffs.copy()
    growth[:, 0] += slack
    if np.any(evaluate(growth, atlas.q) < -EMBED_TOL * np.maximum(slack, 1)):
        violations.append("growth bound |k| <= N_k fails")

    if np.any(np.abs(atlas.words).sum(axis=1) != atlas.n_word):
        violations.append("stored words are not minimal")

    word_embed = atlas.words @ np.column_stack(
        [np.cos(np.arange(atlas.q) * np.pi / atlas.q),
         np.sin(np.arange(atlas.q) * np.pi / atlas.q)]
    )
    word_error = float(np.abs(word_embed - atlas.embed).max())
    if word_error > EMBED_TOL * max(1, atlas.n_max):
        violations.append(f"word and canonical embeddings differ by {word_error:.3g}")

    norm_error = float(np.abs(atlas.norm2 - (atlas.embed**2).sum(axis=1)).max())
    if norm_error > 1e-10 * max(1, atlas.n_max**2):
        violations.append(f"exact and float norms differ by {norm_error:.3g}")

    if n > 1:
        distances, _ = cKDTree(atlas.embed).query(atlas.embed, k=2)
        min_gap = float(distances[:, 1].min())
    else:
        min_gap = float("inf")
    if min_gap <= EMBED_TOL:
        violations.append("two canonical keys share one embedding")

    circle = on_unit_circle(atlas)
    extra = int(circle.sum()) - int(np.count_nonzero(atlas.unit_indices >= 0))
    if extra:
        violations.append(f"{extra} non-generator sites lie on the unit circle")

    report = LatticeReport(
        q=atlas.q,
        sites=n,
        pairs_checked=int(n_pairs),
        pairs_in_atlas=int(present.sum()),
        c1=atlas.census_constant,
        min_key_gap=min_gap,
        max_word_embed_error=word_error,
        max_norm_error=norm_error,
        extra_circle_sites=extra,
        violations=violations,
    )
    for message in violations:
        log.warning("Lattice property violated: %s", message)
    log.info(
        "Lattice properties q=%d: %d sites, %d/%d pairs in atlas, c1 = %.4g",
        atlas.q,
        n,
        report.pairs_in_atlas,
        n_pairs,
        report.c1,
    )
    return report
