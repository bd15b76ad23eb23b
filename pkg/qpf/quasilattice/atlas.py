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


"""Generation and indexing of the quasilattice Γ.

:func:`build_atlas` walks Γ breadth first from the origin along the ``2q``
unit vectors ``k_j = ζ^{j-1}``. The layer at which a point is first reached is
its word length ``N_k``, which also settles relations between generators such
as ``k_1 + k_5 + k_9 = 0`` for ``q = 6``. Points are identified by their
power-basis coordinates (``canon``), which are unique for every ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from qpf.data_types import BaseDataType
from qpf.exceptions import CapacityError, NotInAtlasError, ParameterError
from qpf.fitting import BoundConstantModel
from qpf.logger import Logger

from .ring import RingElement, _check_order, cyclotomic_data, evaluate, norm2_coefficients

DEFAULT_CAPACITY = 5_000_000
EMBED_TOL = 1e-12
KCUT_REL_TOL = 1e-12


class _KeyPacker:
    """Packs bounded integer rows into int64 keys, base ``2*bound + 1``."""

    def __init__(self, bound: int, dim: int):
        self.bound = max(int(bound), 1)
        base = 2 * self.bound + 1
        if dim * math.log2(base) >= 62:
            raise CapacityError(
                f"Coordinates bounded by {self.bound} in dimension {dim} "
                "do not fit 64-bit keys."
            )
        self.powers = base ** np.arange(dim, dtype=np.int64)

    def in_range(self, rows: np.ndarray) -> np.ndarray:
        return np.all(np.abs(rows) <= self.bound, axis=1)

    def pack(self, rows: np.ndarray) -> np.ndarray:
        return (rows + self.bound) @ self.powers


@dataclass(frozen=True)
class LatticeSite:
    """One wave vector of an atlas."""

    index: int
    word: Tuple[int, ...]
    canon: Tuple[int, ...]
    embed: Tuple[float, float]
    norm2: RingElement
    n_word: int


@dataclass(frozen=True)
class AtlasTables:
    """Row-aligned site arrays; row ``i`` describes site ``i``."""

    words: np.ndarray
    canon: np.ndarray
    n_word: np.ndarray


class LatticeAtlas(BaseDataType[AtlasTables]):
    """
    Finite, immutable portion of Γ sorted by ``(N_k, canon)``.

    Besides the site tables the atlas carries exact squared norms, float
    embeddings, the rotation and negation permutations, and the orbit
    partition under rotation by ``π/q``. Index 0 is always the origin.
    """

    def __init__(
        self,
        q: int,
        n_max: int,
        k_cut: Optional[float],
        tables: AtlasTables,
        logger: Optional[Logger] = None,
    ):
        self.q = _check_order(q)
        self.n_max = int(n_max)
        self.k_cut = None if k_cut is None else float(k_cut)
        super().__init__(tables, logger)
        cyc = cyclotomic_data(self.q)
        self.min_poly = cyc.min_poly
        self.gram = np.cos(
            np.subtract.outer(np.arange(self.q), np.arange(self.q)) * math.pi / self.q
        )
        self.embed = tables.canon @ cyc.basis_embed
        self.norm2_coeffs = norm2_coefficients(tables.canon, self.q)
        self.norm2 = evaluate(self.norm2_coeffs, self.q)

        self._packer = _KeyPacker(int(np.abs(tables.canon).max(initial=1)), cyc.dim)
        keys = self._packer.pack(tables.canon)
        self._order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[self._order]

        self.rotation = self.lookup(tables.canon @ cyc.rotation)
        self.negation = self.lookup(-tables.canon)
        self.unit_indices = self.lookup(cyc.generators)
        self._build_orbits()
        self._weights: Dict[float, np.ndarray] = {}

    def validate(self, data: AtlasTables) -> bool:
        n = data.canon.shape[0]
        if n == 0:
            raise ParameterError("An atlas needs at least the origin.")
        if data.words.shape != (n, self.q) or data.n_word.shape != (n,):
            raise ParameterError("Atlas tables are not row-aligned.")
        if data.canon.shape[1] != cyclotomic_data(self.q).dim:
            raise ParameterError("Canonical coordinates have the wrong dimension.")
        return True

    def _build_orbits(self) -> None:
        if np.any(self.rotation < 0):
            # rotations of a k_cut atlas stay inside; only hand-made tables fail here
            self.logger.warning("Atlas is not closed under rotation by π/q.")
        current = np.arange(len(self))
        rep = current.copy()
        for _ in range(2 * self.q - 1):
            current = np.where(current >= 0, self.rotation[np.maximum(current, 0)], -1)
            rep = np.where(current >= 0, np.minimum(rep, current), rep)
        reps, self.orbit_id, self.orbit_sizes = np.unique(
            rep, return_inverse=True, return_counts=True
        )
        self.orbit_reps = reps

    # tables ---------------------------------------------------------------

    @property
    def words(self) -> np.ndarray:
        return self._data.words

    @property
    def canon(self) -> np.ndarray:
        return self._data.canon

    @property
    def n_word(self) -> np.ndarray:
        return self._data.n_word

    def __len__(self) -> int:
        return int(self._data.canon.shape[0])

    def site(self, index: int) -> LatticeSite:
        """Materialize site ``index`` as a :class:`LatticeSite`."""
        if not 0 <= index < len(self):
            raise NotInAtlasError(f"Site index {index} outside atlas of {len(self)}.")
        return LatticeSite(
            index=int(index),
            word=tuple(int(m) for m in self.words[index]),
            canon=tuple(int(a) for a in self.canon[index]),
            embed=(float(self.embed[index, 0]), float(self.embed[index, 1])),
            norm2=RingElement(tuple(self.norm2_coeffs[index]), self.q),
            n_word=int(self.n_word[index]),
        )

    # lookups --------------------------------------------------------------

    def lookup(self, canon_rows: np.ndarray) -> np.ndarray:
        """Indices of the given canonical rows, ``-1`` where absent."""
        rows = np.atleast_2d(np.asarray(canon_rows, dtype=np.int64))
        result = np.full(rows.shape[0], -1, dtype=np.int64)
        inside = self._packer.in_range(rows)
        if not inside.any():
            return result
        keys = self._packer.pack(rows[inside])
        pos = np.searchsorted(self._sorted_keys, keys)
        pos_clipped = np.minimum(pos, len(self) - 1)
        hit = self._sorted_keys[pos_clipped] == keys
        found = np.where(hit, self._order[pos_clipped], -1)
        result[inside] = found
        return result

    def canon_of_words(self, words: np.ndarray) -> np.ndarray:
        """Power-basis rows of words over ``k_1..k_q``."""
        gens = cyclotomic_data(self.q).generators[: self.q]
        return np.atleast_2d(np.asarray(words, dtype=np.int64)) @ gens

    def index_of(self, canon: Sequence[int]) -> int:
        found = int(self.lookup(np.asarray(canon))[0])
        if found < 0:
            raise NotInAtlasError(f"Point {tuple(canon)} is not in the atlas.")
        return found

    def index_of_word(self, word: Sequence[int]) -> int:
        """Index of the point ``Σ m_j k_j`` for a word over ``k_1..k_q``."""
        return self.index_of(self.canon_of_words(np.asarray(word))[0])

    def unit_index(self, j: int) -> int:
        """Index of ``k_j``, ``j`` counted from 1 up to ``2q``."""
        return int(self.unit_indices[(j - 1) % (2 * self.q)])

    # summaries ---------------------------------------------------------------

    def sobolev_weights(self, s: float) -> np.ndarray:
        """Cached weights ``(1 + N_k^2)^s`` of the ``H_s`` norm."""
        key = float(s)
        cached = self._weights.get(key)
        if cached is None:
            cached = np.exp(key * np.log1p(self.n_word.astype(float) ** 2))
            cached.setflags(write=False)
            self._weights[key] = cached
        return cached

    def shell_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """Word lengths present and the number of sites of each."""
        return np.unique(self.n_word, return_counts=True)

    @property
    def census_constant(self) -> float:
        """Smallest ``c_1`` with ``card{N_k = N} <= c_1 N^{q-1}`` on the atlas."""
        shells, counts = self.shell_counts()
        keep = shells >= 1
        model = BoundConstantModel(exponent=self.q - 1, side="upper")
        return model.fit(shells[keep], counts[keep])["constant"]

    def header(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "n_max": self.n_max,
            "k_cut": self.k_cut,
            "min_poly": list(self.min_poly),
        }

    @classmethod
    def _define_metadata(cls) -> Dict[str, Any]:
        return {"component_type": "DataType", "payload": "AtlasTables"}

    def __repr__(self):
        return (
            f"LatticeAtlas(q={self.q}, n_max={self.n_max}, k_cut={self.k_cut}, "
            f"sites={len(self)})"
        )


def build_atlas(
    q: int,
    n_max: int,
    k_cut: Optional[float] = None,
    capacity: int = DEFAULT_CAPACITY,
    logger: Optional[Logger] = None,
) -> LatticeAtlas:
    """
    Every ``k ∈ Γ`` with ``N_k <= n_max`` (and ``|k| <= k_cut`` when set).

    Breadth-first expansion: layer ``L`` adds the points of
    ``layer(L-1) + {k_j}`` not seen in the two previous layers. The first
    candidate reaching a point, in (parent row, generator) order, fixes its
    word. The ``k_cut`` filter is applied after the walk so that word lengths
    are those of the full lattice.

    Raises:
        InvalidOrderError: q < 4.
        ParameterError: n_max < 1 or non-positive k_cut.
        CapacityError: more than ``capacity`` sites, or key overflow.
    """
    q = _check_order(q)
    if int(n_max) < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max}.")
    if k_cut is not None and not k_cut > 0:
        raise ParameterError(f"k_cut must be positive, got {k_cut}.")
    log = logger if logger is not None else Logger()
    cyc = cyclotomic_data(q)
    packer = _KeyPacker(int(n_max) * int(np.abs(cyc.generators).max()), cyc.dim)

    origin = np.zeros((1, cyc.dim), dtype=np.int64)
    layers_canon = [origin]
    layers_words = [np.zeros((1, q), dtype=np.int64)]
    layers_keys = [packer.pack(origin)]
    total = 1
    for layer in range(1, int(n_max) + 1):
        candidates = (layers_canon[-1][:, None, :] + cyc.generators[None]).reshape(
            -1, cyc.dim
        )
        cand_words = (
            layers_words[-1][:, None, :] + cyc.generator_words[None]
        ).reshape(-1, q)
        keys, first = np.unique(packer.pack(candidates), return_index=True)
        fresh = ~np.isin(keys, np.concatenate(layers_keys[-2:]))
        first = first[fresh]
        total += first.size
        if total > capacity:
            raise CapacityError(
                f"Atlas for q={q} exceeds {capacity} sites at word length {layer}."
            )
        layers_canon.append(candidates[first])
        layers_words.append(cand_words[first])
        layers_keys.append(keys[fresh])
        log.debug("Layer %d: %d new sites", layer, first.size)

    canon = np.concatenate(layers_canon)
    words = np.concatenate(layers_words)
    n_word = np.concatenate(
        [np.full(len(block), n, dtype=np.int64) for n, block in enumerate(layers_canon)]
    )
    if k_cut is not None:
        norm2 = evaluate(norm2_coefficients(canon, q), q)
        keep = norm2 <= float(k_cut) ** 2 * (1.0 + KCUT_REL_TOL)
        canon, words, n_word = canon[keep], words[keep], n_word[keep]

    sort_keys = tuple(canon[:, i] for i in reversed(range(cyc.dim))) + (n_word,)
    order = np.lexsort(sort_keys)
    atlas = LatticeAtlas(
        q,
        n_max,
        k_cut,
        AtlasTables(words=words[order], canon=canon[order], n_word=n_word[order]),
        logger=log,
    )
    log.info(
        "Built atlas q=%d n_max=%d k_cut=%s with %d sites", q, n_max, k_cut, len(atlas)
    )
    return atlas


def rotate_site(
    atlas: LatticeAtlas, site: Union[LatticeSite, int], steps: int = 1
) -> LatticeSite:
    """Site obtained by rotating ``site`` by ``steps·π/q``."""
    index = site.index if isinstance(site, LatticeSite) else int(site)
    for _ in range(int(steps) % (2 * atlas.q)):
        index = int(atlas.rotation[index])
        if index < 0:
            raise NotInAtlasError("Rotation leaves the truncation window.")
    return atlas.site(index)
