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


"""Quasiperiodic functions as real coefficient vectors over an atlas.

A :class:`SpectralField` stores ``u^{(k)}`` densely, one value per atlas site,
for ``U(x) = Σ u^{(k)} e^{ik·x}``. Fields are immutable values: every
operation returns a new field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np

from qpf.data_types import BaseDataType
from qpf.exceptions import (
    NotInAtlasError,
    ParameterError,
    UnclassifiedAtlasError,
)
from qpf.execution import QpfExecutor, map_ordered
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SobolevIndex:
    """Regularity index ``s >= 0`` of the ``H_s`` norm."""

    s: float

    def __post_init__(self):
        if not float(self.s) >= 0.0:
            raise ParameterError(f"Sobolev index must be non-negative, got {self.s}.")

    def __float__(self) -> float:
        return float(self.s)


SIndex = Union[float, int, SobolevIndex]


def _index(s: SIndex) -> float:
    return float(s if isinstance(s, SobolevIndex) else SobolevIndex(float(s)))


class SpectralField(BaseDataType[np.ndarray]):
    """
    Real coefficients ``u^{(k)}`` on the sites of one atlas.

    With ``symmetric=True`` the coefficients must be constant on every
    rotation orbit. Reality (``u^{(-k)} = u^{(k)}``) is not enforced so that
    indicator fields can be built; :meth:`is_real` reports it.
    """

    def __init__(
        self,
        atlas: LatticeAtlas,
        coeffs: np.ndarray,
        symmetric: bool = False,
        truncation_loss: float = 0.0,
        logger: Optional[Logger] = None,
    ):
        self.atlas = atlas
        self.symmetric = bool(symmetric)
        self.truncation_loss = float(truncation_loss)
        values = np.array(coeffs, dtype=float, copy=True)
        super().__init__(values, logger if logger is not None else atlas.logger)
        values.setflags(write=False)

    def validate(self, data: np.ndarray) -> bool:
        if data.shape != (len(self.atlas),):
            raise ParameterError(
                f"Expected {len(self.atlas)} coefficients, got shape {data.shape}."
            )
        if not np.all(np.isfinite(data)):
            raise ParameterError("Field coefficients must be finite.")
        if self.symmetric and not _constant_on_orbits(self.atlas, data):
            raise ParameterError("Coefficients are not constant on rotation orbits.")
        return True

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, atlas: LatticeAtlas) -> "SpectralField":
        return cls(atlas, np.zeros(len(atlas)), symmetric=True)

    @classmethod
    def from_map(
        cls, atlas: LatticeAtlas, values: Dict[int, float], symmetric: bool = False
    ) -> "SpectralField":
        coeffs = np.zeros(len(atlas))
        for index, value in values.items():
            coeffs[int(index)] = float(value)
        return cls(atlas, coeffs, symmetric=symmetric)

    @classmethod
    def indicator(cls, atlas: LatticeAtlas, index: int) -> "SpectralField":
        return cls.from_map(atlas, {index: 1.0})

    @classmethod
    def from_orbit_values(
        cls, atlas: LatticeAtlas, values: np.ndarray
    ) -> "SpectralField":
        """Symmetric field taking ``values[o]`` on orbit ``o``."""
        values = np.asarray(values, dtype=float)
        if values.shape != atlas.orbit_reps.shape:
            raise ParameterError(
                f"Expected {atlas.orbit_reps.size} orbit values, got {values.shape}."
            )
        return cls(atlas, values[atlas.orbit_id], symmetric=True)

    @classmethod
    def random(
        cls,
        atlas: LatticeAtlas,
        n_modes: int,
        rng: np.random.Generator,
        symmetric: bool = False,
        support: Optional[np.ndarray] = None,
        n_word_max: Optional[int] = None,
    ) -> "SpectralField":
        """
        Random real field on at most ``n_modes`` sites (orbits when symmetric).

        Candidate sites can be restricted to the index array ``support`` and to
        ``N_k <= n_word_max``; values are standard normal.
        """
        mask = np.zeros(len(atlas), dtype=bool)
        mask[np.arange(len(atlas)) if support is None else np.asarray(support)] = True
        if n_word_max is not None:
            mask &= atlas.n_word <= n_word_max
        coeffs = np.zeros(len(atlas))
        if symmetric:
            inside = np.bincount(atlas.orbit_id[mask], minlength=atlas.orbit_reps.size)
            full = np.flatnonzero(inside == atlas.orbit_sizes)
            chosen = rng.permutation(full)[:n_modes]
            values = np.zeros(atlas.orbit_reps.size)
            values[chosen] = rng.standard_normal(chosen.size)
            return cls.from_orbit_values(atlas, values)
        closed = mask & (atlas.negation >= 0)
        closed[closed] &= mask[atlas.negation[closed]]
        candidates = np.flatnonzero(closed & (np.arange(len(atlas)) <= atlas.negation))
        chosen = rng.permutation(candidates)[:n_modes]
        values = rng.standard_normal(chosen.size)
        coeffs[chosen] = values
        coeffs[atlas.negation[chosen]] = values
        return cls(atlas, coeffs)

    # views ----------------------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._data

    @property
    def support(self) -> np.ndarray:
        """Indices of the non-zero coefficients."""
        return np.flatnonzero(self._data)

    def mean(self) -> float:
        """Average of the function, the coefficient at ``k = 0``."""
        return float(self._data[0])

    def coefficient(self, index: int) -> float:
        return float(self._data[int(index)])

    def orbit_values(self) -> np.ndarray:
        """Coefficients at the orbit representatives."""
        return self._data[self.atlas.orbit_reps].copy()

    def max_word_length(self) -> int:
        support = self.support
        return int(self.atlas.n_word[support].max()) if support.size else 0

    def is_real(self, tol: float = SYMMETRY_TOL) -> bool:
        neg = self.atlas.negation
        if np.any((neg < 0) & (self._data != 0)):
            return False
        ok = neg >= 0
        scale = tol * max(1.0, float(np.abs(self._data).max(initial=0.0)))
        return bool(np.all(np.abs(self._data[ok] - self._data[neg[ok]]) <= scale))

    def is_symmetric(self) -> bool:
        return _constant_on_orbits(self.atlas, self._data)

    # arithmetic -----------------------------------------------------------

    def _same_atlas(self, other: "SpectralField") -> None:
        if other.atlas is not self.atlas:
            raise ParameterError("Fields live on different atlases; use transfer().")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._same_atlas(other)
        return SpectralField(
            self.atlas,
            self._data + other._data,
            symmetric=self.symmetric and other.symmetric,
        )

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self + (-other)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.atlas, -self._data, symmetric=self.symmetric)

    def __mul__(self, scalar: float) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            raise TypeError("Use multiply() for the product of two fields.")
        return SpectralField(
            self.atlas, float(scalar) * self._data, symmetric=self.symmetric
        )

    __rmul__ = __mul__

    def add_constant(self, value: float) -> "SpectralField":
        coeffs = self._data.copy()
        coeffs[0] += float(value)
        return SpectralField(self.atlas, coeffs, symmetric=self.symmetric)

    def __repr__(self):
        return (
            f"SpectralField(q={self.atlas.q}, modes={self.support.size}, "
            f"symmetric={self.symmetric})"
        )


def _constant_on_orbits(atlas: LatticeAtlas, coeffs: np.ndarray) -> bool:
    rot = atlas.rotation
    if np.any((rot < 0) & (coeffs != 0)):
        return False
    ok = rot >= 0
    scale = SYMMETRY_TOL * max(1.0, float(np.abs(coeffs).max(initial=0.0)))
    return bool(np.all(np.abs(coeffs[ok] - coeffs[rot[ok]]) <= scale))


def transfer(
    field: SpectralField, target: LatticeAtlas, strict: bool = True
) -> SpectralField:
    """
    Re-index ``field`` onto ``target`` by canonical key.

    Mass on sites missing from ``target`` raises :class:`NotInAtlasError` in
    strict mode and is recorded as ``truncation_loss`` otherwise.
    """
    if target.q != field.atlas.q:
        raise ParameterError("Cannot transfer between quasilattices of different q.")
    if target is field.atlas:
        return field
    support = field.support
    where = target.lookup(field.atlas.canon[support])
    missing = where < 0
    loss = float(np.sqrt(np.sum(field.coeffs[support[missing]] ** 2)))
    if strict and missing.any():
        raise NotInAtlasError(
            f"{int(missing.sum())} modes of the field are outside the target atlas."
        )
    coeffs = np.zeros(len(target))
    coeffs[where[~missing]] = field.coeffs[support[~missing]]
    return SpectralField(
        target,
        coeffs,
        symmetric=field.symmetric and not missing.any(),
        truncation_loss=loss,
    )


def hs_norm(field: SpectralField, s: SIndex = 0.0) -> float:
    """``(Σ (1 + N_k^2)^s |u^{(k)}|^2)^{1/2}``."""
    weights = field.atlas.sobolev_weights(_index(s))
    return float(np.sqrt(np.dot(weights, field.coeffs**2)))


def inner(f: SpectralField, g: SpectralField, s: SIndex = 0.0) -> float:
    """``H_s`` scalar product of two fields on the same atlas."""
    if f.atlas is not g.atlas:
        raise ParameterError("Scalar products need fields on the same atlas.")
    weights = f.atlas.sobolev_weights(_index(s))
    return float(np.dot(weights, f.coeffs * g.coeffs))


def project(field: SpectralField, labels, region) -> SpectralField:
    """
    Keep the coefficients inside a spectral region and zero the rest.

    ``labels`` is a split of the field's atlas; ``region`` is ``"S0"``,
    ``"S1"``, ``"S2"`` or ``("S2", j)`` for the disc around ``k_j``.
    """
    if labels.atlas is not field.atlas:
        raise UnclassifiedAtlasError(
            "Spectral labels were computed on a different atlas."
        )
    mask = labels.mask(region)
    return SpectralField(
        field.atlas,
        np.where(mask, field.coeffs, 0.0),
        symmetric=field.symmetric and labels.rotation_invariant(region),
    )


def rotate_field(field: SpectralField, steps: int = 1) -> SpectralField:
    """Field whose coefficient at ``R k`` is the input coefficient at ``k``."""
    atlas = field.atlas
    coeffs = field.coeffs
    for _ in range(int(steps) % (2 * atlas.q)):
        rot = atlas.rotation
        if np.any((rot < 0) & (coeffs != 0)):
            raise NotInAtlasError("Rotated field leaves the truncation window.")
        rotated = np.zeros_like(coeffs)
        ok = rot >= 0
        rotated[rot[ok]] = coeffs[ok]
        coeffs = rotated
    return SpectralField(atlas, coeffs, symmetric=field.symmetric)


def sample(
    field: SpectralField,
    window: float,
    resolution: int,
    executor: Optional[QpfExecutor] = None,
) -> np.ndarray:
    """
    Evaluate ``Σ u^{(k)} cos(k·x)`` on a uniform grid over ``[-window, window]^2``.

    Row ``r`` holds ``y = ys[r]`` and column ``c`` holds ``x = xs[c]``.
    """
    if int(resolution) < 2:
        raise ParameterError("Sampling resolution must be at least 2.")
    if not window > 0:
        raise ParameterError("Sampling window must be positive.")
    grid = np.linspace(-float(window), float(window), int(resolution))
    support = field.support
    kx, ky = field.atlas.embed[support, 0], field.atlas.embed[support, 1]
    values = field.coeffs[support]

    def row(y: float) -> np.ndarray:
        return np.cos(np.outer(grid, kx) + y * ky) @ values

    if support.size == 0:
        return np.zeros((grid.size, grid.size))
    return np.vstack(map_ordered(row, grid, executor))

