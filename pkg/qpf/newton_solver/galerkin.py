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


"""Galerkin truncation of the steady equation in orbit coordinates.

The unknown is a rotation-invariant field on a truncated atlas, stored as one
value per orbit representative. Products are exact before projection: the
square ``u^2`` is accumulated on every difference ``k_r - k_m`` between a
representative and an atlas site, so the projected cube
``P(u^3)_r = Σ_m (u^2)^{(k_r - k_m)} u^{(k_m)}`` carries no intermediate
truncation.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from qpf.asymptotics import epsilon_from_lambda, expansion_bundle
from qpf.core.qpf_component import _QpfComponent
from qpf.exceptions import CapacityError, ParameterError
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas, build_atlas, cyclotomic_data, linear_symbol
from qpf.quasilattice.atlas import _KeyPacker
from qpf.spectral_field import SpectralField, transfer

MAX_TABLE_ENTRIES = 150_000_000
PAIR_CHUNK = 2_000_000

QUASIPATTERN_PRESET: Dict[str, float] = {
    "q": 4,
    "lambda": 0.1,
    "n_max": 27,
    "k_cut": math.sqrt(5.0),
}


@dataclass
class GalerkinState:
    """Evaluation of the truncated equation at one iterate."""

    u: np.ndarray
    lam: float
    square: np.ndarray
    residual: np.ndarray
    truncation_loss: float


class GalerkinSystem(_QpfComponent):
    """
    Truncated steady Swift–Hohenberg operator on the symmetric subspace.

    ``residual(u, λ) = ((1-|k|^2)^2 - λ) u + P(u^3)`` per representative, and
    its Jacobian ``((1-|k|^2)^2 - λ) v + 3 P(u^2 v)``. The Jacobian is
    symmetric in the orbit-weighted scalar product ``Σ_r |orbit_r| v_r w_r``.
    """

    def __init__(self, atlas: LatticeAtlas, logger: Optional[Logger] = None):
        super().__init__(logger if logger is not None else atlas.logger)
        if np.any(atlas.rotation < 0):
            raise ParameterError("The Galerkin window must be closed under rotation.")
        self.atlas = atlas
        self.q = atlas.q
        self.reps = atlas.orbit_reps
        self.sizes = atlas.orbit_sizes.astype(float)
        self.orbit_id = atlas.orbit_id
        self.dof = int(self.reps.size)
        self.diag = linear_symbol(atlas)[self.reps]
        self._build_difference_table()
        self.logger.info(
            "Galerkin system q=%d: %d sites, %d unknowns, %d difference sites",
            self.q,
            len(atlas),
            self.dof,
            self._keys.size,
        )

    @classmethod
    def from_truncation(
        cls,
        q: int,
        n_max: int,
        k_cut: Optional[float] = None,
        logger: Optional[Logger] = None,
    ) -> "GalerkinSystem":
        return cls(build_atlas(q, n_max, k_cut=k_cut, logger=logger), logger=logger)

    @classmethod
    def _define_metadata(cls):
        return {"component_type": "GalerkinSystem"}

    # tables ---------------------------------------------------------------

    def _build_difference_table(self) -> None:
        atlas = self.atlas
        n = len(atlas)
        if self.dof * n > MAX_TABLE_ENTRIES:
            raise CapacityError(
                f"Difference table of {self.dof} x {n} entries exceeds {MAX_TABLE_ENTRIES}."
            )
        canon = atlas.canon
        dim = canon.shape[1]
        self._packer = _KeyPacker(2 * int(np.abs(canon).max(initial=1)), dim)
        step = max(1, PAIR_CHUNK // n)
        keys = np.concatenate(
            [
                self._packer.pack(
                    (canon[chunk][:, None, :] - canon[None, :, :]).reshape(-1, dim)
                )
                for chunk in np.array_split(self.reps, -(-self.dof // step))
            ]
        )
        self._keys, inverse = np.unique(keys, return_inverse=True)
        self._table = inverse.reshape(self.dof, n)
        origin = self._packer.pack(np.zeros((1, dim), dtype=np.int64))
        self._origin = int(np.searchsorted(self._keys, origin[0]))
        self._outside = ~np.isin(self._keys, self._packer.pack(canon))
        self._projector = sp.csr_matrix(
            (np.ones(n), (np.arange(n), self.orbit_id)), shape=(n, self.dof)
        )
        self.logger.debug("Difference table: %d entries", self._table.size)

    # coordinates ----------------------------------------------------------

    def expand(self, v: np.ndarray) -> np.ndarray:
        """Site coefficients of a representative vector."""
        return np.asarray(v, dtype=float)[self.orbit_id]

    def to_field(self, v: np.ndarray) -> SpectralField:
        return SpectralField.from_orbit_values(self.atlas, np.asarray(v, dtype=float))

    def from_field(self, field: SpectralField) -> np.ndarray:
        """Representative vector of a symmetric field (lossy transfer to the window)."""
        moved = transfer(field, self.atlas, strict=False)
        if not moved.is_symmetric():
            raise ParameterError("Only rotation-invariant fields have orbit coordinates.")
        if moved.truncation_loss > 0.0:
            self.logger.debug("Field truncated to the window, loss %.3e", moved.truncation_loss)
        return moved.coeffs[self.reps].copy()

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dof)

    def asymptotic_guess(self, lam: float) -> np.ndarray:
        """``U_ε`` on the window with ``ε = epsilon_from_lambda(λ)``."""
        epsilon = epsilon_from_lambda(self.q, lam)
        return self.asymptotic_field(epsilon)

    def asymptotic_field(self, epsilon: float) -> np.ndarray:
        return self.from_field(expansion_bundle(self.q).U_eps(epsilon))

    def unit_coefficient(self, v: np.ndarray) -> float:
        """Coefficient on the orbit of the unit vectors."""
        return float(v[self.orbit_id[self.atlas.unit_index(1)]])

    # norms ------------------------------------------------------------------

    def norm(self, v: np.ndarray, s: float = 0.0) -> float:
        """``H_s`` norm of the symmetric field with representatives ``v``."""
        weights = self.sizes * self.atlas.sobolev_weights(s)[self.reps]
        return float(np.sqrt(np.dot(weights, np.asarray(v) ** 2)))

    def inner(self, v: np.ndarray, w: np.ndarray) -> float:
        return float(np.dot(self.sizes, np.asarray(v) * np.asarray(w)))

    # products -------------------------------------------------------------

    def quadratic(self, u_full: np.ndarray, v_full: np.ndarray) -> np.ndarray:
        """Coefficients of ``u v`` on the difference sites."""
        canon = self.atlas.canon
        fi, gi = np.flatnonzero(u_full), np.flatnonzero(v_full)
        out = np.zeros(self._keys.size)
        if fi.size == 0 or gi.size == 0:
            return out
        gc, gv = canon[gi], v_full[gi]
        step = max(1, PAIR_CHUNK // gi.size)
        for start in range(0, fi.size, step):
            rows = fi[start : start + step]
            sums = (canon[rows][:, None, :] + gc[None, :, :]).reshape(-1, canon.shape[1])
            keys = self._packer.pack(sums)
            pos = np.minimum(np.searchsorted(self._keys, keys), self._keys.size - 1)
            hit = self._keys[pos] == keys
            vals = np.outer(u_full[rows], gv).ravel()
            out += np.bincount(pos[hit], weights=vals[hit], minlength=self._keys.size)
        return out

    def apply_rows(self, values: np.ndarray, x_full: np.ndarray) -> np.ndarray:
        """``Σ_m values(k_r - k_m) x^{(k_m)}`` for every representative ``r``."""
        out = np.empty(self.dof)
        step = max(1, PAIR_CHUNK // max(len(self.atlas), 1))
        for start in range(0, self.dof, step):
            block = self._table[start : start + step]
            out[start : start + step] = values[block] @ x_full
        return out

    def row_matrix(self, values: np.ndarray) -> np.ndarray:
        """Dense matrix of ``v -> P(values · v)`` in representative coordinates."""
        out = np.empty((self.dof, self.dof))
        step = max(1, PAIR_CHUNK // max(len(self.atlas), 1))
        for start in range(0, self.dof, step):
            block = values[self._table[start : start + step]]
            out[start : start + step] = (self._projector.T @ block.T).T
        return out

    def square_mean(self, square: np.ndarray) -> float:
        """Mean of ``u^2``, its coefficient at the origin."""
        return float(square[self._origin])

    def spill(self, square: np.ndarray) -> float:
        """``H_0`` mass of ``u^2`` on difference sites outside the window."""
        return float(np.sqrt(np.sum(square[self._outside] ** 2)))

    # equation ---------------------------------------------------------------

    def evaluate(self, u: np.ndarray, lam: float) -> GalerkinState:
        u = np.asarray(u, dtype=float)
        u_full = self.expand(u)
        square = self.quadratic(u_full, u_full)
        residual = (self.diag - lam) * u + self.apply_rows(square, u_full)
        return GalerkinState(
            u=u,
            lam=float(lam),
            square=square,
            residual=residual,
            truncation_loss=self.spill(square),
        )

    def residual(self, u: np.ndarray, lam: float) -> np.ndarray:
        return self.evaluate(u, lam).residual

    def jacobian_apply(
        self, u: np.ndarray, lam: float, v: np.ndarray, state: Optional[GalerkinState] = None
    ) -> np.ndarray:
        """``((1-|k|^2)^2 - λ) v + 3 P(u^2 v)``."""
        if state is None:
            u_full = self.expand(u)
            square = self.quadratic(u_full, u_full)
        else:
            square = state.square
        v = np.asarray(v, dtype=float)
        return (self.diag - lam) * v + 3.0 * self.apply_rows(square, self.expand(v))

    def jacobian_matrix(
        self, u: np.ndarray, lam: float, state: Optional[GalerkinState] = None
    ) -> np.ndarray:
        """Dense Jacobian in representative coordinates."""
        if state is None:
            state = self.evaluate(u, lam)
        matrix = 3.0 * self.row_matrix(state.square)
        matrix[np.diag_indices(self.dof)] += self.diag - lam
        return matrix

    def __repr__(self):
        return f"GalerkinSystem(q={self.q}, sites={len(self.atlas)}, dof={self.dof})"
