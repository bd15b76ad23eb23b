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


"""Elimination of the far and annulus blocks of ``L_ε U = f``.

Writing ``U = U_0 + U_1 + U_2`` along the split, the ``S0 ∪ S1`` rows are
solved for ``(U_0, U_1)`` given ``U_2`` and ``f``; what is left is an equation
on ``S2`` alone.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from qpf.asymptotics import ExpansionBundle, expansion_bundle
from qpf.exceptions import ParameterError, SingularBlockError
from qpf.logger import Logger
from qpf.spectral_field import SpectralField, hs_norm, multiply, project, transfer

from .linear_operator import assemble_L_eps
from .splitting import SplitLabels


@dataclass
class SchurReduction:
    """Factorized outer block and the coupling needed for the reduced equation."""

    labels: SplitLabels
    operator: sp.csr_matrix
    outer: np.ndarray
    inner: np.ndarray
    f: SpectralField
    _lu: object

    def _field(self, indices: np.ndarray, values: np.ndarray) -> SpectralField:
        coeffs = np.zeros(len(self.labels.atlas))
        coeffs[indices] = values
        return SpectralField(self.labels.atlas, coeffs)

    def _outer_solution(self, u2: SpectralField) -> np.ndarray:
        coupling = self.operator[self.outer][:, self.inner]
        rhs = self.f.coeffs[self.outer] - coupling @ u2.coeffs[self.inner]
        if self.outer.size == 0:
            return rhs
        return self._lu.solve(rhs)

    def eliminate(self, u2: SpectralField) -> Tuple[SpectralField, SpectralField]:
        """``(U_0, U_1)`` determined by ``U_2`` and ``f``."""
        if np.any(u2.coeffs[self.outer] != 0.0):
            raise ParameterError("U₂ must be supported in S2.")
        solution = self._field(self.outer, self._outer_solution(u2))
        return project(solution, self.labels, "S0"), project(solution, self.labels, "S1")

    def reduced_apply(self, u2: SpectralField) -> SpectralField:
        """Schur complement ``L_22 - L_2o L_oo^{-1} L_o2`` applied to ``U_2``."""
        op = self.operator
        coupling = op[self.outer][:, self.inner] @ u2.coeffs[self.inner]
        correction = op[self.inner][:, self.outer] @ (
            self._lu.solve(coupling) if self.outer.size else coupling
        )
        values = op[self.inner][:, self.inner] @ u2.coeffs[self.inner] - correction
        return self._field(self.inner, values)

    def reduced_rhs(self) -> SpectralField:
        """``f_2 - L_2o L_oo^{-1} f_o``."""
        op = self.operator
        fo = self.f.coeffs[self.outer]
        correction = op[self.inner][:, self.outer] @ (
            self._lu.solve(fo) if self.outer.size else fo
        )
        return self._field(self.inner, self.f.coeffs[self.inner] - correction)


def schur_reduce(
    labels: SplitLabels,
    epsilon: float,
    f: SpectralField,
    bundle: Optional[ExpansionBundle] = None,
    operator: Optional[sp.csr_matrix] = None,
    logger: Optional[Logger] = None,
) -> SchurReduction:
    """
    Factorize the ``S0 ∪ S1`` block of ``L_ε`` on the labelled atlas.

    Raises:
        SingularBlockError: the outer block is singular on the truncation.
    """
    atlas = labels.atlas
    log = logger if logger is not None else atlas.logger
    if f.atlas is not atlas:
        raise ParameterError("Right-hand side must live on the labelled atlas.")
    if operator is None:
        bundle = expansion_bundle(atlas.q) if bundle is None else bundle
        operator = assemble_L_eps(atlas, epsilon, bundle)
    inner = labels.indices("S2")
    outer = np.flatnonzero(labels.region != 2)
    lu = None
    if outer.size:
        try:
            lu = splu(operator[outer][:, outer].tocsc())
        except RuntimeError as exc:
            raise SingularBlockError(f"Outer block of L_ε is singular: {exc}") from exc
    log.debug("Schur reduction: %d outer, %d inner sites", outer.size, inner.size)
    return SchurReduction(labels, operator, outer, inner, f, lu)


def schur_estimates(
    labels: SplitLabels,
    epsilon: float,
    n_trials: int = 20,
    s: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    bundle: Optional[ExpansionBundle] = None,
    n_modes: int = 20,
) -> Dict[str, float]:
    """
    Fitted prefactors of the elimination estimates over random inputs.

    ``c0_u2 = max ||U_0||_s / (ε^2 ||U_2||_s)`` and ``c1_u2`` with ``ε^4`` are
    measured with ``f = 0``; ``c0_f = max ε ||U_0||_s / ||(P_0+P_1) f||_s`` and
    ``c1_f = max ε^2 ||U_1||_s / ||(εP_0+P_1) f||_s`` with ``U_2 = 0``.
    """
    atlas = labels.atlas
    rng = rng if rng is not None else np.random.default_rng(0)
    zero = SpectralField.zeros(atlas)
    outer_sites = np.flatnonzero(labels.region != 2)
    reduction = schur_reduce(labels, epsilon, zero, bundle)
    fits = {"c0_u2": 0.0, "c1_u2": 0.0, "c0_f": 0.0, "c1_f": 0.0}
    for _ in range(n_trials):
        u2 = SpectralField.random(atlas, n_modes, rng, support=labels.indices("S2"))
        u0, u1 = reduction.eliminate(u2)
        norm2 = hs_norm(u2, s)
        if norm2 > 0.0:
            fits["c0_u2"] = max(fits["c0_u2"], hs_norm(u0, s) / (epsilon**2 * norm2))
            fits["c1_u2"] = max(fits["c1_u2"], hs_norm(u1, s) / (epsilon**4 * norm2))

        f = SpectralField.random(atlas, n_modes, rng, support=outer_sites)
        forced = schur_reduce(labels, epsilon, f, operator=reduction.operator)
        u0, u1 = forced.eliminate(zero)
        f0, f1 = project(f, labels, "S0"), project(f, labels, "S1")
        outer_norm = hs_norm(f0 + f1, s)
        weighted = hs_norm(epsilon * f0 + f1, s)
        if outer_norm > 0.0:
            fits["c0_f"] = max(fits["c0_f"], epsilon * hs_norm(u0, s) / outer_norm)
        if weighted > 0.0:
            fits["c1_f"] = max(fits["c1_f"], epsilon**2 * hs_norm(u1, s) / weighted)
    return fits


def projection_identities(
    labels: SplitLabels,
    n_trials: int = 100,
    rng: Optional[np.random.Generator] = None,
    bundle: Optional[ExpansionBundle] = None,
    n_modes: int = 20,
) -> Dict[str, float]:
    """
    Largest absolute coefficient of ``P_1(aU_2)``, ``P_1(bU_2)``,
    ``P_1(ãU_1)`` and ``P_2(ãU_1)`` over random fields, ``ã = a - a_0``.

    ``U_2`` is drawn on S2 and ``U_1`` on S1; all four values are exactly zero
    when the split is sound.
    """
    atlas = labels.atlas
    rng = rng if rng is not None else np.random.default_rng(0)
    bundle = expansion_bundle(atlas.q) if bundle is None else bundle
    a = transfer(bundle.a_field, atlas, strict=False)
    b = transfer(bundle.b_field, atlas, strict=False)
    a_tilde = a.add_constant(-bundle.a0)
    worst = {"P1(aU2)": 0.0, "P1(bU2)": 0.0, "P1(ãU1)": 0.0, "P2(ãU1)": 0.0}
    disc, annulus = labels.indices("S2"), labels.indices("S1")

    def peak(field: SpectralField, region: str) -> float:
        return float(np.abs(project(field, labels, region).coeffs).max(initial=0.0))

    for _ in range(n_trials):
        if disc.size:
            u2 = SpectralField.random(atlas, n_modes, rng, support=disc)
            worst["P1(aU2)"] = max(worst["P1(aU2)"], peak(multiply(a, u2), "S1"))
            worst["P1(bU2)"] = max(worst["P1(bU2)"], peak(multiply(b, u2), "S1"))
        if annulus.size:
            u1 = SpectralField.random(atlas, n_modes, rng, support=annulus)
            product = multiply(a_tilde, u1)
            worst["P1(ãU1)"] = max(worst["P1(ãU1)"], peak(product, "S1"))
            worst["P2(ãU1)"] = max(worst["P2(ãU1)"], peak(product, "S2"))
    return worst
